//! Principal-series matrix coefficients for the real group.
//!
//! The primary evaluation is quadrature of `h`-functions against K-type
//! characters. Two charts are used: the periodic trapezoid rule on the
//! rotation angle (spectrally accurate while the integrand's analyticity
//! strip, of width ~ e^{-2x}, is resolvable), and for large `x` the
//! equivalent integral over the lower-triangular chart, whose integrand
//! oscillates slowly in log coordinates. The two charts are
//! cross-validated in their overlap.
//!
//! The terminating hypergeometric closed form and the Jacobi-polynomial
//! bound from the `chi(a(-1)) = -1, s = 0` case serve as independent
//! oracles, not as the engine.

use super::{iwasawa, Mat2R, UnitaryCharacterR};
use crate::error::{Error, Result};
use crate::quad::{Kahan, GL16_NODES, GL16_WEIGHTS};
use crate::tolerances::{COEFF_QUAD_TOL, TRAPEZOID_MAX_NODES};
use num::complex::Complex64;
use std::f64::consts::PI;

/// Evaluation of the K-type basis function `h^chi_n` at a group element:
/// `chi(a(t)) * t * e^{i n psi}` in Iwasawa coordinates `(u, t, psi)`.
pub fn h_eval(chi: &UnitaryCharacterR, n: i64, g: &Mat2R) -> Result<Complex64> {
    if !chi.admits(n) {
        return Err(Error::domain(format!("K-type {n} violates parity")));
    }
    let (_, t, psi) = iwasawa(g);
    // t > 0, so the sign part of chi does not act
    let log_t = t.ln();
    let modulus = Complex64::new(log_t, chi.s * log_t).exp();
    Ok(modulus * Complex64::new(0.0, n as f64 * psi).exp())
}

/// Switch point between the rotation chart and the lower-triangular chart.
const CHART_SWITCH: f64 = 4.0;

/// `<a(e^x) h_n, h_m>` for the principal series with parameter `chi`.
pub fn matrix_coeff(chi: &UnitaryCharacterR, n: i64, m: i64, x: f64) -> Result<Complex64> {
    Ok(matrix_coeff_batch(chi, &[(n, m)], x)?[0])
}

/// Batched coefficients at a common `x`, sharing the node sweep.
pub fn matrix_coeff_batch(
    chi: &UnitaryCharacterR,
    pairs: &[(i64, i64)],
    x: f64,
) -> Result<Vec<Complex64>> {
    for &(n, m) in pairs {
        if !chi.admits(n) || !chi.admits(m) {
            return Err(Error::domain(format!(
                "K-type pair ({n}, {m}) violates parity for eps = {}",
                chi.eps
            )));
        }
    }
    if x < 0.0 {
        // <a^{-1} h_n, h_m> = conj(<a h_m, h_n>)
        let swapped: Vec<(i64, i64)> = pairs.iter().map(|&(n, m)| (m, n)).collect();
        let vals = matrix_coeff_batch(chi, &swapped, -x)?;
        return Ok(vals.into_iter().map(|v| v.conj()).collect());
    }
    if x <= CHART_SWITCH {
        trapezoid_batch(chi, pairs, x)
    } else {
        chart_batch(chi, pairs, x)
    }
}

/// Periodic trapezoid rule on the rotation angle, with node doubling
/// until two successive refinements agree.
fn trapezoid_batch(
    chi: &UnitaryCharacterR,
    pairs: &[(i64, i64)],
    x: f64,
) -> Result<Vec<Complex64>> {
    let tau = x.exp();
    let span = pairs
        .iter()
        .map(|&(n, m)| n.unsigned_abs().max(m.unsigned_abs()))
        .max()
        .unwrap_or(0) as usize;
    let mut nn = 64usize.max((4 * span + 4).next_power_of_two());
    let mut prev: Option<Vec<Complex64>> = None;
    loop {
        let vals = trapezoid_once(chi, pairs, tau, nn);
        if let Some(p) = &prev {
            let worst = p
                .iter()
                .zip(&vals)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if worst < COEFF_QUAD_TOL {
                return Ok(vals);
            }
        }
        prev = Some(vals);
        nn *= 2;
        if nn > TRAPEZOID_MAX_NODES {
            return Err(Error::NonConvergence(format!(
                "trapezoid rule at x = {x} still moving at {TRAPEZOID_MAX_NODES} nodes"
            )));
        }
    }
}

fn trapezoid_once(
    chi: &UnitaryCharacterR,
    pairs: &[(i64, i64)],
    tau: f64,
    nn: usize,
) -> Vec<Complex64> {
    let s = chi.s;
    let mut acc = vec![(Kahan::new(), Kahan::new()); pairs.len()];
    let step = 2.0 * PI / nn as f64;
    for j in 0..nn {
        let phi = j as f64 * step;
        let (sin, cos) = phi.sin_cos();
        // g = R(phi) * diag(tau, 1/tau); bottom row (sin * tau, cos / tau)
        let c21 = sin * tau;
        let c22 = cos / tau;
        let rho = c21.hypot(c22);
        let psi = c21.atan2(c22);
        let log_t = -rho.ln();
        let base = Complex64::new(log_t, s * log_t).exp();
        for (k, &(n, m)) in pairs.iter().enumerate() {
            let angle = n as f64 * psi - m as f64 * phi;
            let v = base * Complex64::new(0.0, angle).exp();
            acc[k].0.add(v.re);
            acc[k].1.add(v.im);
        }
    }
    acc.into_iter()
        .map(|(re, im)| Complex64::new(re.value(), im.value()) / nn as f64)
        .collect()
}

/// Lower-triangular chart: the same coefficient as
/// `(1/pi) e^{(is-1)x} int_R (1+w^2)^{-(1+is)/2} e_n(w)
///  (1+v^2)^{-(1-is)/2} conj(e_m(v)) dw`, `v = w e^{-2x}`,
/// with `e_n(w) = ((1+iw)/sqrt(1+w^2))^n`. In log coordinates the
/// integrand's phase drifts slowly, so fixed-order panels converge for
/// arbitrarily large `x`.
fn chart_batch(chi: &UnitaryCharacterR, pairs: &[(i64, i64)], x: f64) -> Result<Vec<Complex64>> {
    let coarse = chart_once(chi, pairs, x, 0.5);
    let fine = chart_once(chi, pairs, x, 0.25);
    let worst = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let scale = 1.0 + fine.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if worst > 1e-9 * scale {
        return Err(Error::NonConvergence(format!(
            "chart quadrature at x = {x} moved by {worst:.3e} under refinement"
        )));
    }
    Ok(fine)
}

fn chart_once(chi: &UnitaryCharacterR, pairs: &[(i64, i64)], x: f64, panel: f64) -> Vec<Complex64> {
    let s = chi.s;
    let shrink = (-2.0 * x).exp();
    let sigma_max = 2.0 * x + 40.0;

    // ln(1 + w^2) without overflowing w^2 at the far tail nodes
    let ln1psq = |w: f64| {
        if w.abs() > 1e8 {
            2.0 * w.abs().ln()
        } else {
            (w * w).ln_1p()
        }
    };
    let mut acc = vec![(Kahan::new(), Kahan::new()); pairs.len()];
    let eval = |w: f64, weight: f64, acc: &mut Vec<(Kahan, Kahan)>| {
        let v = w * shrink;
        let lw = ln1psq(w);
        let lv = ln1psq(v);
        // (1+w^2)^{-(1+is)/2} * (1+v^2)^{-(1-is)/2}
        let base = Complex64::new(
            -0.5 * (lw + lv),
            -0.5 * s * lw + 0.5 * s * lv,
        )
        .exp();
        // (1+iw)/sqrt(1+w^2) and (1-iv)/sqrt(1+v^2) as pure phases
        let ew = Complex64::from_polar(1.0, w.atan());
        let ev = Complex64::from_polar(1.0, -v.atan());
        for (k, &(n, m)) in pairs.iter().enumerate() {
            let val = base * unit_pow(ew, n) * unit_pow(ev, m) * weight;
            acc[k].0.add(val.re);
            acc[k].1.add(val.im);
        }
    };

    // center |w| <= 1
    let n_center = (2.0 / panel).ceil() as usize;
    let h = 2.0 / n_center as f64;
    for i in 0..n_center {
        let mid = -1.0 + (i as f64 + 0.5) * h;
        for (node, wgt) in GL16_NODES.iter().zip(GL16_WEIGHTS.iter()) {
            eval(mid + 0.5 * h * node, wgt * 0.5 * h, &mut acc);
        }
    }
    // tails w = +-e^sigma, dw = e^sigma d sigma
    let n_tail = (sigma_max / panel).ceil() as usize;
    let hs = sigma_max / n_tail as f64;
    for i in 0..n_tail {
        let mid = (i as f64 + 0.5) * hs;
        for (node, wgt) in GL16_NODES.iter().zip(GL16_WEIGHTS.iter()) {
            let sigma = mid + 0.5 * hs * node;
            let w = sigma.exp();
            eval(w, wgt * 0.5 * hs * w, &mut acc);
            eval(-w, wgt * 0.5 * hs * w, &mut acc);
        }
    }

    let front = Complex64::new(-x, s * x).exp() / PI;
    acc.into_iter()
        .map(|(re, im)| front * Complex64::new(re.value(), im.value()))
        .collect()
}

#[inline]
fn unit_pow(z: Complex64, n: i64) -> Complex64 {
    // z has unit modulus; negative powers via conjugation
    if n >= 0 {
        z.powi(n as i32)
    } else {
        z.conj().powi((-n) as i32)
    }
}

/// Closed-form coefficient for `chi` trivial on positive reals with
/// `chi(a(-1)) = -1`: the terminating hypergeometric series divided by
/// `cosh(x)`, valid for odd `m >= n >= 1`.
pub fn hypergeom_coeff(n: i64, m: i64, x: f64) -> Result<f64> {
    if n < 1 || m < n || n % 2 == 0 || m % 2 == 0 {
        return Err(Error::domain(format!(
            "hypergeometric form needs odd m >= n >= 1, got ({n}, {m})"
        )));
    }
    let k = ((m - n) / 2) as u32;
    let r = ((n - 1) / 2) as u32;
    let th = x.tanh();
    let z = th * th;
    // 2F1(r + k + 1, -r, k + 1, z): terminating after r + 1 terms
    let mut term = 1.0f64;
    let mut f = 1.0f64;
    for j in 0..r {
        let jj = j as f64;
        term *= (r as f64 + k as f64 + 1.0 + jj) * (-(r as f64) + jj) * z
            / ((k as f64 + 1.0 + jj) * (jj + 1.0));
        f += term;
    }
    // (r+1)_k / k! = binom(r + k, k)
    let mut binom = 1.0f64;
    for j in 0..k {
        binom *= (r as f64 + 1.0 + j as f64) / (j as f64 + 1.0);
    }
    Ok(th.powi(k as i32) * binom * f / x.cosh())
}

/// `Q^k_r(t) = ((1-t)/2)^{k/2} P^{(k,0)}_r(t)` via the Jacobi three-term
/// recurrence. The uniform bound `|Q| <= 1` is asserted as a
/// postcondition.
pub fn jacobi_q(k: u32, r: u32, t: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("t = {t} outside [-1, 1]")));
    }
    let alpha = k as f64;
    let mut p_prev = 1.0f64; // P_0
    let mut p = 0.5 * (alpha + 2.0) * (t - 1.0) + alpha + 1.0; // P_1^{(k,0)}
    if r == 0 {
        p = p_prev;
    } else {
        for rr in 2..=r {
            let nn = rr as f64;
            // beta = 0 specialization of the general recurrence
            let c1 = 2.0 * nn * (nn + alpha) * (2.0 * nn + alpha - 2.0);
            let c2 = 2.0 * nn + alpha - 1.0;
            let c3 = (2.0 * nn + alpha) * (2.0 * nn + alpha - 2.0);
            let c4 = alpha * alpha;
            let c5 = 2.0 * (nn + alpha - 1.0) * (nn - 1.0) * (2.0 * nn + alpha);
            let next = (c2 * (c3 * t + c4) * p - c5 * p_prev) / c1;
            p_prev = p;
            p = next;
        }
    }
    let q = (0.5 * (1.0 - t)).powf(0.5 * k as f64) * p;
    assert!(
        q.abs() <= 1.0 + crate::tolerances::JACOBI_SLACK,
        "|Q^{k}_{r}({t})| = {} exceeds 1",
        q.abs()
    );
    Ok(q)
}

/// The spherical function: the `(0, 0)` coefficient of the spherical
/// principal series at parameter 0. Positive and symmetric in `x`.
pub fn xi(x: f64) -> f64 {
    let chi = UnitaryCharacterR { s: 0.0, eps: 0 };
    let v = matrix_coeff(&chi, 0, 0, x.abs()).expect("spherical coefficient");
    debug_assert!(v.im.abs() < 1e-10);
    v.re
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi(s: f64, eps: u8) -> UnitaryCharacterR {
        UnitaryCharacterR { s, eps }
    }

    #[test]
    fn h_eval_on_rotations_and_torus() {
        let c = chi(0.0, 0);
        let g = Mat2R::rotation(0.9);
        let v = h_eval(&c, 2, &g).unwrap();
        assert!((v - Complex64::new(0.0, 2.0 * 0.9).exp()).norm() < 1e-13);

        let v = h_eval(&c, 0, &Mat2R::torus(2.0)).unwrap();
        assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn h_eval_lower_unipotent_closed_form() {
        // Iwasawa of [[1,0],[x,1]] in closed form: t = 1/sqrt(1+x^2),
        // e^{i psi} = (1 + i x)/sqrt(1+x^2)
        let c = chi(0.7, 0);
        for &xv in &[0.3, -1.2, 5.0] {
            let g = Mat2R::lower(xv);
            let v = h_eval(&c, 4, &g).unwrap();
            let t = 1.0 / (1.0 + xv * xv).sqrt();
            let e = Complex64::new(1.0, xv) * t;
            let expected =
                Complex64::new(t.ln(), 0.7 * t.ln()).exp() * e.powi(4);
            assert!((v - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn coeff_orthonormality_at_origin() {
        let c = chi(1.3, 0);
        assert!((matrix_coeff(&c, 0, 0, 0.0).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(matrix_coeff(&c, 2, 0, 0.0).unwrap().norm() < 1e-12);
        let c1 = chi(0.0, 1);
        assert!((matrix_coeff(&c1, 1, 1, 0.0).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(matrix_coeff(&c1, 1, 3, 0.0).unwrap().norm() < 1e-12);
    }

    #[test]
    fn charts_agree_in_overlap() {
        let c = chi(1.0, 0);
        for &x in &[2.0f64, 3.0, 4.0] {
            let trap = trapezoid_batch(&c, &[(0, 0), (2, -2), (4, 2)], x).unwrap();
            let chart = chart_batch(&c, &[(0, 0), (2, -2), (4, 2)], x).unwrap();
            for (a, b) in trap.iter().zip(&chart) {
                assert!((a - b).norm() < 1e-9, "x={x}: {a} vs {b}");
            }
        }
        let c1 = chi(0.0, 1);
        for &x in &[2.0f64, 3.5] {
            let trap = trapezoid_batch(&c1, &[(1, 1), (1, 3)], x).unwrap();
            let chart = chart_batch(&c1, &[(1, 1), (1, 3)], x).unwrap();
            for (a, b) in trap.iter().zip(&chart) {
                assert!((a - b).norm() < 1e-9, "x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn quadrature_matches_hypergeometric_oracle() {
        let c = chi(0.0, 1);
        for &(n, m) in &[(1i64, 1i64), (1, 3), (3, 3), (3, 5)] {
            for &x in &[0.1, 0.5, 1.0, 2.0] {
                let q = matrix_coeff(&c, n, m, x).unwrap();
                let h = hypergeom_coeff(n, m, x).unwrap();
                assert!(
                    (q - Complex64::new(h, 0.0)).norm() < 1e-8,
                    "({n},{m}) at {x}: {q} vs {h}"
                );
            }
        }
    }

    #[test]
    fn hypergeom_special_values() {
        // n = m = 1: 1/cosh(x)
        for &x in &[0.0, 0.7, 2.5] {
            assert!((hypergeom_coeff(1, 1, x).unwrap() - 1.0 / x.cosh()).abs() < 1e-14);
        }
        // n = 1, m = 3 at x = 0: tanh(0) = 0
        assert!(hypergeom_coeff(1, 3, 0.0).unwrap().abs() < 1e-15);
        assert!(hypergeom_coeff(2, 4, 1.0).is_err());
        assert!(hypergeom_coeff(3, 1, 1.0).is_err());
    }

    #[test]
    fn index_flip_symmetry() {
        let c = chi(0.8, 0);
        for &(n, m) in &[(0i64, 2i64), (2, 4), (-2, 2)] {
            for &x in &[0.5, 1.5] {
                let a = matrix_coeff(&c, n, m, x).unwrap().norm();
                let b = matrix_coeff(&c, -n, -m, x).unwrap().norm();
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn jacobi_values() {
        // k = 0, r = 1: Legendre P_1 = t
        for &t in &[-1.0, -0.3, 0.0, 0.8, 1.0] {
            assert!((jacobi_q(0, 1, t).unwrap() - t).abs() < 1e-14);
        }
        // k = 2, r = 0 at t = -1: ((1-t)/2)^1 * 1 = 1
        assert!((jacobi_q(2, 0, -1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(jacobi_q(3, 5, 0.3).unwrap().abs() <= 1.0);
        assert!(jacobi_q(1, 1, 1.5).is_err());
    }

    #[test]
    fn xi_basic_properties() {
        assert!((xi(0.0) - 1.0).abs() < 1e-12);
        assert!((xi(5.0) - xi(-5.0)).abs() < 1e-12);
        let v = xi(3.0);
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn parseval_truncated_sum() {
        // sum over |m| <= N of |<a h_n, h_m>|^2 climbs to 1
        let c = chi(1.0, 0);
        let x = 1.0;
        let pairs: Vec<(i64, i64)> = (-40..=40).map(|m| (0, 2 * m)).collect();
        let vals = matrix_coeff_batch(&c, &pairs, x).unwrap();
        let total: f64 = vals.iter().map(|v| v.norm_sqr()).sum();
        assert!(total <= 1.0 + 1e-9);
        assert!(total > 1.0 - 1e-6, "total = {total}");
    }
}
