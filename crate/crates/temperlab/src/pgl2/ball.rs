//! Ball sums over valuation shells and the orthogonality / character
//! experiments for the p-adic group.
//!
//! With vol(K) = 1 and the torus measure giving each valuation shell
//! mass 1, the ball integral is `M(r) = T_0 + sum_{1 <= j < r/log q}
//! q^j M°(j)`. Shell masses are exact for small `j`; beyond a verified
//! window they follow the exact two-exponential form dictated by the
//! canonical-pairing asymptotics, fitted on two shells and checked on
//! the rest of the window before being used.

use super::coeff::{coeff_row, stabilized_row};
use super::ktypes::KTypeP;
use super::padic::Qp;
use super::MultiplicativeCharacter;
use crate::error::{Error, Result};
use crate::fitting::{fit_growth, GrowthFit};
use crate::report::SchurRow;
use num::complex::Complex64;

/// Vector in the span of the ladder's K-types, by amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct KVecP {
    pub amps: Vec<Complex64>,
}

impl KVecP {
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[i] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn new(amps: Vec<Complex64>) -> Self {
        Self { amps }
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

struct PairData {
    exact: Vec<Complex64>,
    coef_a: Complex64,
    coef_b: Complex64,
    unit_term: f64,
}

/// Shell coefficients for all ordered pairs from a type window.
pub struct ShellLadder {
    pub chi: MultiplicativeCharacter,
    pub types: Vec<KTypeP>,
    j_exact: i64,
    pairs: Vec<PairData>,
}

impl ShellLadder {
    /// Computes exact shell coefficients for `j <= j_exact`, the
    /// unit-shell term, and the verified asymptotic form per pair.
    pub fn build(
        chi: &MultiplicativeCharacter,
        types: &[KTypeP],
        j_exact: i64,
    ) -> Result<Self> {
        if chi.square_is_trivial() {
            return Err(Error::domain(
                "shell ladder requires a character with nontrivial square",
            ));
        }
        if j_exact < 5 {
            return Err(Error::invalid("need at least 5 exact shells"));
        }
        let n = types.len();
        let mu_refs: Vec<&KTypeP> = types.iter().collect();
        // exact[j-1][i*n+k]
        let mut exact = vec![vec![Complex64::new(0.0, 0.0); n * n]; j_exact as usize];
        for (i, theta) in types.iter().enumerate() {
            for j in 1..=j_exact {
                let (row, _) = coeff_row(chi, theta, &mu_refs, j)?;
                for (k, v) in row.into_iter().enumerate() {
                    exact[(j - 1) as usize][i * n + k] = v;
                }
            }
        }
        let q = chi.ctx.p as f64;
        let z = chi.alpha();
        let z_sq_trivial = (2 * chi.alpha_num).rem_euclid(chi.alpha_den as i64) == 0;
        let mut pairs = Vec::with_capacity(n * n);
        for i in 0..n {
            for k in 0..n {
                let series: Vec<Complex64> = (1..=j_exact)
                    .map(|j| exact[(j - 1) as usize][i * n + k] * q.powf(0.5 * j as f64))
                    .collect();
                let (coef_a, coef_b) = fit_two_exponentials(&series, z, z_sq_trivial)
                    .ok_or_else(|| {
                        Error::Stabilization(format!(
                            "pair ({i}, {k}): no asymptotic window verified below j = {j_exact}"
                        ))
                    })?;
                let unit_term = unit_shell_term(chi, &types[i], &types[k])?;
                pairs.push(PairData {
                    exact: (1..=j_exact)
                        .map(|j| exact[(j - 1) as usize][i * n + k])
                        .collect(),
                    coef_a,
                    coef_b,
                    unit_term,
                });
            }
        }
        Ok(Self {
            chi: chi.clone(),
            types: types.to_vec(),
            j_exact,
            pairs,
        })
    }

    pub fn dim(&self) -> usize {
        self.types.len()
    }

    /// Shell coefficient `<a(p^{-j}) h_i, h_k>`.
    pub fn coeff(&self, i: usize, k: usize, j: i64) -> Complex64 {
        let pair = &self.pairs[i * self.dim() + k];
        if j >= 1 && j <= self.j_exact {
            pair.exact[(j - 1) as usize]
        } else {
            let q = self.chi.ctx.p as f64;
            let z = self.chi.alpha();
            q.powf(-0.5 * j as f64)
                * (pair.coef_a * z.powi(j as i32) + pair.coef_b * z.powi(-(j as i32)))
        }
    }

    fn pair_ball(&self, i: usize, k: usize, shells: u32) -> f64 {
        let pair = &self.pairs[i * self.dim() + k];
        let q = self.chi.ctx.p as f64;
        let mut total = pair.unit_term;
        for j in 1..shells as i64 {
            total += q.powi(j as i32) * self.coeff(i, k, j).norm_sqr();
        }
        total
    }

    /// Radius corresponding to a shell count.
    pub fn radius_of(&self, shells: u32) -> f64 {
        shells as f64 * (self.chi.ctx.p as f64).ln()
    }

    /// `int_{G_{<r}} <g v1, v2> conj(<g v3, v4>) dg` over `shells`
    /// valuation shells (the unit shell plus `1 <= j < shells`).
    pub fn cross_ball(
        &self,
        v1: &KVecP,
        v2: &KVecP,
        v3: &KVecP,
        v4: &KVecP,
        shells: u32,
    ) -> Complex64 {
        let n = self.dim();
        let mut total = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let w1 = v1.amps[i] * v3.amps[i].conj();
            if w1.norm() == 0.0 {
                continue;
            }
            for k in 0..n {
                let w2 = v2.amps[k].conj() * v4.amps[k];
                if w2.norm() == 0.0 {
                    continue;
                }
                total += w1 * w2 * self.pair_ball(i, k, shells);
            }
        }
        total
    }

    pub fn ball(&self, v1: &KVecP, v2: &KVecP, shells: u32) -> f64 {
        self.cross_ball(v1, v2, v1, v2, shells).re
    }
}

/// Fits `y_j = A z^j + B z^{-j}` on two consecutive shells and verifies
/// the rest of the window; scans the fit start until verification
/// passes. `None` when no window validates.
fn fit_two_exponentials(
    series: &[Complex64],
    z: Complex64,
    z_sq_trivial: bool,
) -> Option<(Complex64, Complex64)> {
    let scale = 1.0 + series.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let n = series.len() as i64;
    'start: for j0 in 1..=(n - 3) {
        let y0 = series[(j0 - 1) as usize];
        let y1 = series[j0 as usize];
        let (a, b) = if z_sq_trivial {
            // z = +-1: a single exponential carries both terms
            (y0 * z.powi(-(j0 as i32)), Complex64::new(0.0, 0.0))
        } else {
            let det = z.powi(-1) - z;
            let a = (y0 * z.powi(-(j0 as i32) - 1) - y1 * z.powi(-(j0 as i32))) / det;
            let b = (y1 * z.powi(j0 as i32) - y0 * z.powi(j0 as i32 + 1)) / det;
            (a, b)
        };
        for j in (j0 + 1)..=n {
            let predicted = a * z.powi(j as i32) + b * z.powi(-(j as i32));
            if (predicted - series[(j - 1) as usize]).norm() > 1e-9 * scale {
                continue 'start;
            }
        }
        return Some((a, b));
    }
    None
}

/// `int_{O^*} |u - u^{-1}| |<a(u) h_theta, h_mu>|^2 du` with the unit
/// shell carrying torus mass 1: the coefficient is locally constant, the
/// density weight is integrated in closed form per cell, and the level
/// is refined until the cell sum stabilizes.
fn unit_shell_term(
    chi: &MultiplicativeCharacter,
    theta: &KTypeP,
    mu: &KTypeP,
) -> Result<f64> {
    let ctx = chi.ctx;
    let p = ctx.p;
    let mut lam = chi.conductor.max(theta.level()).max(mu.level()).max(1) + 1;
    let mut prev: Option<f64> = None;
    loop {
        let mut total = 0.0f64;
        let modulus = ctx.pow(lam);
        for u in 1..modulus {
            if u % p == 0 {
                continue;
            }
            let weight = cell_density_weight(p, u, lam);
            if weight == 0.0 {
                continue;
            }
            let make_t = |prec: u32| Qp::from_unit(ctx, u, 0, prec);
            let (row, _) = stabilized_row(chi, theta, &[mu], &make_t, lam)?;
            total += weight * row[0].norm_sqr();
        }
        if let Some(p0) = prev {
            if (total - p0).abs() < 1e-10 * (1.0 + total.abs()) {
                return Ok(total);
            }
        }
        prev = Some(total);
        lam += 1;
        if lam > 9 {
            return Err(Error::Stabilization(
                "unit-shell term did not stabilize".into(),
            ));
        }
    }
}

/// Exact integral of `|u^2 - 1|` over the cell `u0 + p^lam O`, divided
/// cell mass included.
fn cell_density_weight(p: u64, u0: u64, lam: u32) -> f64 {
    let m = {
        let mut acc = 1u64;
        for _ in 0..lam {
            acc *= p;
        }
        acc
    };
    let pf = p as f64;
    if u0 == 1 || u0 == m - 1 {
        // |u^2 - 1| integrates to p/(p+1) over the unit-cell parameter
        return pf.powi(-2 * lam as i32) * pf / (pf + 1.0);
    }
    let sq = (u0 as u128 * u0 as u128 - 1) as u128;
    let mut v = 0i32;
    let mut s = sq;
    while s % p as u128 == 0 {
        s /= p as u128;
        v += 1;
    }
    debug_assert!((v as u32) < lam);
    pf.powi(-(lam as i32) - v)
}

/// `M_{v1,v2}` against a shell grid.
pub fn ball_sum(ladder: &ShellLadder, v1: &KVecP, v2: &KVecP, shells: u32) -> f64 {
    ladder.ball(v1, v2, shells)
}

pub type QuadrupleP = (KVecP, KVecP, KVecP, KVecP);

/// Cross-ball ratios against `r^d` with the degree fitted on the first
/// diagonal quadruple; the p-adic analogue of the real report.
pub fn schur_report_padic(
    ladder: &ShellLadder,
    quadruples: &[QuadrupleP],
    shell_grid: &[u32],
) -> Result<(Vec<SchurRow>, GrowthFit)> {
    if shell_grid.len() < 4 {
        return Err(Error::invalid("need at least 4 grid points"));
    }
    let reference = quadruples
        .iter()
        .find(|(v1, v2, v3, v4)| v1 == v3 && v2 == v4 && v1.norm_sq() > 0.0 && v2.norm_sq() > 0.0)
        .ok_or_else(|| Error::invalid("no diagonal quadruple to calibrate the degree"))?;
    let samples: Vec<(f64, f64)> = shell_grid
        .iter()
        .map(|&s| {
            (
                ladder.radius_of(s),
                ladder.ball(&reference.0, &reference.1, s),
            )
        })
        .collect();
    let fit = fit_growth(&samples)?;
    let d = fit.degree as i32;
    let mut rows = Vec::new();
    for (qid, (v1, v2, v3, v4)) in quadruples.iter().enumerate() {
        let pairing = v1.inner(v3) * v2.inner(v4).conj();
        for &s in shell_grid {
            let r = ladder.radius_of(s);
            let cross = ladder.cross_ball(v1, v2, v3, v4, s);
            let ratio = cross / r.powi(d);
            let f_inv = if pairing.norm() > 0.0 {
                (ratio / pairing).re
            } else {
                f64::NAN
            };
            rows.push(SchurRow {
                radius: r,
                quad_id: qid,
                re_ratio: ratio.re,
                im_ratio: ratio.im,
                predicted_pairing_re: pairing.re,
                predicted_pairing_im: pairing.im,
                f_inv_estimate: f_inv,
            });
        }
    }
    Ok((rows, fit))
}

/// Both sides of the character-formula identity: the conjugation-average
/// of the matrix coefficient paired against a finite-window operator
/// versus `<v1, v2> / f` times the operator trace on the window.
pub fn character_formula_check(
    ladder: &ShellLadder,
    v1: &KVecP,
    v2: &KVecP,
    dmatrix: &[Vec<Complex64>],
    f_inv: f64,
    shells: u32,
) -> Result<(Complex64, Complex64)> {
    let n = ladder.dim();
    if dmatrix.len() != n || dmatrix.iter().any(|r| r.len() != n) {
        return Err(Error::invalid("operator window must match the type window"));
    }
    let r = ladder.radius_of(shells);
    let mut lhs = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            if dmatrix[i][k].norm() == 0.0 {
                continue;
            }
            let e_i = KVecP::basis(n, i);
            let e_k = KVecP::basis(n, k);
            lhs += dmatrix[i][k] * ladder.cross_ball(v1, &e_i, v2, &e_k, shells);
        }
    }
    lhs /= r;
    let trace: Complex64 = (0..n).map(|i| dmatrix[i][i]).sum();
    let rhs = v1.inner(v2) * f_inv * trace;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgl2::ktypes::{enumerate_k_types, TorusLevel};
    use crate::pgl2::padic::PadicCtx;

    fn ladder3() -> ShellLadder {
        let ctx = PadicCtx::new(3).unwrap();
        let torus = TorusLevel::new(ctx, 1).unwrap();
        let chars = enumerate_k_types(&torus).unwrap();
        let chi = MultiplicativeCharacter::new(ctx, 1, 1, 1, 8).unwrap();
        ShellLadder::build(&chi, &chars[1..4], 7).unwrap()
    }

    #[test]
    fn ladder_extrapolation_matches_exact_window() {
        let ladder = ladder3();
        // the fitted form must reproduce the top exact shells
        let q = 3.0f64;
        for i in 0..3 {
            for k in 0..3 {
                for j in [6i64, 7] {
                    let exact = ladder.pairs[i * 3 + k].exact[(j - 1) as usize];
                    let pair = &ladder.pairs[i * 3 + k];
                    let z = ladder.chi.alpha();
                    let form = q.powf(-0.5 * j as f64)
                        * (pair.coef_a * z.powi(j as i32) + pair.coef_b * z.powi(-(j as i32)));
                    assert!(
                        (exact - form).norm() < 1e-9 * (1.0 + exact.norm()),
                        "pair ({i},{k}) at j={j}"
                    );
                }
            }
        }
    }

    #[test]
    fn ball_is_monotone_and_linear() {
        let ladder = ladder3();
        let v = KVecP::basis(3, 0);
        let m10 = ladder.ball(&v, &v, 10);
        let m20 = ladder.ball(&v, &v, 20);
        let m40 = ladder.ball(&v, &v, 40);
        assert!(m10 >= 0.0 && m20 >= m10 && m40 >= m20);
        // degree-1 growth: M(2r)/M(r) near 2 at large r
        let ratio = m40 / m20;
        assert!((ratio - 2.0).abs() < 0.35, "ratio {ratio}");
    }

    #[test]
    fn unit_shell_only_for_one_shell() {
        let ladder = ladder3();
        let v = KVecP::basis(3, 1);
        let m1 = ladder.ball(&v, &v, 1);
        assert!((m1 - ladder.pairs[1 * 3 + 1].unit_term).abs() < 1e-15);
    }

    #[test]
    fn disjoint_cross_vanishes() {
        let ladder = ladder3();
        let v1 = KVecP::basis(3, 0);
        let v3 = KVecP::basis(3, 2);
        let c = ladder.cross_ball(&v1, &v1, &v3, &v1, 25);
        assert_eq!(c, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn diagonal_ratios_factorize() {
        let ladder = ladder3();
        let quads: Vec<QuadrupleP> = (0..3)
            .map(|i| {
                let v = KVecP::basis(3, i);
                (v.clone(), v.clone(), v.clone(), v)
            })
            .collect();
        let (rows, fit) = schur_report_padic(&ladder, &quads, &[10, 20, 30, 40]).unwrap();
        assert_eq!(fit.degree, 1);
        let last: Vec<f64> = (0..3)
            .map(|qid| {
                rows.iter()
                    .filter(|r| r.quad_id == qid)
                    .last()
                    .unwrap()
                    .f_inv_estimate
            })
            .collect();
        let mean = last.iter().sum::<f64>() / 3.0;
        for v in &last {
            assert!(
                (v - mean).abs() <= 0.10 * mean.abs(),
                "diagonal estimates spread too far: {last:?}"
            );
        }
    }
}
