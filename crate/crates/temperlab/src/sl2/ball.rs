//! Ball integrals over the positive torus direction and the growth /
//! orthogonality experiments built on them.
//!
//! With Haar conventions vol(K) = 1 and da = dx on a(e^x), every ball
//! integral reduces to a one-dimensional integral of
//! `omega(x) = e^{2x} - e^{-2x}` against finite sums of
//! `|<a(e^x) h_theta, h_eta>|^2`. Coefficients are evaluated once on a
//! fixed Gauss-Legendre panel grid and reused through prefix sums, so a
//! whole family of radii, windows and quadruples shares one sweep.

use super::coeff::matrix_coeff_batch;
use super::{KFiniteVectorR, UnitaryCharacterR};
use crate::error::{Error, Result};
use crate::fitting::{fit_growth, GrowthFit};
use crate::quad::{Kahan, GL16_NODES, GL16_WEIGHTS};
use crate::tolerances::{BALL_RTOL, MAX_BALL_RADIUS, SHELL_BOUND_SLACK};
use num::complex::Complex64;

fn omega(x: f64) -> f64 {
    (2.0 * x).exp() - (-2.0 * x).exp()
}

/// Per-pair panel prefix sums of `int omega(x) |coeff(theta, eta, x)|^2 dx`.
pub struct CoeffTables {
    pub chi: UnitaryCharacterR,
    pub types: Vec<i64>,
    panel_w: f64,
    /// prefix[p][k]: integral over [0, k * panel_w] for pair index p
    prefix: Vec<Vec<f64>>,
}

impl CoeffTables {
    /// Builds tables for all ordered pairs from `types`, covering
    /// `x in [0, x_max]`.
    pub fn build(chi: &UnitaryCharacterR, types: &[i64], x_max: f64) -> Result<Self> {
        let mut types = types.to_vec();
        types.sort_unstable();
        types.dedup();
        if types.is_empty() {
            return Err(Error::invalid("empty type set"));
        }
        for &n in &types {
            if !chi.admits(n) {
                return Err(Error::domain(format!("type {n} violates parity")));
            }
        }
        if !(x_max > 0.0) || 2.0 * x_max > MAX_BALL_RADIUS + 8.0 {
            return Err(Error::invalid(format!(
                "x_max = {x_max} outside supported range"
            )));
        }
        let panel_w = 0.5;
        let n_panels = (x_max / panel_w).ceil() as usize;
        let pairs: Vec<(i64, i64)> = types
            .iter()
            .flat_map(|&a| types.iter().map(move |&b| (a, b)))
            .collect();
        let mut acc: Vec<Kahan> = vec![Kahan::new(); pairs.len()];
        let mut prefix: Vec<Vec<f64>> = vec![Vec::with_capacity(n_panels + 1); pairs.len()];
        for p in prefix.iter_mut() {
            p.push(0.0);
        }
        for panel in 0..n_panels {
            let lo = panel as f64 * panel_w;
            let mid = lo + 0.5 * panel_w;
            let vals = panel_values(chi, &pairs, mid, 0.5 * panel_w)?;
            // spot-check a few panels against a halved refinement
            if panel % 97 == 3 {
                let fine = panel_values_halved(chi, &pairs, lo, panel_w)?;
                for (a, b) in vals.iter().zip(&fine) {
                    if (a - b).abs() > BALL_RTOL * (1.0 + b.abs()) {
                        return Err(Error::NonConvergence(format!(
                            "panel at x = {lo} moved by {:.3e} under refinement",
                            (a - b).abs()
                        )));
                    }
                }
            }
            for (i, v) in vals.iter().enumerate() {
                acc[i].add(*v);
                prefix[i].push(acc[i].value());
            }
        }
        Ok(Self {
            chi: *chi,
            types,
            panel_w,
            prefix,
        })
    }

    fn pair_index(&self, theta: i64, eta: i64) -> Result<usize> {
        let i = self
            .types
            .iter()
            .position(|&t| t == theta)
            .ok_or_else(|| Error::invalid(format!("type {theta} not in table")))?;
        let j = self
            .types
            .iter()
            .position(|&t| t == eta)
            .ok_or_else(|| Error::invalid(format!("type {eta} not in table")))?;
        Ok(i * self.types.len() + j)
    }

    /// Integral over x in [0, R/2] for one pair.
    fn pair_ball(&self, theta: i64, eta: i64, radius: f64) -> Result<f64> {
        let idx = self.pair_index(theta, eta)?;
        let k = (0.5 * radius / self.panel_w).round() as usize;
        let kmax = self.prefix[idx].len() - 1;
        if (0.5 * radius - k as f64 * self.panel_w).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "radius {radius} is not aligned to the panel grid"
            )));
        }
        if k > kmax {
            return Err(Error::invalid(format!("radius {radius} beyond table range")));
        }
        Ok(self.prefix[idx][k])
    }

    fn check_chi(&self, v: &KFiniteVectorR) -> Result<()> {
        if v.chi != self.chi {
            return Err(Error::invalid("vector character differs from table"));
        }
        Ok(())
    }

    /// `int_{G_{<R}} <g v1, v2> conj(<g v3, v4>) dg` via the K-type
    /// expansion over the table's pair set.
    pub fn cross_ball(
        &self,
        v1: &KFiniteVectorR,
        v2: &KFiniteVectorR,
        v3: &KFiniteVectorR,
        v4: &KFiniteVectorR,
        radius: f64,
    ) -> Result<Complex64> {
        for v in [v1, v2, v3, v4] {
            self.check_chi(v)?;
        }
        let mut total = Complex64::new(0.0, 0.0);
        for (&theta, c1) in &v1.coeffs {
            let Some(c3) = v3.coeffs.get(&theta) else {
                continue;
            };
            for (&eta, d2) in &v2.coeffs {
                let Some(d4) = v4.coeffs.get(&eta) else {
                    continue;
                };
                let w = c1 * c3.conj() * d2.conj() * d4;
                if w.norm() == 0.0 {
                    continue;
                }
                total += w * self.pair_ball(theta, eta, radius)?;
            }
        }
        Ok(total)
    }

    /// `M_{v1,v2}(R)`, nonnegative.
    pub fn ball(&self, v1: &KFiniteVectorR, v2: &KFiniteVectorR, radius: f64) -> Result<f64> {
        Ok(self.cross_ball(v1, v2, v1, v2, radius)?.re)
    }

    /// Shell integral over radii `[r1, r2)`.
    pub fn shell(&self, v1: &KFiniteVectorR, v2: &KFiniteVectorR, r1: f64, r2: f64) -> Result<f64> {
        if r2 < r1 {
            return Err(Error::invalid("shell with r2 < r1"));
        }
        Ok(self.ball(v1, v2, r2)? - self.ball(v1, v2, r1)?)
    }

    pub fn max_radius(&self) -> f64 {
        2.0 * self.panel_w * (self.prefix[0].len() - 1) as f64
    }
}

/// GL16 panel of `omega * |coeff|^2` centered at `mid` with half-width `hw`.
fn panel_values(
    chi: &UnitaryCharacterR,
    pairs: &[(i64, i64)],
    mid: f64,
    hw: f64,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; pairs.len()];
    for (node, wgt) in GL16_NODES.iter().zip(GL16_WEIGHTS.iter()) {
        let x = mid + hw * node;
        let coeffs = matrix_coeff_batch(chi, pairs, x)?;
        let om = omega(x);
        for (o, c) in out.iter_mut().zip(&coeffs) {
            *o += wgt * hw * om * c.norm_sqr();
        }
    }
    Ok(out)
}

fn panel_values_halved(
    chi: &UnitaryCharacterR,
    pairs: &[(i64, i64)],
    lo: f64,
    w: f64,
) -> Result<Vec<f64>> {
    let a = panel_values(chi, pairs, lo + 0.25 * w, 0.25 * w)?;
    let b = panel_values(chi, pairs, lo + 0.75 * w, 0.25 * w)?;
    Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect())
}

/// `M°_{v1,v2}(a(e^x))`: the finite double sum over supports.
pub fn shell_mass(v1: &KFiniteVectorR, v2: &KFiniteVectorR, x: f64) -> Result<f64> {
    if v1.chi != v2.chi {
        return Err(Error::invalid("vectors carry different characters"));
    }
    let mut pairs = Vec::new();
    for &theta in v1.coeffs.keys() {
        for &eta in v2.coeffs.keys() {
            pairs.push((theta, eta));
        }
    }
    if pairs.is_empty() {
        return Ok(0.0);
    }
    let vals = matrix_coeff_batch(&v1.chi, &pairs, x)?;
    let mut total = 0.0;
    let mut k = 0;
    for c in v1.coeffs.values() {
        for d in v2.coeffs.values() {
            total += c.norm_sqr() * d.norm_sqr() * vals[k].norm_sqr();
            k += 1;
        }
    }
    Ok(total)
}

fn union_types(vs: &[&KFiniteVectorR]) -> Vec<i64> {
    let mut t: Vec<i64> = vs.iter().flat_map(|v| v.types()).collect();
    t.sort_unstable();
    t.dedup();
    t
}

/// One-off `M_{v1,v2}(R)`; builds a private table. Prefer [`CoeffTables`]
/// for sweeps.
pub fn ball_integral(v1: &KFiniteVectorR, v2: &KFiniteVectorR, radius: f64) -> Result<f64> {
    if !(radius >= 0.0) || radius > MAX_BALL_RADIUS {
        return Err(Error::invalid(format!("radius {radius} out of range")));
    }
    if radius == 0.0 {
        return Ok(0.0);
    }
    let tables = CoeffTables::build(&v1.chi, &union_types(&[v1, v2]), 0.5 * radius)?;
    tables.ball(v1, v2, radius)
}

/// One-off cross ball integral.
pub fn cross_ball_integral(
    v1: &KFiniteVectorR,
    v2: &KFiniteVectorR,
    v3: &KFiniteVectorR,
    v4: &KFiniteVectorR,
    radius: f64,
) -> Result<Complex64> {
    let tables = CoeffTables::build(&v1.chi, &union_types(&[v1, v2, v3, v4]), 0.5 * radius)?;
    tables.cross_ball(v1, v2, v3, v4, radius)
}

/// `(M_{v1,v2}(R + R') - M_{v1,v2}(R - R')) / M_{v0,v0}(R)`.
pub fn window_ratio(
    tables: &CoeffTables,
    v1: &KFiniteVectorR,
    v2: &KFiniteVectorR,
    v0: &KFiniteVectorR,
    radius: f64,
    rprime: f64,
) -> Result<f64> {
    if rprime < 0.0 || rprime >= radius {
        return Err(Error::invalid("need 0 <= R' < R"));
    }
    let denom = tables.ball(v0, v0, radius)?;
    if denom <= 0.0 {
        return Err(Error::Degenerate("window denominator not positive".into()));
    }
    Ok(tables.shell(v1, v2, radius - rprime, radius + rprime)? / denom)
}

/// Shell comparison against the spherical-function majorant: returns
/// `(lhs, rhs)` with `lhs = int_shell |<g v1, v2>|^2` and
/// `rhs = int_shell Xi^2`, and reports an error if the majorization
/// fails beyond slack.
pub fn shell_xi_bound(
    v1: &KFiniteVectorR,
    v2: &KFiniteVectorR,
    tables: &CoeffTables,
    xi_tables: &CoeffTables,
    r1: f64,
    r2: f64,
) -> Result<(f64, f64)> {
    if (v1.norm_sq() - 1.0).abs() > 1e-10 || (v2.norm_sq() - 1.0).abs() > 1e-10 {
        return Err(Error::invalid("shell bound requires unit vectors"));
    }
    let lhs = tables.shell(v1, v2, r1, r2)?;
    let spherical = KFiniteVectorR::basis(xi_tables.chi, 0)?;
    let rhs = xi_tables.shell(&spherical, &spherical, r1, r2)?;
    if lhs > rhs * (1.0 + SHELL_BOUND_SLACK) {
        return Err(Error::Degenerate(format!(
            "shell bound violated: {lhs} > {rhs}"
        )));
    }
    Ok((lhs, rhs))
}

pub use crate::report::SchurRow;

pub type Quadruple = (
    KFiniteVectorR,
    KFiniteVectorR,
    KFiniteVectorR,
    KFiniteVectorR,
);

/// Cross-ball ratios `cross(R) / R^d` for each quadruple over the radii
/// grid, with the degree `d` fitted on the first diagonal quadruple.
///
/// Returns the rows and the reference fit.
pub fn schur_report(
    tables: &CoeffTables,
    quadruples: &[Quadruple],
    radii: &[f64],
) -> Result<(Vec<SchurRow>, GrowthFit)> {
    if radii.len() < 4 {
        return Err(Error::invalid("need at least 4 radii"));
    }
    let reference = quadruples
        .iter()
        .find(|(v1, v2, v3, v4)| {
            v1.coeffs == v3.coeffs
                && v2.coeffs == v4.coeffs
                && v1.norm_sq() > 0.0
                && v2.norm_sq() > 0.0
        })
        .ok_or_else(|| Error::invalid("no diagonal quadruple to calibrate the degree"))?;
    let samples: Vec<(f64, f64)> = radii
        .iter()
        .map(|&r| {
            tables
                .ball(&reference.0, &reference.1, r)
                .map(|m| (r, m))
        })
        .collect::<Result<_>>()?;
    let fit = fit_growth(&samples)?;
    let d = fit.degree as i32;

    let mut rows = Vec::new();
    for (qid, (v1, v2, v3, v4)) in quadruples.iter().enumerate() {
        let pairing = v1.inner(v3) * v2.inner(v4).conj();
        for &r in radii {
            let cross = tables.cross_ball(v1, v2, v3, v4, r)?;
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

#[cfg(test)]
mod tests {
    use super::*;

    fn chi(s: f64, eps: u8) -> UnitaryCharacterR {
        UnitaryCharacterR { s, eps }
    }

    #[test]
    fn shell_mass_basics() {
        let c = chi(1.0, 0);
        let h0 = KFiniteVectorR::basis(c, 0).unwrap();
        assert!((shell_mass(&h0, &h0, 0.0).unwrap() - 1.0).abs() < 1e-10);

        let zero = KFiniteVectorR::new(c, &[]).unwrap();
        assert!(shell_mass(&zero, &h0, 1.0).unwrap() == 0.0);
    }

    #[test]
    fn shell_mass_closed_form_combination() {
        // v1 = h1 + h3, v2 = h1 at x = 1 against the terminating series
        let c = chi(0.0, 1);
        let v1 = KFiniteVectorR::new(
            c,
            &[(1, Complex64::new(1.0, 0.0)), (3, Complex64::new(1.0, 0.0))],
        )
        .unwrap();
        let v2 = KFiniteVectorR::basis(c, 1).unwrap();
        let got = shell_mass(&v1, &v2, 1.0).unwrap();
        let c11 = super::super::coeff::hypergeom_coeff(1, 1, 1.0).unwrap();
        // <a h3, h1> = conj(<a^{-1} h1, h3>), and the coefficient is real
        // and symmetric in x, so |.| matches the (1,3) closed form.
        let c31 = super::super::coeff::hypergeom_coeff(1, 3, 1.0).unwrap();
        let expected = c11 * c11 + c31 * c31;
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
    }

    #[test]
    fn ball_integral_zero_radius_and_monotonicity() {
        let c = chi(0.0, 1);
        let h1 = KFiniteVectorR::basis(c, 1).unwrap();
        assert_eq!(ball_integral(&h1, &h1, 0.0).unwrap(), 0.0);

        let tables = CoeffTables::build(&c, &[1], 10.0).unwrap();
        let m5 = tables.ball(&h1, &h1, 10.0).unwrap();
        let m10 = tables.ball(&h1, &h1, 20.0).unwrap();
        assert!(m5 >= 0.0 && m10 >= m5);
    }

    #[test]
    fn ball_linear_growth_for_odd_series() {
        // |<a(e^x) h1, h1>|^2 = cosh(x)^{-2}: M(R) = int_0^{R/2}
        // (e^{2x} - e^{-2x}) cosh^{-2} dx grows linearly with slope 4
        // at rate M(R)/R -> 2.
        let c = chi(0.0, 1);
        let h1 = KFiniteVectorR::basis(c, 1).unwrap();
        let tables = CoeffTables::build(&c, &[1], 30.0).unwrap();
        let m = tables.ball(&h1, &h1, 60.0).unwrap();
        // exact: int (e^{2x}-e^{-2x})/cosh^2 dx = 4x - ... -> slope 2 per R
        assert!((m / 60.0 - 2.0).abs() < 0.1, "M/R = {}", m / 60.0);
    }

    #[test]
    fn cross_reduces_to_ball() {
        let c = chi(1.0, 0);
        let v1 = KFiniteVectorR::new(
            c,
            &[(0, Complex64::new(0.8, 0.1)), (2, Complex64::new(0.0, -0.6))],
        )
        .unwrap();
        let v2 = KFiniteVectorR::basis(c, 0).unwrap();
        let tables = CoeffTables::build(&c, &[0, 2], 8.0).unwrap();
        let a = tables.cross_ball(&v1, &v2, &v1, &v2, 16.0).unwrap();
        let b = tables.ball(&v1, &v2, 16.0).unwrap();
        assert!((a.re - b).abs() < 1e-12 && a.im.abs() < 1e-12);
    }

    #[test]
    fn disjoint_supports_vanish() {
        let c = chi(0.0, 1);
        let v1 = KFiniteVectorR::basis(c, 1).unwrap();
        let v3 = KFiniteVectorR::basis(c, 3).unwrap();
        let tables = CoeffTables::build(&c, &[1, 3], 8.0).unwrap();
        let v = tables.cross_ball(&v1, &v1, &v3, &v1, 16.0).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn window_ratio_trivial_cases() {
        let c = chi(0.0, 1);
        let h1 = KFiniteVectorR::basis(c, 1).unwrap();
        let tables = CoeffTables::build(&c, &[1], 30.0).unwrap();
        let r = window_ratio(&tables, &h1, &h1, &h1, 40.0, 0.0).unwrap();
        assert_eq!(r, 0.0);
        let r = window_ratio(&tables, &h1, &h1, &h1, 40.0, 2.0).unwrap();
        assert!(r >= 0.0);
    }

    #[test]
    fn spherical_shell_bound_is_equality() {
        let c0 = chi(0.0, 0);
        let f0 = KFiniteVectorR::basis(c0, 0).unwrap();
        let tables = CoeffTables::build(&c0, &[0], 12.0).unwrap();
        let (lhs, rhs) = shell_xi_bound(&f0, &f0, &tables, &tables, 10.0, 20.0).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
        let (l0, r0) = shell_xi_bound(&f0, &f0, &tables, &tables, 10.0, 10.0).unwrap();
        assert_eq!((l0, r0), (0.0, 0.0));
    }
}
