//! Predicted growth degree and limit value.
//!
//! The squared modulus is expanded over ordered pairs of terms; each pair
//! contributes a product of a polytope moment over the unit-modulus
//! coordinates and absolutely convergent one-dimensional tails over the
//! decaying coordinates, provided the pair residue passes the exact
//! vanishing test.

use super::{
    degree, j_lambda, ExactC, ExponentTerm, ExponentTermCollection, GrowthDegree,
    GrowthPrediction, PolytopeFamily,
};
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson_abs;
use crate::tolerances::POLYTOPE_MOMENT_RTOL;
use num::complex::Complex64;
use std::collections::BTreeMap;

/// `sum_{z >= 0} z^m t^z` for `|t| < 1`, via the closed rational form
/// obtained by applying `t d/dt` to `1/(1-t)` m times. No truncation.
pub fn one_d_power_sum(m: u32, t: Complex64) -> Result<Complex64> {
    if t.norm() >= 1.0 {
        return Err(Error::domain(format!("|t| = {} >= 1", t.norm())));
    }
    // numerator polynomial: P_0 = 1, P_{k+1}(x) = x ((1-x) P_k' + (k+1) P_k)
    let mut p: Vec<i128> = vec![1];
    for k in 0..m {
        let mut next = vec![0i128; p.len() + 1];
        for (i, &c) in p.iter().enumerate() {
            // x * (k+1) * P_k
            next[i + 1] += (k as i128 + 1) * c;
            // x * (1 - x) * P_k'
            if i >= 1 {
                let d = c * i as i128;
                next[i] += d;
                next[i + 1] -= d;
            }
        }
        p = next;
    }
    let mut num = Complex64::new(0.0, 0.0);
    for &c in p.iter().rev() {
        num = num * t + Complex64::new(c as f64, 0.0);
    }
    let one_minus = Complex64::new(1.0, 0.0) - t;
    Ok(num / one_minus.powi(m as i32 + 1))
}

/// `int_0^inf z^m e^{lambda z} dz = m! / (-lambda)^{m+1}` for `Re(lambda) < 0`.
pub fn one_d_power_integral(m: u32, lambda: Complex64) -> Result<Complex64> {
    if lambda.re >= 0.0 {
        return Err(Error::domain(format!(
            "Re(lambda) = {} must be negative",
            lambda.re
        )));
    }
    let mut fact = 1.0;
    for k in 2..=m as u64 {
        fact *= k as f64;
    }
    Ok(Complex64::new(fact, 0.0) / (-lambda).powi(m as i32 + 1))
}

/// `int_{P_J} y^m dy` by recursive coordinate slicing: the innermost
/// integral is closed-form and each outer level uses adaptive Simpson
/// with an absolute budget derived from the bounding-box moment.
pub fn polytope_moment(fam: &PolytopeFamily, j_set: &[usize], monomial: &[u32]) -> Result<f64> {
    if j_set.is_empty() {
        return Ok(1.0); // empty product convention
    }
    if monomial.len() != j_set.len() {
        return Err(Error::invalid("monomial length must match |J|"));
    }
    // restrict directions to J, dropping all-zero restrictions
    let dirs: Vec<Vec<f64>> = fam
        .directions
        .iter()
        .map(|v| j_set.iter().map(|&j| v[j]).collect::<Vec<f64>>())
        .filter(|v| v.iter().any(|&c| c > 0.0))
        .collect();
    for (idx, &j) in j_set.iter().enumerate() {
        if !dirs.iter().any(|v| v[idx] > 0.0) {
            return Err(Error::invalid(format!(
                "coordinate {j} unbounded in the restricted polytope"
            )));
        }
    }
    let rhs = vec![1.0; dirs.len()];
    // bounding-box moment as error scale
    let mut box_bound = 1.0;
    for (idx, &m) in monomial.iter().enumerate() {
        let u = dirs
            .iter()
            .filter(|v| v[idx] > 0.0)
            .map(|v| 1.0 / v[idx])
            .fold(f64::INFINITY, f64::min);
        box_bound *= u.powi(m as i32 + 1) / (m as f64 + 1.0);
    }
    Ok(moment_rec(&dirs, &rhs, monomial, POLYTOPE_MOMENT_RTOL * box_bound))
}

fn moment_rec(dirs: &[Vec<f64>], rhs: &[f64], monomial: &[u32], tol_abs: f64) -> f64 {
    if rhs.iter().any(|&c| c < 0.0) {
        return 0.0;
    }
    let upper = dirs
        .iter()
        .zip(rhs)
        .filter(|(v, _)| v[0] > 0.0)
        .map(|(v, &c)| c / v[0])
        .fold(f64::INFINITY, f64::min);
    if upper <= 0.0 {
        return 0.0;
    }
    let m0 = monomial[0];
    if monomial.len() == 1 {
        return upper.powi(m0 as i32 + 1) / (m0 as f64 + 1.0);
    }
    let inner_dirs: Vec<Vec<f64>> = dirs.iter().map(|v| v[1..].to_vec()).collect();
    let inner_tol = tol_abs / (4.0 * (upper + 1.0));
    let f = |y: f64| {
        let new_rhs: Vec<f64> = dirs
            .iter()
            .zip(rhs)
            .map(|(v, &c)| c - v[0] * y)
            .collect();
        y.powi(m0 as i32) * moment_rec(&inner_dirs, &new_rhs, &monomial[1..], inner_tol)
    };
    adaptive_simpson_abs(&f, 0.0, upper, tol_abs)
}

struct PairData {
    coeff: Complex64,
    lambda: Vec<ExactC>,
    monomial: Vec<u32>,
}

fn pair_product(a: &ExponentTerm, b: &ExponentTerm) -> PairData {
    PairData {
        coeff: a.coeff * b.coeff.conj(),
        lambda: a
            .lambda
            .iter()
            .zip(&b.lambda)
            .map(|(x, y)| x.add(&y.conj()))
            .collect(),
        monomial: a
            .monomial
            .iter()
            .zip(&b.monomial)
            .map(|(x, y)| x + y)
            .collect(),
    }
}

/// Evaluates the contribution of a single pair term at the target degree
/// `d`, or `None` if the pair drops out. `lattice` picks the lattice
/// vanishing test (residue in `2 pi i Z`) versus the continuous one
/// (residue zero) and the matching one-dimensional tail factor.
fn pair_contribution(
    fam: &PolytopeFamily,
    pair: &PairData,
    d: u32,
    lattice: bool,
) -> Result<Option<Complex64>> {
    let j = j_lambda(&pair.lambda)?;
    let dp: u32 = j.iter().map(|&jj| 1 + pair.monomial[jj]).sum();
    if dp != d {
        return Ok(None);
    }
    for &jj in &j {
        let ok = if lattice {
            pair.lambda[jj].im_in_two_pi_z()
        } else {
            pair.lambda[jj].im_is_zero()
        };
        if !ok {
            return Ok(None);
        }
    }
    let m_res: Vec<u32> = j.iter().map(|&jj| pair.monomial[jj]).collect();
    let moment = polytope_moment(fam, &j, &m_res)?;
    let mut tail = Complex64::new(1.0, 0.0);
    for jj in 0..pair.lambda.len() {
        if j.contains(&jj) {
            continue;
        }
        let lam = pair.lambda[jj].to_c64();
        let factor = if lattice {
            one_d_power_sum(pair.monomial[jj], lam.exp())?
        } else {
            one_d_power_integral(pair.monomial[jj], lam)?
        };
        tail *= factor;
    }
    Ok(Some(pair.coeff * moment * tail))
}

fn finish_prediction(total: Complex64, scale: f64, d: u32) -> Result<GrowthPrediction> {
    let scale = scale.max(1e-300);
    if total.im.abs() > 1e-9 * (1.0 + scale) {
        return Err(Error::Degenerate(format!(
            "predicted limit has imaginary residue {:.3e}",
            total.im
        )));
    }
    if total.re.abs() <= 1e-12 * scale {
        return Ok(GrowthPrediction {
            degree: GrowthDegree::ZeroFunction,
            limit: 0.0,
        });
    }
    if total.re < 0.0 {
        return Err(Error::Degenerate(format!(
            "predicted limit {:.3e} is negative",
            total.re
        )));
    }
    Ok(GrowthPrediction {
        degree: GrowthDegree::Degree(d),
        limit: total.re,
    })
}

/// Predicted growth of the squared lattice sum over `Z^n_{>=0} ∩ P_{<r}`.
pub fn predicted_growth_lattice(
    coll: &ExponentTermCollection,
    fam: &PolytopeFamily,
) -> Result<GrowthPrediction> {
    if fam.dim != coll.dim {
        return Err(Error::invalid("collection and polytope dimensions differ"));
    }
    let mut d = 0u32;
    for t in &coll.terms {
        d = d.max(
            degree(&t.lambda, &t.monomial.iter().map(|&m| 2 * m).collect::<Vec<_>>())?,
        );
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for a in &coll.terms {
        for b in &coll.terms {
            let pair = pair_product(a, b);
            if let Some(c) = pair_contribution(fam, &pair, d, true)? {
                total += c;
                scale += c.norm();
            }
        }
    }
    finish_prediction(total, scale, d)
}

/// Coarse scale bound on the sub-top-degree part of the squared lattice
/// sum at radius `r`: every pair below the top degree is bounded using
/// absolute values throughout (vanishing conditions ignored). When this
/// dwarfs `limit * r^d` the limit is not observable at radius `r`, no
/// matter how correct the prediction.
pub fn subtop_mass_lattice(
    coll: &ExponentTermCollection,
    fam: &PolytopeFamily,
    r: f64,
) -> Result<f64> {
    let mut d = 0u32;
    for t in &coll.terms {
        d = d.max(degree(
            &t.lambda,
            &t.monomial.iter().map(|&m| 2 * m).collect::<Vec<_>>(),
        )?);
    }
    let mut total = 0.0;
    for a in &coll.terms {
        for b in &coll.terms {
            let pair = pair_product(a, b);
            let j = j_lambda(&pair.lambda)?;
            let dp: u32 = j.iter().map(|&jj| 1 + pair.monomial[jj]).sum();
            if dp >= d {
                continue;
            }
            let m_res: Vec<u32> = j.iter().map(|&jj| pair.monomial[jj]).collect();
            let mut mass = pair.coeff.norm() * polytope_moment(fam, &j, &m_res)?;
            for jj in 0..pair.lambda.len() {
                if j.contains(&jj) {
                    continue;
                }
                let decay = pair.lambda[jj].to_c64().re.exp();
                mass *= one_d_power_sum(pair.monomial[jj], Complex64::new(decay, 0.0))?.re;
            }
            total += mass * r.powi(dp as i32);
        }
    }
    Ok(total)
}

/// One exponential-polynomial "nice" factor over a finite base set:
/// `phi(b, x) = sum_k mu_k(b) e^{-<k, x>}` with `k` running over a finite
/// set of nonnegative integer vectors.
#[derive(Debug, Clone)]
pub struct NicePolynomial {
    /// (exponent vector k, value of mu_k at each base point)
    pub terms: Vec<(Vec<u32>, Vec<Complex64>)>,
}

impl NicePolynomial {
    pub fn constant_one(dim: usize, base_len: usize) -> Self {
        Self {
            terms: vec![(vec![0; dim], vec![Complex64::new(1.0, 0.0); base_len])],
        }
    }

    fn validate(&self, dim: usize, base_len: usize) -> Result<()> {
        let mut has_constant = false;
        for (k, mu) in &self.terms {
            if k.len() != dim || mu.len() != base_len {
                return Err(Error::invalid("nice factor shape mismatch"));
            }
            if k.iter().all(|&c| c == 0) && mu.iter().any(|c| c.norm() > 0.0) {
                has_constant = true;
            }
        }
        if !has_constant {
            return Err(Error::invalid(
                "nice factor constant term is identically zero",
            ));
        }
        Ok(())
    }
}

/// Predicted growth of the continuous squared integral
/// `int_B int_{P_{<r}} |sum_l c_l x^{m_l} e^{<lambda_l, x>} phi_l(b, x)|^2 dx db`,
/// with one nice factor per collection term and positive base weights.
pub fn predicted_growth_continuous(
    coll: &ExponentTermCollection,
    nice: &[NicePolynomial],
    base_weights: &[f64],
    fam: &PolytopeFamily,
) -> Result<GrowthPrediction> {
    if fam.dim != coll.dim {
        return Err(Error::invalid("collection and polytope dimensions differ"));
    }
    if nice.len() != coll.terms.len() {
        return Err(Error::invalid("need one nice factor per term"));
    }
    if base_weights.is_empty() || base_weights.iter().any(|&w| !(w > 0.0)) {
        return Err(Error::invalid("base weights must be positive"));
    }
    for phi in nice {
        phi.validate(coll.dim, base_weights.len())?;
    }
    // degree is pinned by the original couples (the constant term of each
    // nice factor keeps its exponent)
    let mut d = 0u32;
    for t in &coll.terms {
        d = d.max(
            degree(&t.lambda, &t.monomial.iter().map(|&m| 2 * m).collect::<Vec<_>>())?,
        );
    }
    let mut total = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (b_idx, &w) in base_weights.iter().enumerate() {
        // expand and merge the pure exponential collection at this base point
        let mut merged: BTreeMap<(Vec<ExactC>, Vec<u32>), Complex64> = BTreeMap::new();
        for (t, phi) in coll.terms.iter().zip(nice) {
            for (k, mu) in &phi.terms {
                let c = t.coeff * mu[b_idx];
                if c.norm() == 0.0 {
                    continue;
                }
                let lambda: Vec<ExactC> = t
                    .lambda
                    .iter()
                    .zip(k)
                    .map(|(l, &kk)| l.sub(&ExactC::rational(kk as i64, 1)))
                    .collect();
                *merged
                    .entry((lambda, t.monomial.clone()))
                    .or_insert(Complex64::new(0.0, 0.0)) += c;
            }
        }
        let expanded: Vec<ExponentTerm> = merged
            .into_iter()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|((lambda, monomial), coeff)| ExponentTerm {
                coeff,
                lambda,
                monomial,
            })
            .collect();
        for a in &expanded {
            for b in &expanded {
                let pair = pair_product(a, b);
                if let Some(c) = pair_contribution(fam, &pair, d, false)? {
                    total += w * c;
                    scale += w * c.norm();
                }
            }
        }
    }
    finish_prediction(total, scale, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expsum::suite::simple_collection;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn power_sum_geometric() {
        let v = one_d_power_sum(0, c(0.25, 0.0)).unwrap();
        assert!((v - c(4.0 / 3.0, 0.0)).norm() < 1e-14);
        let v = one_d_power_sum(0, c(0.0, 0.0)).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn power_sum_m1_closed_form() {
        // sum z (1/2)^z = (1/2)/(1/2)^2 = 2, checked against a partial sum
        let v = one_d_power_sum(1, c(0.5, 0.0)).unwrap();
        assert!((v - c(2.0, 0.0)).norm() < 1e-13);
        let mut partial = c(0.0, 0.0);
        for z in 0..200u32 {
            partial += c(z as f64 * 0.5f64.powi(z as i32), 0.0);
        }
        assert!((v - partial).norm() < 1e-12);
    }

    #[test]
    fn power_sum_partial_agreement_near_unit() {
        for m in 0..=4u32 {
            for &t in &[c(0.9, 0.0), c(0.5, 0.7), c(-0.85, 0.2)] {
                let v = one_d_power_sum(m, t).unwrap();
                let mut partial = c(0.0, 0.0);
                let mut tp = c(1.0, 0.0);
                for z in 0..3000u32 {
                    partial += c((z as f64).powi(m as i32), 0.0) * tp;
                    tp *= t;
                }
                assert!((v - partial).norm() < 1e-10 * (1.0 + v.norm()), "m={m} t={t}");
            }
        }
    }

    #[test]
    fn power_sum_rejects_unit_modulus() {
        assert!(one_d_power_sum(0, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn power_integral_closed_forms() {
        assert!((one_d_power_integral(0, c(-1.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!((one_d_power_integral(1, c(-1.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!((one_d_power_integral(2, c(-2.0, 0.0)).unwrap() - c(0.25, 0.0)).norm() < 1e-14);
        assert!(one_d_power_integral(0, c(0.0, 1.0)).is_err());
    }

    #[test]
    fn power_integral_vs_quadrature() {
        // m = 2, lambda = -2: compare against numerical quadrature
        let f = |z: f64| z * z * (-2.0 * z).exp();
        let q = crate::quad::adaptive_simpson(&f, 0.0, 40.0, 1e-12);
        let v = one_d_power_integral(2, c(-2.0, 0.0)).unwrap();
        assert!((v.re - q).abs() < 1e-10);
    }

    #[test]
    fn moments_on_boxes_and_simplices() {
        let fam1 = PolytopeFamily::new(1, vec![vec![1.0]]).unwrap();
        assert!((polytope_moment(&fam1, &[0], &[0]).unwrap() - 1.0).abs() < 1e-9);
        assert!((polytope_moment(&fam1, &[0], &[2]).unwrap() - 1.0 / 3.0).abs() < 1e-9);

        let simplex = PolytopeFamily::new(2, vec![vec![1.0, 1.0]]).unwrap();
        assert!((polytope_moment(&simplex, &[0, 1], &[0, 0]).unwrap() - 0.5).abs() < 1e-7);
        // int over simplex of x y = 1/24
        assert!((polytope_moment(&simplex, &[0, 1], &[1, 1]).unwrap() - 1.0 / 24.0).abs() < 1e-8);

        let box2 = PolytopeFamily::new(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((polytope_moment(&box2, &[0, 1], &[1, 2]).unwrap() - 0.5 / 3.0).abs() < 1e-7);
        assert!((polytope_moment(&box2, &[], &[]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn simplex3_moment() {
        let s3 = PolytopeFamily::new(3, vec![vec![1.0, 1.0, 1.0]]).unwrap();
        // volume of unit 3-simplex = 1/6
        assert!((polytope_moment(&s3, &[0, 1, 2], &[0, 0, 0]).unwrap() - 1.0 / 6.0).abs() < 1e-6);
    }

    #[test]
    fn lattice_prediction_volume_case() {
        let (coll, fam) = simple_collection(&[(c(1.0, 0.0), (0, 1), 0)]);
        let p = predicted_growth_lattice(&coll, &fam).unwrap();
        assert_eq!(p.degree, GrowthDegree::Degree(1));
        assert!((p.limit - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lattice_prediction_decaying_case() {
        // lambda = log(1/2): limit sum 4^{-z} = 4/3, degree 0
        let lam = ExactC::from_re_f64(0.5f64.ln()).unwrap();
        let t = ExponentTerm::new(c(1.0, 0.0), vec![lam], vec![0]).unwrap();
        let coll = ExponentTermCollection::new(1, vec![t]).unwrap();
        let fam = PolytopeFamily::new(1, vec![vec![1.0]]).unwrap();
        let p = predicted_growth_lattice(&coll, &fam).unwrap();
        assert_eq!(p.degree, GrowthDegree::Degree(0));
        assert!((p.limit - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn lattice_prediction_oscillatory_pair() {
        // exponents +- i pi / 2: cross pairs vanish, limit 2
        let (coll, fam) = simple_collection(&[(c(1.0, 0.0), (1, 2), 0), (c(1.0, 0.0), (-1, 2), 0)]);
        let p = predicted_growth_lattice(&coll, &fam).unwrap();
        assert_eq!(p.degree, GrowthDegree::Degree(1));
        assert!((p.limit - 2.0).abs() < 1e-9);
    }

    #[test]
    fn lattice_degenerate_collection_predicts_zero() {
        // e^{2 pi i x} - 1 vanishes on the lattice; formula must return 0
        let t1 = ExponentTerm::new(c(1.0, 0.0), vec![ExactC::i_pi(2, 1)], vec![0]).unwrap();
        let t2 = ExponentTerm::new(c(-1.0, 0.0), vec![ExactC::zero()], vec![0]).unwrap();
        let coll = ExponentTermCollection::new(1, vec![t1, t2]).unwrap();
        let fam = PolytopeFamily::new(1, vec![vec![1.0]]).unwrap();
        let p = predicted_growth_lattice(&coll, &fam).unwrap();
        assert_eq!(p.degree, GrowthDegree::ZeroFunction);
    }

    #[test]
    fn continuous_prediction_cases() {
        let fam = PolytopeFamily::new(1, vec![vec![1.0]]).unwrap();
        let one = |dim| NicePolynomial::constant_one(dim, 1);

        // constant term: volume of [0,1)
        let t = ExponentTerm::new(c(1.0, 0.0), vec![ExactC::zero()], vec![0]).unwrap();
        let coll = ExponentTermCollection::new(1, vec![t]).unwrap();
        let p = predicted_growth_continuous(&coll, &[one(1)], &[1.0], &fam).unwrap();
        assert_eq!(p.degree, GrowthDegree::Degree(1));
        assert!((p.limit - 1.0).abs() < 1e-9);

        // lambda = -1: int e^{-2z} = 1/2, degree 0
        let t = ExponentTerm::new(c(1.0, 0.0), vec![ExactC::rational(-1, 1)], vec![0]).unwrap();
        let coll = ExponentTermCollection::new(1, vec![t]).unwrap();
        let p = predicted_growth_continuous(&coll, &[one(1)], &[1.0], &fam).unwrap();
        assert_eq!(p.degree, GrowthDegree::Degree(0));
        assert!((p.limit - 0.5).abs() < 1e-12);

        // lambda = 0, m = 1: degree 3, limit int_0^1 y^2 dy = 1/3
        let t = ExponentTerm::new(c(1.0, 0.0), vec![ExactC::zero()], vec![1]).unwrap();
        let coll = ExponentTermCollection::new(1, vec![t]).unwrap();
        let p = predicted_growth_continuous(&coll, &[one(1)], &[1.0], &fam).unwrap();
        assert_eq!(p.degree, GrowthDegree::Degree(3));
        assert!((p.limit - 1.0 / 3.0).abs() < 1e-7);
    }
}
