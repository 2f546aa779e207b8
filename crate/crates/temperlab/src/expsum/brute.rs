//! Brute-force oracles: exact lattice enumeration and midpoint-rule
//! integration over the dilated polytope.

use super::{ExponentTermCollection, PolytopeFamily};
use crate::error::{Error, Result};
use crate::expsum::predict::NicePolynomial;
use crate::quad::Kahan;
use crate::tolerances::LATTICE_POINT_BUDGET;
use num::complex::Complex64;

/// Per-term, per-coordinate value tables `x^m e^{lambda x}` for integer x.
fn coordinate_tables(
    coll: &ExponentTermCollection,
    bounds: &[usize],
) -> Vec<Vec<Vec<Complex64>>> {
    coll.terms
        .iter()
        .map(|t| {
            (0..coll.dim)
                .map(|j| {
                    let lam = t.lambda[j].to_c64();
                    let m = t.monomial[j] as i32;
                    (0..=bounds[j])
                        .map(|x| {
                            let xf = x as f64;
                            Complex64::new(xf.powi(m), 0.0) * (lam * xf).exp()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Exact enumeration of `Z^n_{>=0} ∩ P_{<r}` (strict inequalities),
/// accumulating `|sum_l c_l x^{m_l} e^{<lambda_l, x>}|^2` in compensated
/// summation.
pub fn squared_lattice_sum(
    coll: &ExponentTermCollection,
    fam: &PolytopeFamily,
    r: f64,
) -> Result<f64> {
    if fam.dim != coll.dim {
        return Err(Error::invalid("collection and polytope dimensions differ"));
    }
    if !(r > 0.0) {
        return Err(Error::invalid("radius must be positive"));
    }
    let bounds: Vec<usize> = (0..fam.dim)
        .map(|j| fam.coordinate_bound(j, r).unwrap().floor() as usize)
        .collect();
    let estimate: f64 = bounds.iter().map(|&b| b as f64 + 1.0).product();
    if estimate > 100.0 * LATTICE_POINT_BUDGET as f64 {
        return Err(Error::budget(format!(
            "coordinate-bound estimate {estimate:.3e} lattice points"
        )));
    }
    let tables = coordinate_tables(coll, &bounds);
    let p = coll.terms.len();
    let mut acc = Kahan::new();
    let mut visited: u64 = 0;

    // depth-first over coordinates with partial inner products per direction
    // and partial per-term prefix products
    let n = fam.dim;
    let mut x = vec![0usize; n];
    let mut partial_dot = vec![vec![0.0f64; fam.directions.len()]; n + 1];
    let mut prefix = vec![vec![Complex64::new(1.0, 0.0); p]; n + 1];
    let coeffs: Vec<Complex64> = coll.terms.iter().map(|t| t.coeff).collect();

    let mut level = 0usize;
    loop {
        if level == n {
            // leaf: evaluate
            visited += 1;
            if visited > LATTICE_POINT_BUDGET {
                return Err(Error::budget(format!(
                    "lattice enumeration exceeded {LATTICE_POINT_BUDGET} points"
                )));
            }
            let mut s = Complex64::new(0.0, 0.0);
            for l in 0..p {
                s += coeffs[l] * prefix[n][l];
            }
            acc.add(s.norm_sqr());
            level -= 1;
            x[level] += 1;
        }
        // feasibility of x[level] at this level
        let mut feasible = x[level] <= bounds[level];
        if feasible {
            for (vi, v) in fam.directions.iter().enumerate() {
                if partial_dot[level][vi] + v[level] * x[level] as f64 >= r {
                    feasible = false;
                    break;
                }
            }
        }
        if feasible {
            for (vi, v) in fam.directions.iter().enumerate() {
                partial_dot[level + 1][vi] = partial_dot[level][vi] + v[level] * x[level] as f64;
            }
            for l in 0..p {
                prefix[level + 1][l] = prefix[level][l] * tables[l][level][x[level]];
            }
            level += 1;
            if level < n {
                x[level] = 0;
            }
        } else {
            // backtrack
            if level == 0 {
                break;
            }
            level -= 1;
            x[level] += 1;
        }
    }
    Ok(acc.value())
}

/// Midpoint-rule approximation of the continuous squared integral, with
/// one nice factor per term and positive base weights. Accuracy is
/// O(meshStep) near the boundary of `P_{<r}`.
pub fn integral_bruteforce(
    coll: &ExponentTermCollection,
    nice: &[NicePolynomial],
    base_weights: &[f64],
    fam: &PolytopeFamily,
    r: f64,
    mesh: f64,
) -> Result<f64> {
    if !(mesh > 0.0 && mesh <= 0.05) {
        return Err(Error::invalid("mesh step must lie in (0, 0.05]"));
    }
    if nice.len() != coll.terms.len() {
        return Err(Error::invalid("need one nice factor per term"));
    }
    let bounds: Vec<usize> = (0..fam.dim)
        .map(|j| (fam.coordinate_bound(j, r).unwrap() / mesh).ceil() as usize)
        .collect();
    let estimate: f64 = bounds.iter().map(|&b| b as f64 + 1.0).product();
    if estimate > LATTICE_POINT_BUDGET as f64 {
        return Err(Error::budget(format!(
            "mesh estimate {estimate:.3e} cells exceeds budget"
        )));
    }
    let cell = mesh.powi(fam.dim as i32);
    let mut acc = Kahan::new();
    let mut idx = vec![0usize; fam.dim];
    let mut x = vec![0.0f64; fam.dim];
    'outer: loop {
        for j in 0..fam.dim {
            x[j] = (idx[j] as f64 + 0.5) * mesh;
        }
        if fam.contains(&x, r) {
            for (b, &w) in base_weights.iter().enumerate() {
                let mut s = Complex64::new(0.0, 0.0);
                for (t, phi) in coll.terms.iter().zip(nice) {
                    let mut dot = Complex64::new(0.0, 0.0);
                    for (j, l) in t.lambda.iter().enumerate() {
                        dot += l.to_c64() * x[j];
                    }
                    let mut mono = 1.0;
                    for (j, &m) in t.monomial.iter().enumerate() {
                        mono *= x[j].powi(m as i32);
                    }
                    let mut phival = Complex64::new(0.0, 0.0);
                    for (k, mu) in &phi.terms {
                        let kdot: f64 = k.iter().zip(&x).map(|(&kk, &xx)| kk as f64 * xx).sum();
                        phival += mu[b] * (-kdot).exp();
                    }
                    s += t.coeff * mono * dot.exp() * phival;
                }
                acc.add(w * s.norm_sqr() * cell);
            }
        }
        // odometer increment
        let mut j = 0;
        loop {
            idx[j] += 1;
            if idx[j] <= bounds[j] {
                break;
            }
            idx[j] = 0;
            j += 1;
            if j == fam.dim {
                break 'outer;
            }
        }
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expsum::suite::simple_collection;
    use crate::expsum::{ExactC, ExponentTerm};
    use num::complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn counts_lattice_points() {
        let (coll, fam) = simple_collection(&[(c(1.0, 0.0), (0, 1), 0)]);
        // x = 0..10 inside <x> < 10.5
        let v = squared_lattice_sum(&coll, &fam, 10.5).unwrap();
        assert!((v - 11.0).abs() < 1e-12);
    }

    #[test]
    fn geometric_series_case() {
        let lam = ExactC::from_re_f64(0.5f64.ln()).unwrap();
        let t = ExponentTerm::new(c(1.0, 0.0), vec![lam], vec![0]).unwrap();
        let coll = crate::expsum::ExponentTermCollection::new(1, vec![t]).unwrap();
        let fam = crate::expsum::PolytopeFamily::new(1, vec![vec![1.0]]).unwrap();
        let v = squared_lattice_sum(&coll, &fam, 1000.0).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_pair_case() {
        // 4 cos^2(pi x / 2): 4 at even x, 0 at odd; r = 1000 -> 2000
        let (coll, fam) = simple_collection(&[(c(1.0, 0.0), (1, 2), 0), (c(1.0, 0.0), (-1, 2), 0)]);
        let v = squared_lattice_sum(&coll, &fam, 1000.0).unwrap();
        assert!((v - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn strict_inequality_excludes_boundary() {
        let (coll, fam) = simple_collection(&[(c(1.0, 0.0), (0, 1), 0)]);
        // x < 10 counts 0..9
        let v = squared_lattice_sum(&coll, &fam, 10.0).unwrap();
        assert!((v - 10.0).abs() < 1e-12);
    }

    #[test]
    fn bruteforce_integral_cases() {
        let fam = crate::expsum::PolytopeFamily::new(1, vec![vec![1.0]]).unwrap();
        let one = NicePolynomial::constant_one(1, 1);

        let t = ExponentTerm::new(c(1.0, 0.0), vec![ExactC::zero()], vec![0]).unwrap();
        let coll = crate::expsum::ExponentTermCollection::new(1, vec![t]).unwrap();
        let v =
            integral_bruteforce(&coll, &[one.clone()], &[1.0], &fam, 100.0, 0.01).unwrap();
        assert!((v - 100.0).abs() < 0.1);

        let t = ExponentTerm::new(c(1.0, 0.0), vec![ExactC::rational(-1, 1)], vec![0]).unwrap();
        let coll = crate::expsum::ExponentTermCollection::new(1, vec![t]).unwrap();
        let v = integral_bruteforce(&coll, &[one.clone()], &[1.0], &fam, 50.0, 0.01).unwrap();
        assert!((v - 0.5).abs() < 1e-3);

        // |e^{i pi x}|^2 = 1
        let t = ExponentTerm::new(c(1.0, 0.0), vec![ExactC::i_pi(1, 1)], vec![0]).unwrap();
        let coll = crate::expsum::ExponentTermCollection::new(1, vec![t]).unwrap();
        let v = integral_bruteforce(&coll, &[one], &[1.0], &fam, 100.0, 0.01).unwrap();
        assert!((v - 100.0).abs() < 0.2);
    }

    #[test]
    fn mesh_budget_enforced() {
        let (coll, fam) = simple_collection(&[(c(1.0, 0.0), (0, 1), 0)]);
        assert!(integral_bruteforce(
            &coll,
            &[NicePolynomial::constant_one(1, 1)],
            &[1.0],
            &fam,
            100.0,
            0.1
        )
        .is_err());
    }
}
