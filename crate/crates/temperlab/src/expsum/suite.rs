//! Seeded random collections for the oracle-convergence suites.

use super::{ExactC, ExponentTerm, ExponentTermCollection, PolytopeFamily};
use crate::expsum::predict::NicePolynomial;
use num::complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// 1-D collection with purely imaginary exponents `i pi num/den` and the
/// unit interval family; convenience for tests.
pub fn simple_collection(
    terms: &[(Complex64, (i64, i64), u32)],
) -> (ExponentTermCollection, PolytopeFamily) {
    let terms: Vec<ExponentTerm> = terms
        .iter()
        .map(|&(c, (num, den), m)| {
            ExponentTerm::new(c, vec![ExactC::i_pi(num, den)], vec![m]).unwrap()
        })
        .collect();
    (
        ExponentTermCollection::new(1, terms).unwrap(),
        PolytopeFamily::new(1, vec![vec![1.0]]).unwrap(),
    )
}

fn random_exponent(rng: &mut ChaCha8Rng) -> ExactC {
    // Re in {0} with probability 1/2, otherwise a rational in [-2, -0.6]
    // (decay rates too close to 0 give lower-order masses that dwarf the
    // top-degree growth at desk-scale radii); Im an exact
    // small-denominator multiple of pi.
    let re = if rng.gen_bool(0.5) {
        ExactC::zero()
    } else {
        let den = *[4i64, 8, 16].choose(rng).unwrap();
        let lo = (0.6 * den as f64).ceil() as i64;
        let hi = 2 * den;
        ExactC::rational(-rng.gen_range(lo..=hi), den)
    };
    let den = *[1i64, 2, 3, 4].choose(rng).unwrap();
    let num = rng.gen_range(-2 * den..=2 * den);
    re.add(&ExactC::i_pi(num, den))
}

fn random_coeff(rng: &mut ChaCha8Rng) -> Complex64 {
    let mag = |r: &mut ChaCha8Rng| {
        let v: f64 = r.gen_range(0.25..1.5);
        if r.gen_bool(0.5) {
            v
        } else {
            -v
        }
    };
    Complex64::new(mag(rng), mag(rng))
}

/// Families kept small enough that exact enumeration at r = 400 stays
/// within budget.
fn random_family(rng: &mut ChaCha8Rng, n: usize) -> PolytopeFamily {
    let dirs = match n {
        1 => {
            if rng.gen_bool(0.5) {
                vec![vec![1.0]]
            } else {
                vec![vec![2.0]]
            }
        }
        2 => match rng.gen_range(0..3u32) {
            0 => vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            1 => vec![vec![1.0, 1.0]],
            _ => vec![vec![1.0, 2.0], vec![2.0, 1.0]],
        },
        _ => vec![vec![2.0, 2.0, 2.0]],
    };
    PolytopeFamily::new(n, dirs).unwrap()
}

/// Draws a lattice-nondegenerate random collection: `n <= 3` coordinates,
/// up to 3 terms, monomial exponents `<= 2`.
pub fn random_lattice_instance(
    rng: &mut ChaCha8Rng,
) -> (ExponentTermCollection, PolytopeFamily) {
    loop {
        let n = *[1usize, 1, 2, 2, 3].choose(rng).unwrap();
        let p = rng.gen_range(1..=3usize);
        let mut terms = Vec::with_capacity(p);
        for _ in 0..p {
            let lambda: Vec<ExactC> = (0..n).map(|_| random_exponent(rng)).collect();
            // full monomial range on unit-modulus coordinates, where the
            // exponent feeds the degree; low range on decaying ones,
            // where it only inflates the convergent tail
            let monomial: Vec<u32> = lambda
                .iter()
                .map(|l| {
                    if l.re_is_zero() {
                        rng.gen_range(0..=2u32)
                    } else {
                        rng.gen_range(0..=1u32)
                    }
                })
                .collect();
            terms.push(ExponentTerm::new(random_coeff(rng), lambda, monomial).unwrap());
        }
        if let Ok(coll) = ExponentTermCollection::new(n, terms) {
            if coll.lattice_nondegenerate() {
                let fam = random_family(rng, n);
                return (coll, fam);
            }
        }
    }
}

/// Random 1-D continuous instance: terms as above plus exponential
/// polynomial factors over a finite base of size 1 or 2.
pub fn random_continuous_instance(
    rng: &mut ChaCha8Rng,
) -> (
    ExponentTermCollection,
    Vec<NicePolynomial>,
    Vec<f64>,
    PolytopeFamily,
) {
    loop {
        let p = rng.gen_range(1..=2usize);
        let mut terms = Vec::with_capacity(p);
        for _ in 0..p {
            let lambda = vec![random_exponent(rng)];
            let monomial = vec![rng.gen_range(0..=1u32)];
            terms.push(ExponentTerm::new(random_coeff(rng), lambda, monomial).unwrap());
        }
        let Ok(coll) = ExponentTermCollection::new(1, terms) else {
            continue;
        };
        let base_len = rng.gen_range(1..=2usize);
        let weights: Vec<f64> = (0..base_len).map(|_| rng.gen_range(0.5..1.5)).collect();
        let nice: Vec<NicePolynomial> = (0..p)
            .map(|_| {
                let mut factor_terms = vec![(
                    vec![0u32],
                    (0..base_len).map(|_| random_coeff(rng)).collect::<Vec<_>>(),
                )];
                if rng.gen_bool(0.5) {
                    factor_terms.push((
                        vec![rng.gen_range(1..=2u32)],
                        (0..base_len).map(|_| random_coeff(rng)).collect(),
                    ));
                }
                NicePolynomial {
                    terms: factor_terms,
                }
            })
            .collect();
        let fam = PolytopeFamily::new(1, vec![vec![1.0]]).unwrap();
        return (coll, nice, weights, fam);
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_deterministic() {
        let mut a = seeded_rng(7);
        let mut b = seeded_rng(7);
        for _ in 0..5 {
            let (ca, fa) = random_lattice_instance(&mut a);
            let (cb, fb) = random_lattice_instance(&mut b);
            assert_eq!(ca.dim, cb.dim);
            assert_eq!(fa.directions, fb.directions);
            assert_eq!(ca.terms.len(), cb.terms.len());
        }
    }
}
