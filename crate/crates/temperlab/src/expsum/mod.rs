//! Growth engine for squared exponential sums and integrals over dilated
//! polytopes.
//!
//! Inputs are finite collections of terms `c * x^m * exp(<lambda, x>)`
//! with `Re(lambda_j) <= 0`. The engine predicts the polynomial growth
//! degree and the limit value of
//! `sum_{x in Z^n_{>=0}, <v,x> < r} |sum_l c_l x^{m_l} e^{<lambda_l,x>}|^2`
//! (and of the continuous analogue) as `r -> infinity`, and provides
//! brute-force oracles for both.
//!
//! Imaginary parts of exponents are carried as exact rational multiples
//! of pi plus an exact rational remainder, so that the lattice vanishing
//! test (membership of a residue in `2 pi i Z`) is decided exactly.

mod brute;
mod predict;
pub mod suite;

pub use brute::{integral_bruteforce, squared_lattice_sum};
pub use predict::{
    one_d_power_integral, one_d_power_sum, polytope_moment, predicted_growth_continuous,
    predicted_growth_lattice, subtop_mass_lattice,
};

use crate::error::{Error, Result};
use num::complex::Complex64;
use num::rational::BigRational;
use num::traits::ToPrimitive;
use num::{BigInt, Signed, Zero};
use std::f64::consts::PI;

/// Exact scalar for exponents: `re + i * (im_pi * pi + im_rem)`.
///
/// `re`, `im_pi`, `im_rem` are exact rationals. Keeping the pi-multiple
/// separate makes `2 pi i Z` membership an exact test.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactC {
    pub re: BigRational,
    pub im_pi: BigRational,
    pub im_rem: BigRational,
}

impl ExactC {
    pub fn new(re: BigRational, im_pi: BigRational, im_rem: BigRational) -> Self {
        Self { re, im_pi, im_rem }
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero(), BigRational::zero())
    }

    /// Exact conversion of an `f64` real part (every finite f64 is rational).
    pub fn from_re_f64(re: f64) -> Result<Self> {
        let r = BigRational::from_float(re)
            .ok_or_else(|| Error::invalid(format!("non-finite real part {re}")))?;
        Ok(Self::new(r, BigRational::zero(), BigRational::zero()))
    }

    pub fn from_parts_f64(re: f64, im_pi: f64, im_rem: f64) -> Result<Self> {
        let conv = |x: f64, what: &str| {
            BigRational::from_float(x)
                .ok_or_else(|| Error::invalid(format!("non-finite {what} {x}")))
        };
        Ok(Self::new(
            conv(re, "real part")?,
            conv(im_pi, "pi multiple")?,
            conv(im_rem, "imaginary remainder")?,
        ))
    }

    pub fn rational(num: i64, den: i64) -> Self {
        Self::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
            BigRational::zero(),
        )
    }

    /// `num/den * i * pi`.
    pub fn i_pi(num: i64, den: i64) -> Self {
        Self::new(
            BigRational::zero(),
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            &self.re + &other.re,
            &self.im_pi + &other.im_pi,
            &self.im_rem + &other.im_rem,
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(
            &self.re - &other.re,
            &self.im_pi - &other.im_pi,
            &self.im_rem - &other.im_rem,
        )
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im_pi.clone(), -self.im_rem.clone())
    }

    pub fn re_is_zero(&self) -> bool {
        self.re.is_zero()
    }

    pub fn re_is_positive(&self) -> bool {
        self.re.is_positive()
    }

    /// Exact test for membership of the imaginary part in `2 pi Z`
    /// (assuming the real part is zero).
    pub fn im_in_two_pi_z(&self) -> bool {
        if !self.im_rem.is_zero() {
            return false;
        }
        self.im_pi.is_integer() && (self.im_pi.numer() % BigInt::from(2)).is_zero()
    }

    pub fn im_is_zero(&self) -> bool {
        self.im_pi.is_zero() && self.im_rem.is_zero()
    }

    pub fn to_c64(&self) -> Complex64 {
        let re = self.re.to_f64().unwrap_or(f64::NAN);
        let im = self.im_pi.to_f64().unwrap_or(f64::NAN) * PI
            + self.im_rem.to_f64().unwrap_or(f64::NAN);
        Complex64::new(re, im)
    }

    /// Key identifying the exponent modulo `2 pi i` (what a lattice sum
    /// can see).
    pub fn lattice_key(&self) -> (BigRational, BigRational, BigRational) {
        let two = BigRational::from(BigInt::from(2));
        let q = (&self.im_pi / &two).floor();
        (self.re.clone(), &self.im_pi - two * q, self.im_rem.clone())
    }
}

/// One term `coeff * x^monomial * exp(<lambda, x>)`.
#[derive(Debug, Clone)]
pub struct ExponentTerm {
    pub coeff: Complex64,
    pub lambda: Vec<ExactC>,
    pub monomial: Vec<u32>,
}

impl ExponentTerm {
    pub fn new(coeff: Complex64, lambda: Vec<ExactC>, monomial: Vec<u32>) -> Result<Self> {
        if lambda.len() != monomial.len() {
            return Err(Error::invalid("lambda and monomial lengths differ"));
        }
        if lambda.iter().any(|l| l.re_is_positive()) {
            return Err(Error::domain("exponent with positive real part"));
        }
        Ok(Self {
            coeff,
            lambda,
            monomial,
        })
    }

    fn key(&self) -> (Vec<ExactC>, Vec<u32>) {
        (self.lambda.clone(), self.monomial.clone())
    }
}

/// A nonempty collection of terms in a fixed dimension with pairwise
/// distinct `(lambda, monomial)` couples.
#[derive(Debug, Clone)]
pub struct ExponentTermCollection {
    pub dim: usize,
    pub terms: Vec<ExponentTerm>,
}

impl ExponentTermCollection {
    pub fn new(dim: usize, terms: Vec<ExponentTerm>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if terms.is_empty() {
            return Err(Error::invalid("term collection must be nonempty"));
        }
        for t in &terms {
            if t.lambda.len() != dim {
                return Err(Error::invalid("term dimension mismatch"));
            }
        }
        let mut keys: Vec<_> = terms.iter().map(|t| t.key()).collect();
        keys.sort();
        keys.dedup();
        if keys.len() != terms.len() {
            return Err(Error::invalid("(lambda, monomial) couples must be distinct"));
        }
        Ok(Self { dim, terms })
    }

    /// True when the couples stay distinct after reducing imaginary parts
    /// modulo `2 pi`; lattice sums cannot separate couples that collide
    /// here, and strict positivity of the predicted limit requires it.
    pub fn lattice_nondegenerate(&self) -> bool {
        let mut keys: Vec<_> = self
            .terms
            .iter()
            .map(|t| {
                (
                    t.lambda.iter().map(|l| l.lattice_key()).collect::<Vec<_>>(),
                    t.monomial.clone(),
                )
            })
            .collect();
        keys.sort();
        keys.dedup();
        keys.len() == self.terms.len()
    }
}

/// The dilation family `P_{<r} = { x >= 0 : <v, x> < r for all v }`.
#[derive(Debug, Clone)]
pub struct PolytopeFamily {
    pub dim: usize,
    pub directions: Vec<Vec<f64>>,
}

impl PolytopeFamily {
    pub fn new(dim: usize, directions: Vec<Vec<f64>>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::invalid("direction set must be nonempty"));
        }
        for v in &directions {
            if v.len() != dim {
                return Err(Error::invalid("direction dimension mismatch"));
            }
            if v.iter().any(|&c| !(c >= 0.0) || !c.is_finite()) {
                return Err(Error::invalid("directions must have nonnegative finite entries"));
            }
        }
        let fam = Self { dim, directions };
        // coverage: every coordinate is bounded in P_{<1}
        for j in 0..dim {
            if fam.coordinate_bound(j, 1.0).is_none() {
                return Err(Error::invalid(format!(
                    "no direction has a positive entry at coordinate {j}; P_<r is unbounded"
                )));
            }
        }
        Ok(fam)
    }

    /// Upper bound for coordinate `j` inside `P_{<r}`, if bounded.
    pub fn coordinate_bound(&self, j: usize, r: f64) -> Option<f64> {
        self.directions
            .iter()
            .filter(|v| v[j] > 0.0)
            .map(|v| r / v[j])
            .min_by(|a, b| a.partial_cmp(b).unwrap())
    }

    pub fn contains(&self, x: &[f64], r: f64) -> bool {
        self.directions
            .iter()
            .all(|v| v.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() < r)
    }
}

/// Predicted growth: either the function vanishes identically on the
/// relevant domain, or a degree with a strictly positive limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthDegree {
    ZeroFunction,
    Degree(u32),
}

#[derive(Debug, Clone, Copy)]
pub struct GrowthPrediction {
    pub degree: GrowthDegree,
    pub limit: f64,
}

impl GrowthPrediction {
    pub fn degree_u32(&self) -> Option<u32> {
        match self.degree {
            GrowthDegree::Degree(d) => Some(d),
            GrowthDegree::ZeroFunction => None,
        }
    }
}

/// Indices where the exponent has vanishing real part.
pub fn j_lambda(lambda: &[ExactC]) -> Result<Vec<usize>> {
    if lambda.iter().any(|l| l.re_is_positive()) {
        return Err(Error::domain("exponent with positive real part"));
    }
    Ok(lambda
        .iter()
        .enumerate()
        .filter(|(_, l)| l.re_is_zero())
        .map(|(j, _)| j)
        .collect())
}

/// `d(lambda, m) = sum_{j in J_lambda} (1 + m_j)`.
pub fn degree(lambda: &[ExactC], monomial: &[u32]) -> Result<u32> {
    if lambda.len() != monomial.len() {
        return Err(Error::invalid("lambda and monomial lengths differ"));
    }
    Ok(j_lambda(lambda)?
        .into_iter()
        .map(|j| 1 + monomial[j])
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_lambda_definition() {
        let l = vec![ExactC::zero()];
        assert_eq!(j_lambda(&l).unwrap(), vec![0]);

        let l = vec![
            ExactC::new(
                BigRational::from(BigInt::from(-1)),
                BigRational::zero(),
                BigRational::from(BigInt::from(2)),
            ),
            ExactC::zero(),
        ];
        assert_eq!(j_lambda(&l).unwrap(), vec![1]);

        // (i, -1, 3i) -> {0, 2}
        let l = vec![
            ExactC::new(BigRational::zero(), BigRational::zero(), BigRational::from(BigInt::from(1))),
            ExactC::rational(-1, 1),
            ExactC::new(BigRational::zero(), BigRational::zero(), BigRational::from(BigInt::from(3))),
        ];
        assert_eq!(j_lambda(&l).unwrap(), vec![0, 2]);
    }

    #[test]
    fn j_lambda_rejects_positive_real_part() {
        let l = vec![ExactC::rational(1, 2)];
        assert!(j_lambda(&l).is_err());
    }

    #[test]
    fn degree_examples() {
        let l = vec![ExactC::zero()];
        assert_eq!(degree(&l, &[0]).unwrap(), 1);

        let l = vec![
            ExactC::new(
                BigRational::from(BigInt::from(-1)),
                BigRational::zero(),
                BigRational::from(BigInt::from(2)),
            ),
            ExactC::zero(),
        ];
        assert_eq!(degree(&l, &[3, 2]).unwrap(), 3);

        let l = vec![
            ExactC::new(BigRational::zero(), BigRational::zero(), BigRational::from(BigInt::from(1))),
            ExactC::rational(-1, 1),
        ];
        assert_eq!(degree(&l, &[1, 5]).unwrap(), 2);
    }

    #[test]
    fn degree_rejects_length_mismatch() {
        let l = vec![ExactC::zero()];
        assert!(degree(&l, &[0, 1]).is_err());
    }

    #[test]
    fn two_pi_membership_is_exact() {
        assert!(ExactC::i_pi(2, 1).im_in_two_pi_z());
        assert!(ExactC::i_pi(-4, 1).im_in_two_pi_z());
        assert!(!ExactC::i_pi(1, 1).im_in_two_pi_z());
        assert!(!ExactC::i_pi(2, 3).im_in_two_pi_z());
        let with_rem = ExactC::new(
            BigRational::zero(),
            BigRational::from(BigInt::from(2)),
            BigRational::new(BigInt::from(1), BigInt::from(7)),
        );
        assert!(!with_rem.im_in_two_pi_z());
    }

    #[test]
    fn collection_rejects_duplicates() {
        let t = ExponentTerm::new(Complex64::new(1.0, 0.0), vec![ExactC::zero()], vec![0]).unwrap();
        assert!(ExponentTermCollection::new(1, vec![t.clone(), t]).is_err());
    }

    #[test]
    fn lattice_degeneracy_detected() {
        // i*pi/2 and i*pi/2 - 2*i*pi coincide on the lattice
        let t1 = ExponentTerm::new(Complex64::new(1.0, 0.0), vec![ExactC::i_pi(1, 2)], vec![0]).unwrap();
        let t2 =
            ExponentTerm::new(Complex64::new(1.0, 0.0), vec![ExactC::i_pi(-3, 2)], vec![0]).unwrap();
        let coll = ExponentTermCollection::new(1, vec![t1, t2]).unwrap();
        assert!(!coll.lattice_nondegenerate());
    }

    #[test]
    fn polytope_requires_coverage() {
        assert!(PolytopeFamily::new(2, vec![vec![1.0, 0.0]]).is_err());
        assert!(PolytopeFamily::new(2, vec![vec![1.0, 1.0]]).is_ok());
    }
}
