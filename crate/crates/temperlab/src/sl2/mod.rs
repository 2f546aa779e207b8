//! The real group: 2x2 unimodular matrices, Iwasawa decomposition,
//! radius function, unitary principal-series parameters and K-finite
//! vectors.

pub mod ball;
pub mod coeff;
pub mod norms;

pub use ball::{
    ball_integral, cross_ball_integral, schur_report, shell_xi_bound, window_ratio, CoeffTables,
    SchurRow,
};
pub use coeff::{h_eval, hypergeom_coeff, jacobi_q, matrix_coeff, xi};

use crate::error::{Error, Result};
use num::complex::Complex64;
use std::collections::BTreeMap;

/// Row-major 2x2 real matrix with determinant 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2R {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2R {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let m = Self { a, b, c, d };
        let det = m.det();
        if (det - 1.0).abs() > 1e-12 * (1.0 + a.abs() + b.abs() + c.abs() + d.abs()) {
            return Err(Error::invalid(format!("determinant {det} != 1")));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        Self { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    /// diag(t, 1/t)
    pub fn torus(t: f64) -> Self {
        Self { a: t, b: 0.0, c: 0.0, d: 1.0 / t }
    }

    pub fn rotation(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self { a: c, b: -s, c: s, d: c }
    }

    /// Upper unipotent [[1, u], [0, 1]].
    pub fn upper(u: f64) -> Self {
        Self { a: 1.0, b: u, c: 0.0, d: 1.0 }
    }

    /// Lower unipotent [[1, 0], [x, 1]].
    pub fn lower(x: f64) -> Self {
        Self { a: 1.0, b: 0.0, c: x, d: 1.0 }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inv(&self) -> Self {
        // det = 1
        Self { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn max_entry_diff(&self, o: &Self) -> f64 {
        (self.a - o.a)
            .abs()
            .max((self.b - o.b).abs())
            .max((self.c - o.c).abs())
            .max((self.d - o.d).abs())
    }
}

/// Iwasawa coordinates: g = [[1,u],[0,1]] * diag(t, 1/t) * rotation(psi),
/// with t > 0.
pub fn iwasawa(g: &Mat2R) -> (f64, f64, f64) {
    // bottom row determines the rotation: (cos, sin) ~ (d, c)
    let rho = g.c.hypot(g.d);
    let psi = g.c.atan2(g.d);
    let t = 1.0 / rho;
    // (g * R(-psi))_{12} = a sin + b cos, and the UA factor is [[t, u t],[0, 1/t]]
    let x = (g.a * g.c + g.b * g.d) / rho;
    let u = x * t;
    (u, t, psi)
}

/// `r(g) = 2 log sigma_max(g)`: the log of the square of the largest
/// singular value. Vanishes exactly on rotations.
pub fn radius(g: &Mat2R) -> f64 {
    // singular values of g are (s, 1/s); s_max^2 is the largest eigenvalue
    // of g^T g, whose trace is the squared Frobenius norm.
    let q = g.a * g.a + g.b * g.b + g.c * g.c + g.d * g.d;
    // eigenvalues of g^T g solve x^2 - q x + 1 = 0
    let disc = (q * q - 4.0).max(0.0).sqrt();
    let smax_sq = 0.5 * (q + disc);
    smax_sq.max(1.0).ln()
}

/// Unitary character of the diagonal torus:
/// `chi(a(t)) = |t|^{is} sgn(t)^eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryCharacterR {
    pub s: f64,
    pub eps: u8,
}

impl UnitaryCharacterR {
    pub fn new(s: f64, eps: u8) -> Result<Self> {
        if eps > 1 {
            return Err(Error::invalid("eps must be 0 or 1"));
        }
        Ok(Self { s, eps })
    }

    /// True when the character is admissible for the non-spherical
    /// pipeline (the trivial character is excluded there).
    pub fn is_nontrivial(&self) -> bool {
        self.s != 0.0 || self.eps == 1
    }

    /// Parity constraint for a K-type index.
    pub fn admits(&self, n: i64) -> bool {
        n.rem_euclid(2) == self.eps as i64
    }
}

/// K-finite vector: finite complex combination of the basis vectors
/// indexed by admissible K-type integers.
#[derive(Debug, Clone)]
pub struct KFiniteVectorR {
    pub chi: UnitaryCharacterR,
    pub coeffs: BTreeMap<i64, Complex64>,
}

impl KFiniteVectorR {
    pub fn new(chi: UnitaryCharacterR, entries: &[(i64, Complex64)]) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for &(n, c) in entries {
            if !chi.admits(n) {
                return Err(Error::domain(format!(
                    "K-type {n} violates parity for eps = {}",
                    chi.eps
                )));
            }
            if c.norm() > 0.0 {
                *coeffs.entry(n).or_insert(Complex64::new(0.0, 0.0)) += c;
            }
        }
        Ok(Self { chi, coeffs })
    }

    pub fn basis(chi: UnitaryCharacterR, n: i64) -> Result<Self> {
        Self::new(chi, &[(n, Complex64::new(1.0, 0.0))])
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, c) in &self.coeffs {
            if let Some(d) = other.coeffs.get(n) {
                acc += c * d.conj();
            }
        }
        acc
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn types(&self) -> Vec<i64> {
        self.coeffs.keys().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reassemble(u: f64, t: f64, psi: f64) -> Mat2R {
        Mat2R::upper(u).mul(&Mat2R::torus(t)).mul(&Mat2R::rotation(psi))
    }

    #[test]
    fn iwasawa_identity_rotation_torus() {
        let (u, t, psi) = iwasawa(&Mat2R::identity());
        assert!(u.abs() < 1e-15 && (t - 1.0).abs() < 1e-15 && psi.abs() < 1e-15);

        let (u, t, psi) = iwasawa(&Mat2R::rotation(0.7));
        assert!(u.abs() < 1e-15 && (t - 1.0).abs() < 1e-15 && (psi - 0.7).abs() < 1e-15);

        let (u, t, psi) = iwasawa(&Mat2R::torus(2.0));
        assert!(u.abs() < 1e-15 && (t - 2.0).abs() < 1e-15 && psi.abs() < 1e-15);
    }

    #[test]
    fn iwasawa_reassembles() {
        let gs = [
            Mat2R::lower(1.5),
            Mat2R::new(2.0, 0.3, 1.0, 0.65).unwrap(),
            Mat2R::rotation(1.0).mul(&Mat2R::torus(3.0)).mul(&Mat2R::rotation(-0.4)),
        ];
        for g in gs {
            let (u, t, psi) = iwasawa(&g);
            assert!(t > 0.0);
            assert!(reassemble(u, t, psi).max_entry_diff(&g) < 1e-12);
        }
    }

    #[test]
    fn radius_values() {
        assert!(radius(&Mat2R::identity()).abs() < 1e-15);
        assert!((radius(&Mat2R::torus(1.0f64.exp())) - 2.0).abs() < 1e-12);
        assert!(radius(&Mat2R::rotation(2.1)).abs() < 1e-12);
        // K-biinvariance and symmetry under inversion
        let g = Mat2R::rotation(0.3).mul(&Mat2R::torus(5.0)).mul(&Mat2R::rotation(1.2));
        assert!((radius(&g) - 2.0 * 5.0f64.ln()).abs() < 1e-10);
        assert!((radius(&g.inv()) - radius(&g)).abs() < 1e-10);
    }

    #[test]
    fn parity_enforced() {
        let chi = UnitaryCharacterR::new(0.0, 1).unwrap();
        assert!(KFiniteVectorR::basis(chi, 1).is_ok());
        assert!(KFiniteVectorR::basis(chi, 2).is_err());
    }
}
