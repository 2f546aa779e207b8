//! Radius functions from two different matrix norms on the adjoint
//! representation, and the sandwich comparison between the resulting
//! ball families.

use super::Mat2R;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Adjoint action on the trace-form-orthonormal basis
/// `(H / sqrt(2), E, F)` of traceless matrices. Rotations act
/// orthogonally in this basis, so the operator-2 radius agrees with the
/// singular-value radius exactly.
pub fn ad_matrix(g: &Mat2R) -> [[f64; 3]; 3] {
    let s2 = std::f64::consts::SQRT_2;
    // images of the basis under X -> g X g^{-1}
    let basis = [
        Mat2R { a: 1.0 / s2, b: 0.0, c: 0.0, d: -1.0 / s2 },
        Mat2R { a: 0.0, b: 1.0, c: 0.0, d: 0.0 },
        Mat2R { a: 0.0, b: 0.0, c: 1.0, d: 0.0 },
    ];
    let gi = g.inv();
    let mut m = [[0.0; 3]; 3];
    for (j, x) in basis.iter().enumerate() {
        let y = g.mul(x).mul(&gi);
        // coordinates: y = y11 * H + y12 * E + y21 * F, H-coeff on the
        // normalized basis picks up sqrt(2)
        m[0][j] = y.a * s2;
        m[1][j] = y.b;
        m[2][j] = y.c;
    }
    m
}

fn mat_t_mat(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out[i][j] += m[k][i] * m[k][j];
            }
        }
    }
    out
}

/// Largest singular value by power iteration on `M^T M`.
pub fn op2_norm(m: &[[f64; 3]; 3]) -> f64 {
    let a = mat_t_mat(m);
    let mut v = [1.0f64, 1.0, 1.0];
    let mut lambda = 0.0;
    for _ in 0..200 {
        let mut w = [0.0f64; 3];
        for i in 0..3 {
            for j in 0..3 {
                w[i] += a[i][j] * v[j];
            }
        }
        let norm = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        if (next - lambda).abs() < 1e-14 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}

pub fn maxabs_norm(m: &[[f64; 3]; 3]) -> f64 {
    m.iter()
        .flatten()
        .fold(0.0f64, |acc, &x| acc.max(x.abs()))
}

/// Radius from the operator-2 norm of the adjoint.
pub fn radius_op2(g: &Mat2R) -> f64 {
    let f = op2_norm(&ad_matrix(g)).max(op2_norm(&ad_matrix(&g.inv())));
    f.max(1.0).ln()
}

/// Radius from the entrywise-max norm of the adjoint.
pub fn radius_maxabs(g: &Mat2R) -> f64 {
    let f = maxabs_norm(&ad_matrix(g)).max(maxabs_norm(&ad_matrix(&g.inv())));
    f.max(1.0).ln()
}

/// `max <= op2 <= 3 max` on 3x3 matrices, so the two radii differ by at
/// most `ln 3`.
pub fn norm_shift_bound() -> f64 {
    3.0f64.ln()
}

/// Random group elements for sandwich sampling.
pub fn sample_elements(seed: u64, count: usize) -> Vec<Mat2R> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let phi1: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let phi2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let x: f64 = rng.gen_range(0.0..6.0);
            let u: f64 = rng.gen_range(-2.0..2.0);
            Mat2R::rotation(phi1)
                .mul(&Mat2R::torus(x.exp()))
                .mul(&Mat2R::rotation(phi2))
                .mul(&Mat2R::upper(u))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sl2::radius;

    #[test]
    fn op2_radius_matches_singular_radius() {
        let g = Mat2R::rotation(0.4).mul(&Mat2R::torus(3.0)).mul(&Mat2R::rotation(-1.1));
        assert!((radius_op2(&g) - radius(&g)).abs() < 1e-9);
        assert!(radius_op2(&Mat2R::rotation(1.0)).abs() < 1e-9);
    }

    #[test]
    fn torus_adjoint_is_diagonal() {
        let m = ad_matrix(&Mat2R::torus(2.0));
        assert!((m[0][0] - 1.0).abs() < 1e-12);
        assert!((m[1][1] - 4.0).abs() < 1e-12);
        assert!((m[2][2] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn radii_within_shift_bound() {
        for g in sample_elements(3, 200) {
            let d = (radius_op2(&g) - radius_maxabs(&g)).abs();
            assert!(d <= norm_shift_bound() + 1e-9, "difference {d}");
        }
    }
}
