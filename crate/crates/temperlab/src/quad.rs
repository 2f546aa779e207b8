//! Shared quadrature and summation utilities.

use crate::error::{Error, Result};

/// Compensated (Kahan) accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Adaptive Simpson on `[a, b]`.
///
/// Mixed absolute/relative control: recursion stops when the local error
/// estimate is below `tol * max(1, |whole|)` scaled by interval share.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol * (1.0 + (left + right).abs()) {
        left + right + err / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson with a purely absolute error budget, halved per split.
pub fn adaptive_simpson_abs<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol_abs: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_abs_rec(f, a, b, fa, fm, fb, whole, tol_abs, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_abs_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        left + right + err / 15.0
    } else {
        simpson_abs_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_abs_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// 16-point Gauss-Legendre nodes and weights on `[-1, 1]`.
pub const GL16_NODES: [f64; 16] = [
    -0.9894009349916499,
    -0.9445750230732326,
    -0.8656312023878318,
    -0.7554044083550030,
    -0.6178762444026438,
    -0.4580167776572274,
    -0.2816035507792589,
    -0.0950125098376374,
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.7554044083550030,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];

pub const GL16_WEIGHTS: [f64; 16] = [
    0.0271524594117541,
    0.0622535239386479,
    0.0951585116824928,
    0.1246289712555339,
    0.1495959888165767,
    0.1691565193950025,
    0.1826034150449236,
    0.1894506104550685,
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

/// Composite 16-point Gauss-Legendre over panels of width `<= panel`.
pub fn gl16_composite<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panel: f64) -> f64 {
    let n = (((b - a) / panel).ceil() as usize).max(1);
    let h = (b - a) / n as f64;
    let mut acc = Kahan::new();
    for i in 0..n {
        let lo = a + i as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        for (x, w) in GL16_NODES.iter().zip(GL16_WEIGHTS.iter()) {
            acc.add(w * half * f(mid + half * x));
        }
    }
    acc.value()
}

/// Composite GL16 with one halving pass; errors out if the two refinement
/// levels disagree beyond `rtol`.
pub fn gl16_checked<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panel: f64, rtol: f64) -> Result<f64> {
    let coarse = gl16_composite(f, a, b, panel);
    let fine = gl16_composite(f, a, b, 0.5 * panel);
    let scale = 1.0 + fine.abs();
    if (fine - coarse).abs() <= rtol * scale {
        Ok(fine)
    } else {
        Err(Error::NonConvergence(format!(
            "composite quadrature on [{a}, {b}]: refinement moved by {:.3e}",
            (fine - coarse).abs()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_handles_small_increments() {
        let mut k = Kahan::new();
        for _ in 0..1_000_000 {
            k.add(1e-10);
        }
        assert!((k.value() - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn simpson_polynomial_is_exact() {
        let v = adaptive_simpson(&|x: f64| x * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 4.0).abs() < 1e-10);
    }

    #[test]
    fn gl16_oscillatory() {
        let v = gl16_composite(&|x: f64| (10.0 * x).cos(), 0.0, 1.0, 0.25);
        assert!((v - 10.0f64.sin() / 10.0).abs() < 1e-12);
    }
}
