//! Growth-degree estimation from ball-integral samples.

use crate::error::{Error, Result};
use serde::Serialize;

/// Result of fitting `M(R) ~ constant * R^degree`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthFit {
    pub degree: u32,
    pub constant: f64,
    /// Relative root-mean-square residual of the winning model.
    pub residual: f64,
}

/// Width of the averaging window applied before fitting.
///
/// Raw ball integrals carry bounded oscillatory terms; averaging the
/// samples over windows of this width in `R` suppresses them.
pub const CESARO_WINDOW: f64 = 4.0;

/// Averages samples into windows `[R0, R0 + window]` keyed by the first
/// sample of each window. Samples must be sorted by `R`.
pub fn cesaro_windows(samples: &[(f64, f64)], window: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < samples.len() {
        let r0 = samples[i].0;
        let mut j = i;
        let (mut sr, mut sm, mut cnt) = (0.0, 0.0, 0.0);
        while j < samples.len() && samples[j].0 <= r0 + window + 1e-9 {
            sr += samples[j].0;
            sm += samples[j].1;
            cnt += 1.0;
            j += 1;
        }
        out.push((sr / cnt, sm / cnt));
        i = j;
    }
    out
}

/// Least-squares fit of `M ~ C * R^d` over `d in {0, 1, 2}` on
/// window-averaged samples.
///
/// Requires at least 4 samples spanning a factor of 4 in `R`; rejects
/// all-zero data.
pub fn fit_growth(samples: &[(f64, f64)]) -> Result<GrowthFit> {
    if samples.len() < 4 {
        return Err(Error::invalid("fit_growth needs at least 4 samples"));
    }
    let mut sorted: Vec<(f64, f64)> = samples.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (rmin, rmax) = (sorted.first().unwrap().0, sorted.last().unwrap().0);
    if !(rmin > 0.0) || rmax < 4.0 * rmin {
        return Err(Error::invalid(
            "fit_growth samples must span a factor >= 4 in R",
        ));
    }
    let windowed = cesaro_windows(&sorted, CESARO_WINDOW);
    let msq: f64 = windowed.iter().map(|&(_, m)| m * m).sum();
    if msq == 0.0 {
        return Err(Error::Degenerate("all ball-integral samples are zero".into()));
    }
    let mut best: Option<GrowthFit> = None;
    for d in 0u32..=2 {
        let (mut num, mut den) = (0.0, 0.0);
        for &(r, m) in &windowed {
            let rd = r.powi(d as i32);
            num += m * rd;
            den += rd * rd;
        }
        let c = num / den;
        let resid: f64 = windowed
            .iter()
            .map(|&(r, m)| {
                let e = m - c * r.powi(d as i32);
                e * e
            })
            .sum();
        let rel = (resid / msq).sqrt();
        if best.map_or(true, |b| rel < b.residual) {
            best = Some(GrowthFit {
                degree: d,
                constant: c,
                residual: rel,
            });
        }
    }
    let fit = best.unwrap();
    if fit.constant <= 0.0 {
        return Err(Error::Degenerate(format!(
            "fitted constant {} is not positive",
            fit.constant
        )));
    }
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_model_recovered() {
        let samples: Vec<(f64, f64)> = (0..=30).map(|i| {
            let r = 50.0 + 12.0 * i as f64;
            (r, 3.0 * r)
        }).collect();
        let fit = fit_growth(&samples).unwrap();
        assert_eq!(fit.degree, 1);
        assert!((fit.constant - 3.0).abs() < 1e-9);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn constant_model_recovered() {
        let samples: Vec<(f64, f64)> = (0..=20).map(|i| (20.0 + 10.0 * i as f64, 5.0)).collect();
        let fit = fit_growth(&samples).unwrap();
        assert_eq!(fit.degree, 0);
        assert!((fit.constant - 5.0).abs() < 1e-9);
    }

    #[test]
    fn oscillation_smoothed_out() {
        // degree-1 growth plus a bounded oscillation
        let samples: Vec<(f64, f64)> = (0..=350)
            .map(|i| {
                let r = 50.0 + i as f64;
                (r, 2.0 * r + 20.0 * (2.0 * r).sin())
            })
            .collect();
        let fit = fit_growth(&samples).unwrap();
        assert_eq!(fit.degree, 1);
        assert!((fit.constant - 2.0).abs() < 0.05);
    }

    #[test]
    fn degenerate_rejected() {
        let samples: Vec<(f64, f64)> = (1..=10).map(|i| (10.0 * i as f64, 0.0)).collect();
        assert!(fit_growth(&samples).is_err());
    }
}
