//! Fast-fading empirical CDF.
//!
//! The CDF is a list of `(x, y)` knots, `x` the fading loss in dB and `y` its
//! percentile rank in `[0, 100]`, linearly interpolated between knots.
//! Samples are drawn by inverse transform from a seeded [`StreamRng`].

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// Default number of knots kept when fitting a CDF for export.
pub const DEFAULT_MAX_POINTS: usize = 1024;

/// Number of equal-width bins used by [`cdf_fit_mse`].
pub const FIT_BINS: usize = 30;

pub const CSV_HEADER: &str = "fading_db,percentile";

#[derive(Debug, Clone, PartialEq)]
pub struct FadingCdf {
    points: Vec<(f64, f64)>,
}

impl FadingCdf {
    /// Validates and wraps a knot list: at least two knots, finite values,
    /// both coordinates non-decreasing, first percentile 0 and last 100.
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::validation("a fading CDF needs at least two points"));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::validation("fading CDF points must be finite"));
        }
        let (first, last) = (points[0].1, points[points.len() - 1].1);
        if first != 0.0 || last != 100.0 || points.iter().any(|p| !(0.0..=100.0).contains(&p.1)) {
            return Err(Error::validation(format!(
                "percentiles must span the range [0, 100] (first 0, last 100); found first {first}, last {last}"
            )));
        }
        for w in points.windows(2) {
            if w[1].1 < w[0].1 {
                return Err(Error::validation(format!(
                    "percentile decreases from {} to {}",
                    w[0].1, w[1].1
                )));
            }
            if w[1].0 < w[0].0 {
                return Err(Error::validation(format!(
                    "fading value decreases from {} to {}",
                    w[0].0, w[1].0
                )));
            }
        }
        Ok(Self { points })
    }

    /// Constant distribution at `value`: `[(value, 0), (value, 100)]`.
    pub fn degenerate(value: f64) -> Self {
        Self {
            points: vec![(value, 0.0), (value, 100.0)],
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn min(&self) -> f64 {
        self.points[0].0
    }

    pub fn max(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    /// Fading value at percentile `u` in `[0, 100]`.
    ///
    /// Takes the first knot whose percentile is `>= u`; an exact hit returns
    /// that knot (the leftmost of a flat run), otherwise the value is
    /// interpolated from the previous knot.
    pub fn inverse(&self, u: f64) -> f64 {
        let p = &self.points;
        let i = p.partition_point(|&(_, y)| y < u);
        if i == 0 {
            return p[0].0;
        }
        if i == p.len() {
            return p[p.len() - 1].0;
        }
        let (x1, y1) = p[i];
        if y1 == u {
            return x1;
        }
        let (x0, y0) = p[i - 1];
        x0 + (u - y0) / (y1 - y0) * (x1 - x0)
    }

    /// Cumulative fraction in `[0, 1]` at `x`. Right-continuous at vertical
    /// steps.
    pub fn cdf(&self, x: f64) -> f64 {
        let p = &self.points;
        if x < p[0].0 {
            return 0.0;
        }
        // first knot with x_i > x
        let i = p.partition_point(|&(xi, _)| xi <= x);
        if i == p.len() {
            return 1.0;
        }
        let (x0, y0) = p[i - 1];
        let (x1, y1) = p[i];
        (y0 + (x - x0) / (x1 - x0) * (y1 - y0)) / 100.0
    }

    /// Mean of the interpolated distribution.
    pub fn mean(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / 100.0 * (w[0].0 + w[1].0) / 2.0)
            .sum()
    }
}

/// Percentile rank of each element of a sorted slice: `100 * k / (n - 1)`.
pub fn percentile_ranks(sorted: &[f64]) -> Vec<(f64, f64)> {
    let n = sorted.len();
    if n == 1 {
        return vec![(sorted[0], 0.0), (sorted[0], 100.0)];
    }
    sorted
        .iter()
        .enumerate()
        .map(|(k, &x)| (x, 100.0 * k as f64 / (n - 1) as f64))
        .collect()
}

/// Fits the empirical CDF of `residuals`.
///
/// Knots are the sorted residuals at their percentile rank. With more than
/// `max_points` residuals, `max_points` evenly spaced order statistics are
/// kept, always including the minimum and maximum.
pub fn fit_cdf(residuals: &[f64], max_points: usize) -> Result<FadingCdf> {
    if residuals.len() < 2 {
        return Err(Error::validation(format!(
            "fitting a fading CDF needs at least 2 residuals, got {}",
            residuals.len()
        )));
    }
    if max_points < 2 {
        return Err(Error::validation("max_points must be at least 2"));
    }
    if residuals.iter().any(|r| !r.is_finite()) {
        return Err(Error::validation("fading residuals must be finite"));
    }
    let mut sorted = residuals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let ranks = percentile_ranks(&sorted);
    let n = ranks.len();
    let points = if n <= max_points {
        ranks
    } else {
        let m = max_points;
        (0..m)
            .map(|j| {
                let k = ((j as f64) * (n - 1) as f64 / (m - 1) as f64).round() as usize;
                ranks[k]
            })
            .collect()
    };
    FadingCdf::from_points(points)
}

/// Mean squared difference between the fitted CDF and the empirical CDF of
/// `residuals`, evaluated at the right edges of `n_bins` equal-width bins
/// spanning `[min, max]` of the residuals. Both sides are fractions in
/// `[0, 1]`. Returns 0 when all residuals are equal.
pub fn cdf_fit_mse(cdf: &FadingCdf, residuals: &[f64], n_bins: usize) -> Result<f64> {
    if residuals.is_empty() {
        return Err(Error::validation("cdf_fit_mse needs at least one residual"));
    }
    if n_bins == 0 {
        return Err(Error::validation("n_bins must be positive"));
    }
    let mut sorted = residuals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    if hi == lo {
        return Ok(0.0);
    }
    let width = (hi - lo) / n_bins as f64;
    let n = sorted.len() as f64;
    let sum: f64 = (1..=n_bins)
        .map(|b| {
            let edge = if b == n_bins {
                hi
            } else {
                lo + b as f64 * width
            };
            let empirical = sorted.partition_point(|&r| r <= edge) as f64 / n;
            (cdf.cdf(edge) - empirical).powi(2)
        })
        .sum();
    Ok(sum / n_bins as f64)
}

/// Writes `fading_db,percentile` rows with 17 significant digits.
pub fn export_cdf(cdf: &FadingCdf, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    writeln!(out, "{CSV_HEADER}").expect("write to vec");
    for (x, y) in cdf.points() {
        writeln!(out, "{x:.16e},{y:.16e}").expect("write to vec");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn import_cdf(path: impl AsRef<Path>) -> Result<FadingCdf> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header != ["fading_db", "percentile"] {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            row: 1,
            message: format!(
                "expected header `{CSV_HEADER}`, found `{}`",
                header.join(",")
            ),
        });
    }
    let mut points = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let row = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|c| c.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    row,
                    message: format!("column {} is not a number", i + 1),
                })
        };
        points.push((field(0)?, field(1)?));
    }
    FadingCdf::from_points(points)
        .map_err(|e| Error::validation(format!("{}: {e}", path.display())))
}

/// Inverse-transform sampler over a shared CDF.
#[derive(Debug, Clone)]
pub struct FadingSampler {
    cdf: Arc<FadingCdf>,
    rng: StreamRng,
}

impl FadingSampler {
    pub fn new(cdf: Arc<FadingCdf>, rng: StreamRng) -> Self {
        Self { cdf, rng }
    }

    pub fn cdf(&self) -> &FadingCdf {
        &self.cdf
    }

    /// One draw: `u` uniform in `[0, 100)` mapped through [`FadingCdf::inverse`].
    pub fn sample(&mut self) -> f64 {
        let u = self.rng.unit() * 100.0;
        self.cdf.inverse(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Purpose;

    fn three() -> FadingCdf {
        FadingCdf::from_points(vec![(-3.0, 0.0), (0.0, 50.0), (3.0, 100.0)]).unwrap()
    }

    #[test]
    fn fit_three_residuals() {
        let cdf = fit_cdf(&[3.0, -3.0, 0.0], DEFAULT_MAX_POINTS).unwrap();
        assert_eq!(cdf.points(), &[(-3.0, 0.0), (0.0, 50.0), (3.0, 100.0)]);
    }

    #[test]
    fn fit_constant_residuals() {
        let cdf = fit_cdf(&[5.0, 5.0], DEFAULT_MAX_POINTS).unwrap();
        assert_eq!(cdf.points(), &[(5.0, 0.0), (5.0, 100.0)]);
    }

    #[test]
    fn fit_needs_two_residuals() {
        assert!(fit_cdf(&[1.0], 10).is_err());
        assert!(fit_cdf(&[], 10).is_err());
    }

    #[test]
    fn downsampling_keeps_extremes() {
        let r: Vec<f64> = (0..1000).map(|i| (i as f64).sin() * 10.0).collect();
        let cdf = fit_cdf(&r, 17).unwrap();
        assert_eq!(cdf.points().len(), 17);
        let min = r.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(cdf.points()[0], (min, 0.0));
        assert_eq!(cdf.points()[16], (max, 100.0));
    }

    #[test]
    fn inverse_examples() {
        let cdf = three();
        assert_eq!(cdf.inverse(50.0), 0.0);
        assert_eq!(cdf.inverse(75.0), 1.5);
        assert_eq!(cdf.inverse(0.0), -3.0);
        let d = FadingCdf::degenerate(5.0);
        for u in [0.0, 13.0, 50.0, 99.999] {
            assert_eq!(d.inverse(u), 5.0);
        }
    }

    #[test]
    fn inverse_flat_run_returns_leftmost() {
        let cdf = FadingCdf::from_points(vec![(-1.0, 0.0), (0.0, 50.0), (2.0, 50.0), (4.0, 100.0)])
            .unwrap();
        assert_eq!(cdf.inverse(50.0), 0.0);
        assert!(cdf.inverse(50.0001) > 2.0);
    }

    #[test]
    fn forward_cdf() {
        let cdf = three();
        assert_eq!(cdf.cdf(-4.0), 0.0);
        assert_eq!(cdf.cdf(0.0), 0.5);
        assert_eq!(cdf.cdf(1.5), 0.75);
        assert_eq!(cdf.cdf(3.0), 1.0);
        assert_eq!(FadingCdf::degenerate(5.0).cdf(5.0), 1.0);
        assert_eq!(FadingCdf::degenerate(5.0).cdf(4.9), 0.0);
    }

    #[test]
    fn mean_of_symmetric_cdf() {
        assert_eq!(three().mean(), 0.0);
        assert_eq!(FadingCdf::degenerate(5.0).mean(), 5.0);
    }

    #[test]
    fn import_validation() {
        assert!(
            FadingCdf::from_points(vec![(0.0, 0.0), (1.0, 60.0), (2.0, 50.0), (3.0, 100.0)])
                .is_err()
        );
        let err = FadingCdf::from_points(vec![(0.0, 0.0), (1.0, 0.5), (2.0, 1.0)]).unwrap_err();
        assert!(err.to_string().contains("[0, 100]"), "{err}");
        assert!(FadingCdf::from_points(vec![(1.0, 0.0), (0.0, 100.0)]).is_err());
    }

    #[test]
    fn export_import_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let r: Vec<f64> = (0..500)
            .map(|i| ((i * 7919) % 1000) as f64 / 97.0 - 5.0)
            .collect();
        let cdf = fit_cdf(&r, 100).unwrap();
        let path = dir.path().join("cdf.csv");
        export_cdf(&cdf, &path).unwrap();
        assert_eq!(import_cdf(&path).unwrap(), cdf);
    }

    #[test]
    fn import_rejects_unit_percentiles() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cdf.csv");
        std::fs::write(&path, "fading_db,percentile\n-1,0\n0,0.5\n1,1\n").unwrap();
        let err = import_cdf(&path).unwrap_err();
        assert!(err.to_string().contains("[0, 100]"), "{err}");
        std::fs::write(&path, "fading_db,percentile\n-1,0\n0,70\n1,50\n2,100\n").unwrap();
        assert!(import_cdf(&path).is_err());
    }

    #[test]
    fn fit_mse_self_and_constant() {
        let r: Vec<f64> = (0..2000)
            .map(|i| ((i * 37) % 2000) as f64 / 100.0)
            .collect();
        let cdf = fit_cdf(&r, usize::MAX).unwrap();
        assert!(cdf_fit_mse(&cdf, &r, FIT_BINS).unwrap() <= 1e-6);
        assert_eq!(cdf_fit_mse(&cdf, &[1.0, 1.0], FIT_BINS).unwrap(), 0.0);
        assert!(cdf_fit_mse(&cdf, &[], FIT_BINS).is_err());
    }

    #[test]
    fn sampler_is_reproducible() {
        let cdf = Arc::new(three());
        let mk = || FadingSampler::new(cdf.clone(), StreamRng::new(5, 1, Purpose::Fading, 0));
        let (mut a, mut b) = (mk(), mk());
        for _ in 0..1000 {
            let v = a.sample();
            assert_eq!(v, b.sample());
            assert!((-3.0..=3.0).contains(&v));
        }
    }
}
