//! Wall-clock benchmark of propagation models with the path-loss cache on
//! and off.

use std::time::Instant;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{run_scenario, LinkSimConfig, PairResult};
use crate::channel::{PropagationModel, DEFAULT_CAPACITY, DEFAULT_QUANTUM_M};
use crate::dataset::PositionPair;
use crate::error::{Error, Result};

/// A model under test. `build` receives the repetition seed and must return
/// a fresh model.
pub struct BenchCase<'a> {
    pub label: String,
    pub build: Box<dyn Fn(u64) -> Result<PropagationModel> + 'a>,
}

impl<'a> BenchCase<'a> {
    pub fn new(
        label: impl Into<String>,
        build: impl Fn(u64) -> Result<PropagationModel> + 'a,
    ) -> Self {
        Self {
            label: label.into(),
            build: Box::new(build),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub label: String,
    pub cache: bool,
    pub durations_s: Vec<f64>,
    pub mean_s: f64,
    /// Half-width of the Student-t 95% confidence interval of the mean.
    pub ci95_s: f64,
    pub mean_throughput_mbps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Per case: simulated outcomes identical with and without the cache.
    pub transparent: Vec<(String, bool)>,
}

impl BenchReport {
    /// Mean cache-off duration over mean cache-on duration for `label`.
    pub fn speedup(&self, label: &str) -> Option<f64> {
        let mean = |cache| {
            self.rows
                .iter()
                .find(|r| r.label == label && r.cache == cache)
                .map(|r| r.mean_s)
        };
        Some(mean(false)? / mean(true)?)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("model,cache,repetitions,mean_s,ci95_s,mean_throughput_mbps\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{:.6},{:.6},{:.4}\n",
                r.label,
                if r.cache { "on" } else { "off" },
                r.durations_s.len(),
                r.mean_s,
                r.ci95_s,
                r.mean_throughput_mbps
            ));
        }
        s
    }
}

/// Sample mean and Student-t 95% CI half-width. Needs at least two values.
pub fn mean_ci95(values: &[f64]) -> Result<(f64, f64)> {
    let n = values.len();
    if n < 2 {
        return Err(Error::validation(
            "a confidence interval needs at least 2 repetitions",
        ));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .map_err(|e| Error::validation(e.to_string()))?
        .inverse_cdf(0.975);
    Ok((mean, t * (var / n as f64).sqrt()))
}

/// Runs every case `repetitions` times with the cache disabled and enabled.
/// Repetition `r` uses seed `cfg.seed + r` for both the model and the link.
pub fn benchmark(
    pairs: &[PositionPair],
    cases: &[BenchCase<'_>],
    cfg: &LinkSimConfig,
    repetitions: usize,
) -> Result<BenchReport> {
    if repetitions < 2 {
        return Err(Error::validation(
            "benchmark needs repetitions >= 2 for a confidence interval",
        ));
    }
    let mut rows = Vec::new();
    let mut transparent = Vec::new();
    for case in cases {
        let mut outcomes: [Vec<Vec<PairResult>>; 2] = [Vec::new(), Vec::new()];
        for (slot, cache) in [false, true].into_iter().enumerate() {
            let mut durations = Vec::with_capacity(repetitions);
            let mut throughput = 0.0;
            for r in 0..repetitions {
                let seed = cfg.seed.wrapping_add(r as u64);
                let mut model = (case.build)(seed)?;
                let capacity = if cache { DEFAULT_CAPACITY } else { 0 };
                model.cache_configure(capacity, DEFAULT_QUANTUM_M)?;
                let run_cfg = LinkSimConfig {
                    seed,
                    ..cfg.clone()
                };
                let start = Instant::now();
                let res = run_scenario(pairs, &mut model, &run_cfg)?;
                durations.push(start.elapsed().as_secs_f64());
                throughput += res.mean_throughput() / repetitions as f64;
                outcomes[slot].push(res.records);
            }
            let (mean_s, ci95_s) = mean_ci95(&durations)?;
            rows.push(BenchRow {
                label: case.label.clone(),
                cache,
                durations_s: durations,
                mean_s,
                ci95_s,
                mean_throughput_mbps: throughput,
            });
        }
        transparent.push((case.label.clone(), outcomes[0] == outcomes[1]));
    }
    Ok(BenchReport { rows, transparent })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ci_matches_hand_computation() {
        // mean 2, sample sd 1, n 3, t(0.975, 2) = 4.302653
        let (m, h) = mean_ci95(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m, 2.0);
        assert!((h - 4.302653 / 3f64.sqrt()).abs() < 1e-5);
        assert!(mean_ci95(&[1.0]).is_err());
    }
}
