//! Prediction-error series, their empirical CDFs and percentiles.
//!
//! Percentiles use the same rank convention as the fading CDF: the k-th of N
//! sorted values sits at `100 k / (N - 1)`, with linear interpolation in
//! between. The 50th percentile is therefore the usual sample median.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::PropagationModel;
use crate::dataset::PositionPair;
use crate::error::{Error, Result};
use crate::fading::percentile_ranks;
use crate::linksim::SimResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    /// Propagation loss, dB.
    Loss,
    /// Throughput, Mbit/s.
    Throughput,
}

impl ErrorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorKind::Loss => "loss",
            ErrorKind::Throughput => "throughput",
        }
    }
}

/// Signed errors `predicted - reference`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    pub values: Vec<f64>,
    pub kind: ErrorKind,
    pub label: String,
}

impl ErrorSeries {
    pub fn new(values: Vec<f64>, kind: ErrorKind, label: impl Into<String>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "error value {i} is not finite: {}",
                values[i]
            )));
        }
        Ok(Self {
            values,
            kind,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn absolute(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.abs()).collect()
    }

    pub fn mse(&self) -> Result<f64> {
        nonempty(&self.values)?;
        Ok(self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64)
    }

    pub fn median_abs(&self) -> Result<f64> {
        percentile(&self.absolute(), 50.0)
    }

    /// Share of errors strictly below zero.
    pub fn fraction_negative(&self) -> f64 {
        self.values.iter().filter(|&&v| v < 0.0).count() as f64 / self.values.len().max(1) as f64
    }
}

fn nonempty(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::validation("error series is empty"));
    }
    Ok(())
}

/// `total_loss(pair) - loss` for every test row, one fading draw each.
pub fn loss_errors(
    model: &mut PropagationModel,
    test: &[(PositionPair, f64)],
    label: impl Into<String>,
) -> Result<ErrorSeries> {
    nonempty_rows(test)?;
    let values = test
        .iter()
        .map(|(pair, loss)| Ok(model.total_loss(pair)? - loss))
        .collect::<Result<Vec<_>>>()?;
    ErrorSeries::new(values, ErrorKind::Loss, label)
}

fn nonempty_rows<T>(rows: &[T]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::validation("test set is empty"));
    }
    Ok(())
}

/// Empirical CDF points `(value, percentile)` of the series or of its
/// absolute values.
pub fn error_cdf(series: &ErrorSeries, absolute: bool) -> Result<Vec<(f64, f64)>> {
    nonempty(&series.values)?;
    let mut v = if absolute {
        series.absolute()
    } else {
        series.values.clone()
    };
    v.sort_by(f64::total_cmp);
    Ok(percentile_ranks(&v))
}

/// `p`-th percentile (0..=100) of `values` under the rank convention above.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    nonempty(values)?;
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::validation(format!(
            "percentile {p} outside [0, 100]"
        )));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = p / 100.0 * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

/// Fraction of `values` that are `<= x`.
pub fn ecdf_at(values: &[f64], x: f64) -> f64 {
    values.iter().filter(|&&v| v <= x).count() as f64 / values.len().max(1) as f64
}

/// Simulated minus reference throughput per simulated pair.
pub fn throughput_errors(
    sim: &SimResult,
    reference: &[(PositionPair, f64)],
    label: impl Into<String>,
) -> Result<ErrorSeries> {
    let lookup: HashMap<PositionPair, f64> = reference.iter().copied().collect();
    let mut missing = Vec::new();
    let mut values = Vec::with_capacity(sim.records.len());
    for r in &sim.records {
        match lookup.get(&r.pair) {
            Some(t) => values.push(r.throughput_mbps - t),
            None => missing.push(r.pair.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::validation(format!(
            "no reference throughput for {} simulated pair(s): {}",
            missing.len(),
            missing.join("; ")
        )));
    }
    ErrorSeries::new(values, ErrorKind::Throughput, label)
}

/// CDF points as CSV `value,percentile` under a `# model=..,kind=..,seed=..`
/// comment line.
pub fn cdf_csv(points: &[(f64, f64)], label: &str, kind: ErrorKind, seed: u64) -> String {
    let mut s = String::new();
    writeln!(s, "# model={label},kind={},seed={seed}", kind.as_str()).unwrap();
    s.push_str("value,percentile\n");
    for (x, y) in points {
        writeln!(s, "{x:.16e},{y:.16e}").unwrap();
    }
    s
}

pub fn write_cdf_csv(
    points: &[(f64, f64)],
    label: &str,
    kind: ErrorKind,
    seed: u64,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, cdf_csv(points, label, kind, seed)).map_err(|e| Error::io(path, e))
}
