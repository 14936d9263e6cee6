//! End-to-end checks against the vendored example files: known position
//! pairs are pushed through the full P-MLPL chain with the fading draw
//! pinned to the CDF median and compared with their recorded loss.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::channel::PropagationModel;
use crate::dataset::{derive_losses, load_dataset, Position, PositionPair};
use crate::error::{Error, Result};
use crate::fading::{import_cdf, FadingCdf};
use crate::linksim::{airtime, run_scenario, LinkSimConfig};
use crate::regress::{load_model, FeatureVector, PathLossRegressor};

pub const DATASET_FILE: &str = "example-dataset.csv";
pub const BUDGET_FILE: &str = "example-budget.json";
pub const MODEL_FILE: &str = "example-model.bin";
pub const CDF_FILE: &str = "example-fading.csv";
pub const KNOWN_PAIRS_FILE: &str = "known-pairs.csv";
pub const KNOWN_PAIRS_HEADER: &str = "tx_x,tx_y,tx_z,rx_x,rx_y,rx_z,loss_db";
/// Percentile of the pinned fading draw.
pub const PINNED_PERCENTILE: f64 = 50.0;
pub const KNOWN_PAIR_TOLERANCE_DB: f64 = 0.5;

pub fn default_data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            s.push_str(&format!("{tag} {}: {}\n", c.name, c.detail));
        }
        let n_failed = self.failed().len();
        s.push_str(&format!(
            "{} of {} checks passed\n",
            self.checks.len() - n_failed,
            self.checks.len()
        ));
        s
    }

    fn record<T>(&mut self, name: &'static str, r: Result<(T, String)>) -> Option<T> {
        match r {
            Ok((v, detail)) => {
                self.checks.push(Check {
                    name,
                    passed: true,
                    detail,
                });
                Some(v)
            }
            Err(e) => {
                self.checks.push(Check {
                    name,
                    passed: false,
                    detail: e.to_string(),
                });
                None
            }
        }
    }

    fn skip(&mut self, name: &'static str, why: &str) {
        self.checks.push(Check {
            name,
            passed: false,
            detail: format!("not run: {why}"),
        });
    }
}

/// Known pairs with their recorded loss (path loss plus the pinned draw).
pub fn read_known_pairs(path: &Path) -> Result<Vec<(PositionPair, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(KNOWN_PAIRS_HEADER) {
        return Err(Error::Parse {
            path: path.into(),
            row: 1,
            message: format!("expected header {KNOWN_PAIRS_HEADER}"),
        });
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let v: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                path: path.into(),
                row: i + 2,
                message: e.to_string(),
            })?;
        if v.len() != 7 {
            return Err(Error::Parse {
                path: path.into(),
                row: i + 2,
                message: format!("expected 7 fields, found {}", v.len()),
            });
        }
        let pair = PositionPair::new(
            Position::new(v[0], v[1], v[2]),
            Position::new(v[3], v[4], v[5]),
        );
        out.push((pair, v[6]));
    }
    if out.is_empty() {
        return Err(Error::validation(format!(
            "{}: no known pairs",
            path.display()
        )));
    }
    Ok(out)
}

/// Loss of `pair` through the model with the fading draw pinned.
pub fn pinned_loss(model: &PathLossRegressor, cdf: &FadingCdf, pair: &PositionPair) -> f64 {
    model.predict(&FeatureVector::from(pair)) + cdf.inverse(PINNED_PERCENTILE)
}

pub fn run_selftest(dir: &Path) -> SelftestReport {
    let mut report = SelftestReport::default();

    report.record(
        "example dataset parses",
        (|| {
            let (raw, budget) = load_dataset(dir.join(DATASET_FILE), Some(&dir.join(BUDGET_FILE)))?;
            let losses = derive_losses(&raw, budget.as_ref())?;
            Ok(((), format!("{} samples", losses.len())))
        })(),
    );

    let model = report.record(
        "model file loads",
        load_model(dir.join(MODEL_FILE)).map(|m| {
            let d = format!("{} model", m.kind());
            (m, d)
        }),
    );
    let cdf = report.record(
        "fading CDF loads",
        import_cdf(dir.join(CDF_FILE)).map(|c| {
            let d = format!(
                "{} points, median {:.3} dB",
                c.points().len(),
                c.inverse(50.0)
            );
            (c, d)
        }),
    );
    let known = report.record(
        "known pairs file parses",
        read_known_pairs(&dir.join(KNOWN_PAIRS_FILE)).map(|k| {
            let d = format!("{} pairs", k.len());
            (k, d)
        }),
    );

    report.record(
        "airtime constants",
        (|| {
            let t = airtime(54, 1400)?;
            if t != 385.5 {
                return Err(Error::validation(format!(
                    "airtime(54, 1400) = {t} us, expected 385.5"
                )));
            }
            Ok(((), "54 Mbit/s, 1400 B exchange = 385.5 us".to_string()))
        })(),
    );

    let (Some(model), Some(cdf), Some(known)) = (model, cdf, known) else {
        report.skip(
            "known pairs within tolerance",
            "model, CDF or known pairs unavailable",
        );
        report.skip(
            "deterministic replay",
            "model, CDF or known pairs unavailable",
        );
        return report;
    };

    report.record(
        "known pairs within tolerance",
        (|| {
            let mut worst = 0.0f64;
            let mut bad = Vec::new();
            for (pair, recorded) in &known {
                let diff = (pinned_loss(&model, &cdf, pair) - recorded).abs();
                worst = worst.max(diff);
                if !(diff <= KNOWN_PAIR_TOLERANCE_DB) {
                    bad.push(format!("{pair}: off by {diff:.3} dB"));
                }
            }
            if !bad.is_empty() {
                return Err(Error::validation(format!(
                    "{} of {} pairs exceed {KNOWN_PAIR_TOLERANCE_DB} dB; first: {}",
                    bad.len(),
                    known.len(),
                    bad[0]
                )));
            }
            Ok(((), format!("{} pairs, worst {worst:.4} dB", known.len())))
        })(),
    );

    let model = Arc::new(model);
    let cdf = Arc::new(cdf);
    report.record(
        "deterministic replay",
        (|| {
            let pairs: Vec<PositionPair> = known.iter().take(2).map(|(p, _)| *p).collect();
            let cfg = LinkSimConfig {
                warmup_s: 0.1,
                measure_s: 0.2,
                seed: 7,
                ..Default::default()
            };
            let run = || -> Result<_> {
                let mut m = PropagationModel::pmlpl(model.clone(), cdf.clone(), 7, 0);
                Ok(run_scenario(&pairs, &mut m, &cfg)?.records)
            };
            if run()? != run()? {
                return Err(Error::validation("two runs with the same seed differ"));
            }
            Ok((
                (),
                format!("{} pairs simulated twice, identical", pairs.len()),
            ))
        })(),
    );
    report
}
