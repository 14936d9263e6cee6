//! Path-loss regressors over ordered 6-dimensional position features.
//!
//! Two learners are provided: gradient-boosted regression trees
//! ([`GbrtModel`]) and epsilon-SVR with an RBF kernel ([`SvrModel`]). Both are
//! trained on `(FeatureVector, path loss dB)` rows and serialized with
//! [`save_model`] / [`load_model`].
//!
//! Training rows with identical features and identical targets are merged
//! into a single weighted row before fitting. For squared-error boosting and
//! for the epsilon-SVR dual (where the box bound scales with the weight) this
//! gives exactly the same model as fitting the repeated rows.

mod format;
mod gbrt;
mod search;
mod svr;

use std::collections::BTreeMap;

pub use format::{load_model, read_model, save_model, write_model, FORMAT_VERSION, MAGIC};
pub use gbrt::{train_gbrt, GbrtModel, GbrtParams, Node, Tree};
pub use search::{cross_validate, fold_labels, grid_search_svr, FoldPolicy, GridResult, SvrGrid};
pub use svr::{train_svr, GammaMode, SvrModel, SvrParams};

use crate::dataset::PositionPair;
use crate::error::{Error, Result};

/// Number of features: transmitter then receiver coordinates.
pub const N_FEATURES: usize = 6;

/// `[tx.x, tx.y, tx.z, rx.x, rx.y, rx.z]` in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; N_FEATURES]);

impl FeatureVector {
    pub fn values(&self) -> &[f64; N_FEATURES] {
        &self.0
    }
}

impl From<PositionPair> for FeatureVector {
    fn from(p: PositionPair) -> Self {
        FeatureVector(p.coords())
    }
}

impl From<&PositionPair> for FeatureVector {
    fn from(p: &PositionPair) -> Self {
        FeatureVector(p.coords())
    }
}

/// Converts `(pair, target)` rows to feature rows.
pub fn feature_rows(rows: &[(PositionPair, f64)]) -> Vec<(FeatureVector, f64)> {
    rows.iter()
        .map(|(p, y)| (FeatureVector::from(p), *y))
        .collect()
}

/// A trained path-loss regressor.
#[derive(Debug, Clone, PartialEq)]
pub enum PathLossRegressor {
    Gbrt(GbrtModel),
    Svr(SvrModel),
}

impl PathLossRegressor {
    pub fn predict(&self, v: &FeatureVector) -> f64 {
        match self {
            PathLossRegressor::Gbrt(m) => m.predict(v),
            PathLossRegressor::Svr(m) => m.predict(v),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            PathLossRegressor::Gbrt(_) => "gbrt",
            PathLossRegressor::Svr(_) => "svr",
        }
    }
}

impl From<GbrtModel> for PathLossRegressor {
    fn from(m: GbrtModel) -> Self {
        PathLossRegressor::Gbrt(m)
    }
}

impl From<SvrModel> for PathLossRegressor {
    fn from(m: SvrModel) -> Self {
        PathLossRegressor::Svr(m)
    }
}

/// Mean squared error `(1/N) * sum (P_i - P^_i)^2` of a regressor on a test set.
pub fn evaluate_mse(model: &PathLossRegressor, test: &[(FeatureVector, f64)]) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::validation("evaluate_mse needs a non-empty test set"));
    }
    let sse: f64 = test
        .iter()
        .map(|(x, y)| (y - model.predict(x)).powi(2))
        .sum();
    Ok(sse / test.len() as f64)
}

/// A training row with a multiplicity.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WeightedRow {
    pub x: [f64; N_FEATURES],
    pub y: f64,
    pub weight: f64,
}

/// Merges rows that share both feature and target bit patterns, keeping the
/// order of first appearance.
pub(crate) fn merge_duplicates(rows: &[(FeatureVector, f64)]) -> Vec<WeightedRow> {
    let mut index: BTreeMap<[u64; N_FEATURES + 1], usize> = BTreeMap::new();
    let mut out: Vec<WeightedRow> = Vec::new();
    for (x, y) in rows {
        let mut key = [0u64; N_FEATURES + 1];
        for (k, v) in key.iter_mut().zip(x.0.iter().chain(std::iter::once(y))) {
            *k = if *v == 0.0 { 0 } else { v.to_bits() };
        }
        match index.get(&key) {
            Some(&i) => out[i].weight += 1.0,
            None => {
                index.insert(key, out.len());
                out.push(WeightedRow {
                    x: x.0,
                    y: *y,
                    weight: 1.0,
                });
            }
        }
    }
    out
}

pub(crate) fn validate_rows(rows: &[(FeatureVector, f64)]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::validation("training set is empty"));
    }
    if rows
        .iter()
        .any(|(x, y)| !y.is_finite() || x.0.iter().any(|v| !v.is_finite()))
    {
        return Err(Error::validation("training rows must be finite"));
    }
    Ok(())
}
