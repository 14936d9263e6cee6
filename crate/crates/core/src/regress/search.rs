//! Small grid search with k-fold cross-validation.
//!
//! Folds are drawn either per sample, mirroring the dataset's train/test
//! split (test samples come from pairs also seen in training), or per
//! position pair, which scores generalization to unseen positions.

use std::collections::BTreeMap;

use super::{evaluate_mse, FeatureVector, GammaMode, PathLossRegressor, SvrParams, N_FEATURES};
use crate::error::{Error, Result};
use crate::rng::{Purpose, StreamRng};

#[derive(Debug, Clone, PartialEq)]
pub struct SvrGrid {
    pub c: Vec<f64>,
    pub gamma: Vec<GammaMode>,
    pub epsilon: Vec<f64>,
}

impl Default for SvrGrid {
    fn default() -> Self {
        Self {
            c: vec![1.0, 10.0, 100.0],
            gamma: vec![
                GammaMode::Scale,
                GammaMode::Value(4.0 / N_FEATURES as f64),
                GammaMode::Value(16.0 / N_FEATURES as f64),
            ],
            epsilon: vec![0.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult<P> {
    pub best: P,
    pub best_mse: f64,
    /// Every candidate with its mean validation MSE, in grid order.
    pub scores: Vec<(P, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FoldPolicy {
    #[default]
    Samples,
    Pairs,
}

/// Fold index of every row.
pub fn fold_labels(
    rows: &[(FeatureVector, f64)],
    k: usize,
    seed: u64,
    policy: FoldPolicy,
) -> Result<Vec<usize>> {
    let mut groups: BTreeMap<[u64; N_FEATURES + 1], usize> = BTreeMap::new();
    let keys: Vec<[u64; N_FEATURES + 1]> = rows
        .iter()
        .enumerate()
        .map(|(i, (x, _))| {
            let mut key = [0; N_FEATURES + 1];
            key[..N_FEATURES].copy_from_slice(&x.0.map(f64::to_bits));
            if policy == FoldPolicy::Samples {
                key[N_FEATURES] = i as u64;
            }
            key
        })
        .collect();
    for key in &keys {
        let n = groups.len();
        groups.entry(*key).or_insert(n);
    }
    if k < 2 || groups.len() < k {
        return Err(Error::validation(format!(
            "{k}-fold cross-validation needs k >= 2 and at least k groups ({} found)",
            groups.len()
        )));
    }
    let mut order: Vec<usize> = (0..groups.len()).collect();
    let mut rng = StreamRng::new(seed, 0, Purpose::Split, 1);
    for i in (1..order.len()).rev() {
        order.swap(i, rng.index(i + 1));
    }
    let mut fold_of_group = vec![0; order.len()];
    for (pos, &g) in order.iter().enumerate() {
        fold_of_group[g] = pos % k;
    }
    Ok(keys.iter().map(|key| fold_of_group[groups[key]]).collect())
}

/// Mean validation MSE of `fit` over `k` folds.
pub fn cross_validate(
    rows: &[(FeatureVector, f64)],
    k: usize,
    seed: u64,
    policy: FoldPolicy,
    fit: impl Fn(&[(FeatureVector, f64)]) -> Result<PathLossRegressor>,
) -> Result<f64> {
    let folds = fold_labels(rows, k, seed, policy)?;
    let mut total = 0.0;
    for f in 0..k {
        let (mut train, mut valid) = (Vec::new(), Vec::new());
        for (row, &fold) in rows.iter().zip(&folds) {
            if fold == f {
                valid.push(*row);
            } else {
                train.push(*row);
            }
        }
        total += evaluate_mse(&fit(&train)?, &valid)?;
    }
    Ok(total / k as f64)
}

/// Picks SVR hyperparameters by k-fold cross-validation. Ties keep the
/// earlier candidate.
pub fn grid_search_svr(
    rows: &[(FeatureVector, f64)],
    base: &SvrParams,
    grid: &SvrGrid,
    k: usize,
    seed: u64,
    policy: FoldPolicy,
) -> Result<GridResult<SvrParams>> {
    let mut scores = Vec::new();
    for &c in &grid.c {
        for &gamma in &grid.gamma {
            for &epsilon in &grid.epsilon {
                let p = SvrParams {
                    c,
                    gamma,
                    epsilon,
                    ..base.clone()
                };
                let mse = cross_validate(rows, k, seed, policy, |t| {
                    Ok(super::train_svr(t, &p)?.into())
                })?;
                scores.push((p, mse));
            }
        }
    }
    let (best, best_mse) = scores
        .iter()
        .fold(None::<&(SvrParams, f64)>, |acc, s| match acc {
            Some(a) if a.1 <= s.1 => Some(a),
            _ => Some(s),
        })
        .cloned()
        .ok_or_else(|| Error::validation("empty hyperparameter grid"))?;
    Ok(GridResult {
        best,
        best_mse,
        scores,
    })
}
