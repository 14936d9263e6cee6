//! Epsilon-SVR with an RBF kernel.
//!
//! The dual is solved with sequential minimal optimization using
//! second-order working-set selection (Fan, Chen and Lin, 2005), stopping when
//! the maximal KKT violation drops below the tolerance. Features are
//! standardized before the kernel is evaluated.

use std::collections::HashMap;

use super::{merge_duplicates, validate_rows, FeatureVector, WeightedRow, N_FEATURES};
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;
/// Largest training set for which the full kernel matrix is precomputed.
const FULL_KERNEL_LIMIT: usize = 4096;
const ROW_CACHE_ROWS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaMode {
    /// `1 / (n_features * variance of the standardized feature matrix)`.
    Scale,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    pub gamma: GammaMode,
    /// `None` means `10 * N^2` for `N` merged training rows.
    pub max_iterations: Option<u64>,
    pub tolerance: f64,
    /// Accepted for interface symmetry with the boosting learner; the solver is
    /// deterministic and draws no random numbers.
    pub seed: u64,
}

impl Default for SvrParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            epsilon: 0.1,
            gamma: GammaMode::Scale,
            max_iterations: None,
            tolerance: 1e-3,
            seed: 0,
        }
    }
}

/// Trained epsilon-SVR. Support vectors are stored in standardized
/// coordinates; queries are standardized with `feature_means` and
/// `feature_scales` before the kernel expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrModel {
    pub support_vectors: Vec<[f64; N_FEATURES]>,
    pub dual_coefficients: Vec<f64>,
    pub bias: f64,
    pub kernel_gamma: f64,
    pub feature_means: [f64; N_FEATURES],
    pub feature_scales: [f64; N_FEATURES],
    /// False when the solver hit `max_iterations` before reaching tolerance.
    pub converged: bool,
    pub iterations: u64,
}

impl SvrModel {
    pub fn standardize(&self, v: &FeatureVector) -> [f64; N_FEATURES] {
        std::array::from_fn(|f| (v.0[f] - self.feature_means[f]) / self.feature_scales[f])
    }

    pub fn predict(&self, v: &FeatureVector) -> f64 {
        let x = self.standardize(v);
        let mut sum = 0.0;
        for (sv, a) in self.support_vectors.iter().zip(&self.dual_coefficients) {
            sum += a * rbf(self.kernel_gamma, sv, &x);
        }
        sum + self.bias
    }

    pub fn validate(&self) -> Result<()> {
        if self.support_vectors.len() != self.dual_coefficients.len() {
            return Err(Error::ModelFormat(
                "support vector and coefficient counts differ".into(),
            ));
        }
        let finite = self.bias.is_finite()
            && self.kernel_gamma.is_finite()
            && self.kernel_gamma > 0.0
            && self.feature_means.iter().all(|v| v.is_finite())
            && self
                .feature_scales
                .iter()
                .all(|v| v.is_finite() && *v > 0.0)
            && self.dual_coefficients.iter().all(|v| v.is_finite())
            && self.support_vectors.iter().flatten().all(|v| v.is_finite());
        if !finite {
            return Err(Error::ModelFormat("non-finite SVR parameters".into()));
        }
        Ok(())
    }
}

#[inline]
fn rbf(gamma: f64, a: &[f64; N_FEATURES], b: &[f64; N_FEATURES]) -> f64 {
    let mut d = 0.0;
    for f in 0..N_FEATURES {
        let t = a[f] - b[f];
        d += t * t;
    }
    (-gamma * d).exp()
}

struct Kernel<'a> {
    x: &'a [[f64; N_FEATURES]],
    gamma: f64,
    full: Option<Vec<f64>>,
    cache: HashMap<usize, Vec<f64>>,
    order: std::collections::VecDeque<usize>,
}

impl<'a> Kernel<'a> {
    fn new(x: &'a [[f64; N_FEATURES]], gamma: f64) -> Self {
        let n = x.len();
        let full = (n <= FULL_KERNEL_LIMIT).then(|| {
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                m[i * n + i] = 1.0;
                for j in 0..i {
                    let k = rbf(gamma, &x[i], &x[j]);
                    m[i * n + j] = k;
                    m[j * n + i] = k;
                }
            }
            m
        });
        Self {
            x,
            gamma,
            full,
            cache: HashMap::new(),
            order: Default::default(),
        }
    }

    fn row(&mut self, i: usize) -> &[f64] {
        let n = self.x.len();
        if self.full.is_some() {
            return &self.full.as_ref().unwrap()[i * n..(i + 1) * n];
        }
        if !self.cache.contains_key(&i) {
            if self.order.len() >= ROW_CACHE_ROWS {
                if let Some(old) = self.order.pop_front() {
                    self.cache.remove(&old);
                }
            }
            let row = (0..n)
                .map(|j| rbf(self.gamma, &self.x[i], &self.x[j]))
                .collect();
            self.cache.insert(i, row);
            self.order.push_back(i);
        }
        &self.cache[&i]
    }
}

fn standardization(rows: &[WeightedRow]) -> ([f64; N_FEATURES], [f64; N_FEATURES]) {
    let w: f64 = rows.iter().map(|r| r.weight).sum();
    let mut mean = [0.0; N_FEATURES];
    let mut scale = [1.0; N_FEATURES];
    for f in 0..N_FEATURES {
        mean[f] = rows.iter().map(|r| r.weight * r.x[f]).sum::<f64>() / w;
        let var = rows
            .iter()
            .map(|r| r.weight * (r.x[f] - mean[f]).powi(2))
            .sum::<f64>()
            / w;
        let sd = var.sqrt();
        // constant feature: leave unscaled (it standardizes to 0)
        if sd > 1e-12 * mean[f].abs().max(1.0) {
            scale[f] = sd;
        }
    }
    (mean, scale)
}

/// Trains an epsilon-SVR on `(features, path loss)` rows.
pub fn train_svr(rows: &[(FeatureVector, f64)], params: &SvrParams) -> Result<SvrModel> {
    validate_rows(rows)?;
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::validation("C must be positive"));
    }
    if !(params.epsilon >= 0.0 && params.epsilon.is_finite()) {
        return Err(Error::validation("epsilon must be non-negative"));
    }
    if !(params.tolerance > 0.0) {
        return Err(Error::validation("tolerance must be positive"));
    }
    let merged = merge_duplicates(rows);
    let l = merged.len();
    let (mean, scale) = standardization(&merged);
    let x: Vec<[f64; N_FEATURES]> = merged
        .iter()
        .map(|r| std::array::from_fn(|f| (r.x[f] - mean[f]) / scale[f]))
        .collect();

    let gamma = match params.gamma {
        GammaMode::Value(g) if g > 0.0 && g.is_finite() => g,
        GammaMode::Value(g) => return Err(Error::validation(format!("invalid gamma {g}"))),
        GammaMode::Scale => {
            let w: f64 = merged.iter().map(|r| r.weight).sum::<f64>() * N_FEATURES as f64;
            let m = x
                .iter()
                .zip(&merged)
                .map(|(v, r)| r.weight * v.iter().sum::<f64>())
                .sum::<f64>()
                / w;
            let var = x
                .iter()
                .zip(&merged)
                .map(|(v, r)| r.weight * v.iter().map(|e| (e - m).powi(2)).sum::<f64>())
                .sum::<f64>()
                / w;
            if var > 0.0 {
                1.0 / (N_FEATURES as f64 * var)
            } else {
                1.0
            }
        }
    };

    let max_iter = params
        .max_iterations
        .unwrap_or_else(|| (l as u64).saturating_mul(l as u64).saturating_mul(10))
        .max(1);

    // Variables 0..l are alpha (sign +1), l..2l are alpha* (sign -1).
    let n = 2 * l;
    let sign = |t: usize| if t < l { 1.0 } else { -1.0 };
    let upper: Vec<f64> = (0..n).map(|t| params.c * merged[t % l].weight).collect();
    let mut alpha = vec![0.0; n];
    let mut grad: Vec<f64> = (0..n)
        .map(|t| {
            let z = merged[t % l].y;
            if t < l {
                params.epsilon - z
            } else {
                params.epsilon + z
            }
        })
        .collect();

    let mut kernel = Kernel::new(&x, gamma);
    let mut iterations = 0u64;
    let mut converged = false;
    while iterations < max_iter {
        // maximal violating first index
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            if sign(t) > 0.0 {
                if alpha[t] < upper[t] && -grad[t] >= g_max {
                    g_max = -grad[t];
                    i_sel = t;
                }
            } else if alpha[t] > 0.0 && grad[t] >= g_max {
                g_max = grad[t];
                i_sel = t;
            }
        }
        let mut g_max2 = f64::NEG_INFINITY;
        let mut j_sel = usize::MAX;
        let mut obj_min = f64::INFINITY;
        if i_sel != usize::MAX {
            let ki = kernel.row(i_sel % l);
            for t in 0..n {
                let yt = sign(t);
                let k = ki[t % l];
                // Q_it = y_i y_t k
                let (eligible, grad_diff, viol) = if yt > 0.0 {
                    (alpha[t] > 0.0, g_max + grad[t], grad[t])
                } else {
                    (alpha[t] < upper[t], g_max - grad[t], -grad[t])
                };
                if !eligible {
                    continue;
                }
                if viol >= g_max2 {
                    g_max2 = viol;
                }
                if grad_diff > 0.0 {
                    let quad = 2.0 - 2.0 * k;
                    let quad = if quad > 0.0 { quad } else { TAU };
                    let obj = -(grad_diff * grad_diff) / quad;
                    if obj <= obj_min {
                        obj_min = obj;
                        j_sel = t;
                    }
                }
            }
        }
        if i_sel == usize::MAX || j_sel == usize::MAX || g_max + g_max2 < params.tolerance {
            converged = true;
            break;
        }
        iterations += 1;

        let (i, j) = (i_sel, j_sel);
        let (yi, yj) = (sign(i), sign(j));
        let kij = kernel.row(i % l)[j % l];
        let qij = yi * yj * kij;
        let (ci, cj) = (upper[i], upper[j]);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if yi != yj {
            let quad = {
                let q = 2.0 + 2.0 * qij;
                if q > 0.0 {
                    q
                } else {
                    TAU
                }
            };
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > ci - cj {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = ci - diff;
                }
            } else if alpha[j] > cj {
                alpha[j] = cj;
                alpha[i] = cj + diff;
            }
        } else {
            let quad = {
                let q = 2.0 - 2.0 * qij;
                if q > 0.0 {
                    q
                } else {
                    TAU
                }
            };
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > ci {
                if alpha[i] > ci {
                    alpha[i] = ci;
                    alpha[j] = sum - ci;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > cj {
                if alpha[j] > cj {
                    alpha[j] = cj;
                    alpha[i] = sum - cj;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let di = alpha[i] - old_i;
        let dj = alpha[j] - old_j;
        if di != 0.0 {
            let ki = kernel.row(i % l);
            for t in 0..n {
                grad[t] += yi * sign(t) * ki[t % l] * di;
            }
        }
        if dj != 0.0 {
            let kj = kernel.row(j % l);
            for t in 0..n {
                grad[t] += yj * sign(t) * kj[t % l] * dj;
            }
        }
    }

    // rho from free variables, else the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = sign(t) * grad[t];
        if alpha[t] >= upper[t] {
            if sign(t) < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if sign(t) > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };

    let mut support_vectors = Vec::new();
    let mut dual_coefficients = Vec::new();
    for i in 0..l {
        let beta = alpha[i] - alpha[i + l];
        if beta != 0.0 {
            support_vectors.push(x[i]);
            dual_coefficients.push(beta);
        }
    }
    Ok(SvrModel {
        support_vectors,
        dual_coefficients,
        bias: -rho,
        kernel_gamma: gamma,
        feature_means: mean,
        feature_scales: scale,
        converged,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(v: [f64; 6]) -> FeatureVector {
        FeatureVector(v)
    }

    fn line(n: usize, f: impl Fn(f64) -> f64) -> Vec<(FeatureVector, f64)> {
        (0..n)
            .map(|i| {
                let d = 1.0 + i as f64 * 0.5;
                (fv([0.0, 0.0, 1.0, d, 0.3 * d, 1.5]), f(d))
            })
            .collect()
    }

    #[test]
    fn constant_targets_inside_tube() {
        let rows = line(30, |_| 62.0);
        let m = train_svr(&rows, &SvrParams::default()).unwrap();
        assert!(m.converged);
        for x in [
            fv([0.0; 6]),
            fv([0.0, 0.0, 1.0, 4.0, 1.2, 1.5]),
            fv([9.0, -3.0, 2.0, 40.0, 1.0, 0.0]),
        ] {
            assert!(
                (m.predict(&x) - 62.0).abs() <= 0.1 + 1e-9,
                "{}",
                m.predict(&x)
            );
        }
    }

    #[test]
    fn zero_support_vectors_predict_bias() {
        let m = SvrModel {
            support_vectors: vec![],
            dual_coefficients: vec![],
            bias: 12.5,
            kernel_gamma: 0.5,
            feature_means: [0.0; 6],
            feature_scales: [1.0; 6],
            converged: true,
            iterations: 0,
        };
        assert_eq!(m.predict(&fv([3.0; 6])), 12.5);
    }

    #[test]
    fn separable_toy_set_fits() {
        let a = fv([0.0, 0.0, 0.0, 2.0, 0.0, 1.0]);
        let b = fv([0.0, 0.0, 0.0, 8.0, 0.0, 1.0]);
        let rows: Vec<_> = std::iter::repeat_n([(a, 50.0), (b, 70.0)], 20)
            .flatten()
            .collect();
        let p = SvrParams::default();
        let m = train_svr(&rows, &p).unwrap();
        assert!(
            (m.predict(&a) - 50.0).abs() <= p.epsilon + 0.1,
            "{}",
            m.predict(&a)
        );
        assert!(
            (m.predict(&b) - 70.0).abs() <= p.epsilon + 0.1,
            "{}",
            m.predict(&b)
        );
    }

    #[test]
    fn coefficients_respect_weighted_box() {
        let rows = line(40, |d| 46.8 + 17.0 * d.log10());
        let mut rows2 = rows.clone();
        rows2.extend(rows.iter().take(10).cloned());
        let p = SvrParams {
            c: 0.5,
            ..Default::default()
        };
        let m = train_svr(&rows2, &p).unwrap();
        let merged = merge_duplicates(&rows2);
        let bound = merged.iter().map(|r| r.weight).fold(0.0, f64::max) * p.c;
        assert!(m.dual_coefficients.iter().all(|a| a.abs() <= bound + 1e-12));
        // coefficients sum to zero (equality constraint)
        assert!(m.dual_coefficients.iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn gamma_scale_is_one_sixth_for_nonconstant_features() {
        let rows: Vec<_> = (0..50)
            .map(|i| {
                let t = i as f64;
                (
                    fv([t, t.sin(), t.cos(), (t * 0.3).sin(), t * t, (t * 1.7).cos()]),
                    t,
                )
            })
            .collect();
        let m = train_svr(
            &rows,
            &SvrParams {
                max_iterations: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        assert!((m.kernel_gamma - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let rows = line(40, |d| 46.8 + 17.0 * d.log10());
        let m = train_svr(
            &rows,
            &SvrParams {
                max_iterations: Some(2),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!m.converged);
        assert_eq!(m.iterations, 2);
    }

    #[test]
    fn invalid_params_rejected() {
        let rows = line(5, |d| d);
        assert!(train_svr(
            &rows,
            &SvrParams {
                c: 0.0,
                ..Default::default()
            }
        )
        .is_err());
        assert!(train_svr(
            &rows,
            &SvrParams {
                epsilon: -1.0,
                ..Default::default()
            }
        )
        .is_err());
        assert!(train_svr(&[], &SvrParams::default()).is_err());
    }
}
