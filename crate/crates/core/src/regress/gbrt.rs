use super::{merge_duplicates, validate_rows, FeatureVector, WeightedRow, N_FEATURES};
use crate::error::{Error, Result};
use crate::rng::{Purpose, StreamRng};

#[derive(Debug, Clone, PartialEq)]
pub struct GbrtParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Minimum total sample weight on each side of a split.
    pub min_samples_leaf: usize,
    /// Fraction of (merged) rows drawn per tree; 1.0 uses every row.
    pub subsample: f64,
    pub seed: u64,
}

impl Default for GbrtParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: 6,
            learning_rate: 0.3,
            min_samples_leaf: 1,
            subsample: 1.0,
            seed: 0,
        }
    }
}

/// Tree node. Samples with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: u32,
        right: u32,
    },
}

/// Binary regression tree stored as a flat node array, root at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Self {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn predict(&self, x: &[f64; N_FEATURES]) -> f64 {
        let mut i = 0usize;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if x[feature] <= threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + go(t, left as usize).max(go(t, right as usize))
                }
            }
        }
        go(self, 0)
    }

    fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::ModelFormat("tree without nodes".into()));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            match *n {
                Node::Leaf { value } if !value.is_finite() => {
                    return Err(Error::ModelFormat(format!("leaf {i} is not finite")))
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    // children always follow their parent, which also rules out cycles
                    let ok = feature < N_FEATURES
                        && threshold.is_finite()
                        && (left as usize) > i
                        && (right as usize) > i
                        && (left as usize) < self.nodes.len()
                        && (right as usize) < self.nodes.len();
                    if !ok {
                        return Err(Error::ModelFormat(format!("invalid split node {i}")));
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Additive tree ensemble: `base + learning_rate * sum(tree(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GbrtModel {
    pub trees: Vec<Tree>,
    pub learning_rate: f64,
    pub base_prediction: f64,
}

impl GbrtModel {
    /// Ensemble without trees, predicting `value` everywhere.
    pub fn constant(value: f64) -> Self {
        Self {
            trees: Vec::new(),
            learning_rate: 1.0,
            base_prediction: value,
        }
    }

    pub fn predict(&self, v: &FeatureVector) -> f64 {
        self.predict_staged(v, self.trees.len())
    }

    /// Prediction using only the first `n_trees` trees.
    pub fn predict_staged(&self, v: &FeatureVector, n_trees: usize) -> f64 {
        let sum: f64 = self.trees[..n_trees.min(self.trees.len())]
            .iter()
            .map(|t| t.predict(&v.0))
            .sum();
        self.base_prediction + self.learning_rate * sum
    }

    pub fn validate(&self) -> Result<()> {
        if !self.base_prediction.is_finite() || !self.learning_rate.is_finite() {
            return Err(Error::ModelFormat("non-finite ensemble constants".into()));
        }
        self.trees.iter().try_for_each(Tree::validate)
    }
}

struct Builder<'a> {
    rows: &'a [WeightedRow],
    residual: &'a [f64],
    params: &'a GbrtParams,
    nodes: Vec<Node>,
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Builder<'_> {
    fn sums(&self, members: &[usize]) -> (f64, f64) {
        members.iter().fold((0.0, 0.0), |(w, s), &i| {
            (
                w + self.rows[i].weight,
                s + self.rows[i].weight * self.residual[i],
            )
        })
    }

    fn best_split(
        &self,
        sorted: &[Vec<usize>; N_FEATURES],
        total_w: f64,
        total_s: f64,
    ) -> Option<SplitChoice> {
        let min_leaf = self.params.min_samples_leaf.max(1) as f64;
        let parent = total_s * total_s / total_w;
        let sse: f64 = sorted[0]
            .iter()
            .map(|&i| self.rows[i].weight * self.residual[i].powi(2))
            .sum::<f64>()
            - parent;
        let min_gain = 1e-12 * sse.abs().max(1.0);
        let mut best: Option<SplitChoice> = None;
        for (f, order) in sorted.iter().enumerate() {
            let (mut wl, mut sl) = (0.0, 0.0);
            for j in 0..order.len().saturating_sub(1) {
                let i = order[j];
                wl += self.rows[i].weight;
                sl += self.rows[i].weight * self.residual[i];
                let (a, b) = (self.rows[i].x[f], self.rows[order[j + 1]].x[f]);
                if a == b {
                    continue;
                }
                let wr = total_w - wl;
                if wl < min_leaf || wr < min_leaf {
                    continue;
                }
                let sr = total_s - sl;
                let gain = sl * sl / wl + sr * sr / wr - parent;
                if gain <= min_gain {
                    continue;
                }
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    let mut threshold = a + (b - a) / 2.0;
                    if threshold >= b {
                        threshold = a;
                    }
                    best = Some(SplitChoice {
                        feature: f,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }

    fn build(&mut self, sorted: [Vec<usize>; N_FEATURES], depth: usize) -> u32 {
        let (w, s) = self.sums(&sorted[0]);
        let id = self.nodes.len() as u32;
        let leaf_value = if w > 0.0 { s / w } else { 0.0 };
        self.nodes.push(Node::Leaf { value: leaf_value });
        if depth >= self.params.max_depth || sorted[0].len() < 2 {
            return id;
        }
        let Some(choice) = self.best_split(&sorted, w, s) else {
            return id;
        };
        let goes_left = |i: usize| self.rows[i].x[choice.feature] <= choice.threshold;
        let mut left: [Vec<usize>; N_FEATURES] = Default::default();
        let mut right: [Vec<usize>; N_FEATURES] = Default::default();
        for f in 0..N_FEATURES {
            for &i in &sorted[f] {
                if goes_left(i) {
                    left[f].push(i);
                } else {
                    right[f].push(i);
                }
            }
        }
        drop(sorted);
        let l = self.build(left, depth + 1);
        let r = self.build(right, depth + 1);
        self.nodes[id as usize] = Node::Split {
            feature: choice.feature,
            threshold: choice.threshold,
            left: l,
            right: r,
        };
        id
    }
}

/// Stagewise squared-error boosting.
///
/// `base_prediction` is the mean target; each tree is grown greedily on the
/// current residuals by exact search over midpoints of sorted unique feature
/// values, and its leaves hold mean residuals. Split gain ties keep the
/// lowest feature index, then the lowest threshold.
pub fn train_gbrt(rows: &[(FeatureVector, f64)], params: &GbrtParams) -> Result<GbrtModel> {
    validate_rows(rows)?;
    if !(params.learning_rate > 0.0 && params.learning_rate.is_finite()) {
        return Err(Error::validation("learning_rate must be positive"));
    }
    if !(params.subsample > 0.0 && params.subsample <= 1.0) {
        return Err(Error::validation("subsample must be in (0, 1]"));
    }
    let merged = merge_duplicates(rows);
    let total_w: f64 = merged.iter().map(|r| r.weight).sum();
    let base = merged.iter().map(|r| r.weight * r.y).sum::<f64>() / total_w;

    let presorted: [Vec<usize>; N_FEATURES] = std::array::from_fn(|f| {
        let mut idx: Vec<usize> = (0..merged.len()).collect();
        idx.sort_by(|&a, &b| merged[a].x[f].total_cmp(&merged[b].x[f]).then(a.cmp(&b)));
        idx
    });

    let mut rng = StreamRng::new(params.seed, 0, Purpose::Boosting, 0);
    let mut fitted = vec![base; merged.len()];
    let mut trees = Vec::with_capacity(params.n_trees);
    for _ in 0..params.n_trees {
        let residual: Vec<f64> = merged.iter().zip(&fitted).map(|(r, f)| r.y - f).collect();
        let sorted = if params.subsample < 1.0 {
            let keep: Vec<bool> = (0..merged.len())
                .map(|_| rng.unit() < params.subsample)
                .collect();
            presorted
                .clone()
                .map(|v| v.into_iter().filter(|&i| keep[i]).collect())
        } else {
            presorted.clone()
        };
        let mut builder = Builder {
            rows: &merged,
            residual: &residual,
            params,
            nodes: Vec::new(),
        };
        if sorted[0].is_empty() {
            builder.nodes.push(Node::Leaf { value: 0.0 });
        } else {
            builder.build(sorted, 0);
        }
        let tree = Tree {
            nodes: builder.nodes,
        };
        for (f, r) in fitted.iter_mut().zip(&merged) {
            *f += params.learning_rate * tree.predict(&r.x);
        }
        trees.push(tree);
    }
    Ok(GbrtModel {
        trees,
        learning_rate: params.learning_rate,
        base_prediction: base,
    })
}
