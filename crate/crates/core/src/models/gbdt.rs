//! Least-squares gradient boosting over axis-aligned regression trees.
//!
//! Trees grow level by level. Each feature is presorted once per fit and
//! every level scans the sorted lists, so a level costs `O(n · d)`
//! regardless of how many nodes it holds. Splits are exact (every distinct
//! value boundary is a candidate).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbdtConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_leaf: usize,
    /// Row fraction drawn (without replacement) per tree.
    pub subsample: f64,
    pub seed: u64,
}

impl Default for GbdtConfig {
    fn default() -> Self {
        Self {
            n_trees: 200,
            max_depth: 6,
            learning_rate: 0.05,
            min_leaf: 20,
            subsample: 1.0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Regression tree; node 0 is the root. Rows with `x[feature] <= threshold`
/// go left.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64) -> Self {
        Self {
            nodes: vec![Node::Leaf { value }],
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub n_features: usize,
    pub initial: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
    /// Training MSE after the initial mean and after each tree.
    pub train_loss: Vec<f64>,
}

impl GbdtModel {
    pub fn predict_one(&self, x: &[f64]) -> f64 {
        self.initial + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }
}

struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

/// Grows one tree on `residuals` restricted to `rows`.
fn grow_tree(
    x: &[f64],
    d: usize,
    residuals: &[f64],
    rows: &[usize],
    sorted: &[Vec<usize>],
    config: &GbdtConfig,
) -> Tree {
    const INACTIVE: usize = usize::MAX;
    let n_total = residuals.len();
    // node id per row (INACTIVE when the row is not in this tree)
    let mut node_of = vec![INACTIVE; n_total];
    for &r in rows {
        node_of[r] = 0;
    }
    let mut nodes: Vec<Node> = vec![Node::Leaf { value: 0.0 }];
    let mut stats: Vec<(f64, usize)> = vec![(rows.iter().map(|&r| residuals[r]).sum(), rows.len())];
    let mut frontier: Vec<usize> = vec![0];

    for _depth in 0..config.max_depth {
        // slot per frontier node that can still split
        let mut slot = vec![usize::MAX; nodes.len()];
        let mut open = Vec::new();
        for &id in &frontier {
            if stats[id].1 >= 2 * config.min_leaf.max(1) {
                slot[id] = open.len();
                open.push(id);
            }
        }
        if open.is_empty() {
            break;
        }
        let mut best: Vec<Option<Candidate>> = (0..open.len()).map(|_| None).collect();
        let mut left_sum = vec![0.0; open.len()];
        let mut left_cnt = vec![0usize; open.len()];
        let mut last = vec![f64::NAN; open.len()];

        for (f, order) in sorted.iter().enumerate() {
            left_sum.iter_mut().for_each(|v| *v = 0.0);
            left_cnt.iter_mut().for_each(|v| *v = 0);
            for &r in order {
                let id = node_of[r];
                if id == INACTIVE || slot[id] == usize::MAX {
                    continue;
                }
                let s = slot[id];
                let v = x[r * d + f];
                let (total, n) = stats[id];
                let nl = left_cnt[s];
                if nl >= config.min_leaf.max(1) && n - nl >= config.min_leaf.max(1) && v > last[s] {
                    let sl = left_sum[s];
                    let sr = total - sl;
                    let gain = sl * sl / nl as f64 + sr * sr / (n - nl) as f64 - total * total / n as f64;
                    if gain > 1e-12 && best[s].as_ref().is_none_or(|b| gain > b.gain) {
                        let mut threshold = last[s] + (v - last[s]) / 2.0;
                        if threshold >= v {
                            threshold = last[s];
                        }
                        best[s] = Some(Candidate {
                            gain,
                            feature: f,
                            threshold,
                        });
                    }
                }
                left_sum[s] += residuals[r];
                left_cnt[s] += 1;
                last[s] = v;
            }
        }

        let mut next = Vec::new();
        let mut child_of = vec![(0usize, 0usize); nodes.len()];
        for (s, &id) in open.iter().enumerate() {
            if let Some(c) = &best[s] {
                let left = nodes.len();
                let right = left + 1;
                nodes.push(Node::Leaf { value: 0.0 });
                nodes.push(Node::Leaf { value: 0.0 });
                stats.push((0.0, 0));
                stats.push((0.0, 0));
                nodes[id] = Node::Split {
                    feature: c.feature,
                    threshold: c.threshold,
                    left,
                    right,
                };
                child_of[id] = (left, right);
                next.push(left);
                next.push(right);
            }
        }
        if next.is_empty() {
            break;
        }
        for &r in rows {
            let id = node_of[r];
            if let Node::Split {
                feature, threshold, ..
            } = nodes[id]
            {
                let (left, right) = child_of[id];
                let child = if x[r * d + feature] <= threshold { left } else { right };
                node_of[r] = child;
                stats[child].0 += residuals[r];
                stats[child].1 += 1;
            }
        }
        frontier = next;
    }

    for (id, node) in nodes.iter_mut().enumerate() {
        if let Node::Leaf { value } = node {
            let (sum, n) = stats[id];
            *value = if n > 0 { sum / n as f64 } else { 0.0 };
        }
    }
    Tree { nodes }
}

/// Replaces every leaf value by the mean residual of all rows reaching it,
/// so a stage grown on a subsample still cannot raise the training loss.
fn refit_leaves(tree: &mut Tree, x: &[f64], d: usize, residuals: &[f64]) {
    let mut acc = vec![(0.0, 0usize); tree.nodes.len()];
    for (i, r) in residuals.iter().enumerate() {
        let row = &x[i * d..(i + 1) * d];
        let mut k = 0;
        while let Node::Split {
            feature,
            threshold,
            left,
            right,
        } = tree.nodes[k]
        {
            k = if row[feature] <= threshold { left } else { right };
        }
        acc[k].0 += r;
        acc[k].1 += 1;
    }
    for (node, (sum, n)) in tree.nodes.iter_mut().zip(acc) {
        if let Node::Leaf { value } = node {
            *value = if n > 0 { sum / n as f64 } else { 0.0 };
        }
    }
}

pub fn fit_gbdt(x: &[f64], n_features: usize, y: &[f64], config: &GbdtConfig) -> Result<GbdtModel> {
    let n = y.len();
    let d = n_features;
    if n == 0 {
        return Err(Error::EmptyTraining);
    }
    if x.len() != n * d {
        return Err(Error::Shape(format!("design has {} values for {n} rows × {d} features", x.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite value in training data".into()));
    }
    if n < 2 * config.min_leaf {
        return Err(Error::InsufficientHistory(format!(
            "{n} rows cannot hold two leaves of {}",
            config.min_leaf
        )));
    }
    if !(config.subsample > 0.0 && config.subsample <= 1.0) {
        return Err(Error::Config(format!("subsample {} outside (0, 1]", config.subsample)));
    }

    let initial = y.iter().sum::<f64>() / n as f64;
    let mut pred = vec![initial; n];
    let mse = |pred: &[f64]| pred.iter().zip(y).map(|(p, t)| (t - p).powi(2)).sum::<f64>() / n as f64;
    let mut train_loss = vec![mse(&pred)];

    let sorted: Vec<Vec<usize>> = (0..d)
        .map(|f| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| x[a * d + f].total_cmp(&x[b * d + f]).then(a.cmp(&b)));
            idx
        })
        .collect();

    let mut rng = Stream::new(config.seed);
    let n_sample = ((n as f64 * config.subsample).round() as usize).clamp(1, n);
    let mut all_rows: Vec<usize> = (0..n).collect();
    let mut trees = Vec::with_capacity(config.n_trees);
    let mut residuals = vec![0.0; n];
    for _ in 0..config.n_trees {
        for i in 0..n {
            residuals[i] = y[i] - pred[i];
        }
        if residuals.iter().all(|&r| r == 0.0) {
            break;
        }
        let rows: Vec<usize> = if n_sample < n {
            rng.shuffle(&mut all_rows);
            let mut r = all_rows[..n_sample].to_vec();
            r.sort_unstable();
            r
        } else {
            all_rows.clone()
        };
        let mut tree = grow_tree(x, d, &residuals, &rows, &sorted, config);
        if n_sample < n {
            refit_leaves(&mut tree, x, d, &residuals);
        }
        for i in 0..n {
            pred[i] += config.learning_rate * tree.predict(&x[i * d..(i + 1) * d]);
        }
        train_loss.push(mse(&pred));
        trees.push(tree);
    }

    Ok(GbdtModel {
        n_features: d,
        initial,
        learning_rate: config.learning_rate,
        trees,
        train_loss,
    })
}

pub fn predict_gbdt(model: &GbdtModel, x: &[f64], n_features: usize) -> Result<Vec<f64>> {
    if n_features != model.n_features || !x.len().is_multiple_of(n_features.max(1)) {
        return Err(Error::Shape(format!(
            "model expects {} features, got rows of {n_features}",
            model.n_features
        )));
    }
    Ok(x.chunks_exact(n_features).map(|r| model.predict_one(r)).collect())
}
