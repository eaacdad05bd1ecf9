//! CART-style binary tree on Gini impurity.
//!
//! Nodes live in a flat arena (root at index 0) so deep trees serialise
//! without nesting.

use serde::{Deserialize, Serialize};

use super::check_width;
use super::config::TreeConfig;
use crate::dataset::{FeatureMatrix, LabelVector};
use crate::error::Result;

/// Impurity differences below this are treated as ties.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        label: u8,
        class_counts: [usize; 2],
    },
    /// Rows with `x[feature_index] <= threshold` go left.
    Split {
        feature_index: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_features: usize,
    pub nodes: Vec<TreeNode>,
}

pub fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p0 = counts[0] as f64 / n;
    let p1 = counts[1] as f64 / n;
    1.0 - (p0 * p0 + p1 * p1)
}

fn majority(counts: [usize; 2]) -> u8 {
    u8::from(counts[1] > counts[0])
}

fn class_counts(y: &[u8], indices: &[usize]) -> [usize; 2] {
    let mut c = [0, 0];
    for &i in indices {
        c[y[i] as usize] += 1;
    }
    c
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

/// Lowest weighted Gini over all midpoint thresholds, ties going to the
/// lower feature index and then the lower threshold.
fn best_split(x: &FeatureMatrix, y: &[u8], indices: &[usize]) -> Option<Candidate> {
    let n = indices.len() as f64;
    let total = class_counts(y, indices);
    let mut best: Option<Candidate> = None;
    let mut order = indices.to_vec();
    for feature in 0..x.n_cols() {
        order.sort_by(|&a, &b| x.get(a, feature).total_cmp(&x.get(b, feature)));
        let mut left = [0usize; 2];
        for k in 0..order.len() - 1 {
            left[y[order[k]] as usize] += 1;
            let lo = x.get(order[k], feature);
            let hi = x.get(order[k + 1], feature);
            if lo == hi {
                continue;
            }
            let mut threshold = lo + (hi - lo) / 2.0;
            if threshold >= hi {
                threshold = lo;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let n_left = (k + 1) as f64;
            let impurity = (n_left * gini(left) + (n - n_left) * gini(right)) / n;
            if best.is_none_or(|b| impurity < b.impurity - TIE_EPS) {
                best = Some(Candidate { feature, threshold, impurity });
            }
        }
    }
    best
}

pub fn fit(x: &FeatureMatrix, y: &LabelVector, config: &TreeConfig) -> DecisionTree {
    let labels = y.as_slice();
    let mut nodes = Vec::new();
    // (node slot, row indices, depth)
    let mut pending = vec![(0usize, (0..x.n_rows()).collect::<Vec<_>>(), 0usize)];
    nodes.push(TreeNode::Leaf { label: 0, class_counts: [0, 0] });

    while let Some((slot, indices, depth)) = pending.pop() {
        let counts = class_counts(labels, &indices);
        let leaf = TreeNode::Leaf { label: majority(counts), class_counts: counts };
        let stop = counts[0] == 0
            || counts[1] == 0
            || config.max_depth.is_some_and(|d| depth >= d)
            || indices.len() < config.min_samples_split;
        let split = if stop { None } else { best_split(x, labels, &indices) };
        let Some(cand) = split else {
            nodes[slot] = leaf;
            continue;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            indices.iter().partition(|&&i| x.get(i, cand.feature) <= cand.threshold);
        let left = nodes.len();
        let right = left + 1;
        nodes.push(TreeNode::Leaf { label: 0, class_counts: [0, 0] });
        nodes.push(TreeNode::Leaf { label: 0, class_counts: [0, 0] });
        nodes[slot] = TreeNode::Split { feature_index: cand.feature, threshold: cand.threshold, left, right };
        pending.push((right, right_rows, depth + 1));
        pending.push((left, left_rows, depth + 1));
    }
    DecisionTree { n_features: x.n_cols(), nodes }
}

impl DecisionTree {
    pub fn leaf(&self, x: &[f64]) -> Result<(u8, [usize; 2])> {
        check_width(self.n_features, x.len())?;
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { label, class_counts } => return Ok((*label, *class_counts)),
                TreeNode::Split { feature_index, threshold, left, right } => {
                    at = if x[*feature_index] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Fraction of class-1 training rows in the leaf reached by `x`.
    pub fn probability(&self, x: &[f64]) -> Result<f64> {
        let (_, c) = self.leaf(x)?;
        Ok(c[1] as f64 / (c[0] + c[1]) as f64)
    }

    pub fn label(&self, x: &[f64]) -> Result<u8> {
        self.leaf(x).map(|(l, _)| l)
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}
