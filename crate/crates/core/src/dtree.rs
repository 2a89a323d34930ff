//! Depth-limited binary CART trees for a binary success label.
//!
//! Splits are chosen greedily by impurity decrease over midpoints between
//! consecutive distinct feature values. Gains within [`GAIN_TIE_EPS`] of the
//! current best count as ties and keep the earlier candidate, which makes the
//! choice favour the lower feature index and then the lower threshold.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::StandardizationStats;

/// Gains closer than this are treated as equal during split search.
pub const GAIN_TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Impurity {
    Gini,
    Entropy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeConfig {
    pub impurity: Impurity,
    pub max_depth: usize,
    pub min_leaf_size: usize,
    pub min_gain: f64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            impurity: Impurity::Gini,
            max_depth: 3,
            min_leaf_size: 1,
            min_gain: 1e-7,
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(Error::Config("max_depth must be at least 1".into()));
        }
        if self.min_leaf_size == 0 {
            return Err(Error::Config("min_leaf_size must be at least 1".into()));
        }
        if self.min_gain.is_nan() || self.min_gain < 0.0 {
            return Err(Error::Config("min_gain must be non-negative".into()));
        }
        Ok(())
    }
}

/// Class counts as `[failures, successes]`.
pub type ClassCounts = [usize; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeNode {
    /// Rows with `x[feature_index] <= threshold` go left.
    Internal {
        feature_index: usize,
        threshold: f64,
        class_counts: ClassCounts,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        class_counts: ClassCounts,
        predicted_class: u8,
        depth: usize,
    },
}

impl TreeNode {
    pub fn class_counts(&self) -> ClassCounts {
        match self {
            TreeNode::Internal { class_counts, .. } | TreeNode::Leaf { class_counts, .. } => *class_counts,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, TreeNode::Leaf { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: TreeNode,
    pub config: TreeConfig,
    pub n_train: usize,
    pub n_features: usize,
    pub feature_importances: Vec<f64>,
}

impl DecisionTree {
    pub fn n_leaves(&self) -> usize {
        count_leaves(&self.root)
    }

    pub fn depth(&self) -> usize {
        fn depth(node: &TreeNode) -> usize {
            match node {
                TreeNode::Leaf { depth, .. } => *depth,
                TreeNode::Internal { left, right, .. } => depth(left).max(depth(right)),
            }
        }
        depth(&self.root)
    }

    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        Ok(self.route(x)?.1)
    }

    /// Leaf counts and prediction for `x`, plus the index of the leaf in
    /// left-to-right order.
    fn route(&self, x: &[f64]) -> Result<(ClassCounts, u8, usize)> {
        self.check_dim(x)?;
        let mut node = &self.root;
        let mut leaf_index = 0;
        loop {
            match node {
                TreeNode::Leaf {
                    class_counts,
                    predicted_class,
                    ..
                } => return Ok((*class_counts, *predicted_class, leaf_index)),
                TreeNode::Internal {
                    feature_index,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    if x[*feature_index] <= *threshold {
                        node = left;
                    } else {
                        leaf_index += count_leaves(left);
                        node = right;
                    }
                }
            }
        }
    }

    /// Position of the leaf that `x` lands in, counting leaves left to right.
    pub fn leaf_index(&self, x: &[f64]) -> Result<usize> {
        Ok(self.route(x)?.2)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: x.len(),
            });
        }
        Ok(())
    }
}

fn count_leaves(node: &TreeNode) -> usize {
    match node {
        TreeNode::Leaf { .. } => 1,
        TreeNode::Internal { left, right, .. } => count_leaves(left) + count_leaves(right),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    LessOrEqual,
    #[serde(rename = ">")]
    Greater,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::LessOrEqual => "≤",
            Comparison::Greater => ">",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub feature_index: usize,
    pub feature_name: String,
    pub op: Comparison,
    pub threshold: f64,
}

impl Predicate {
    /// Same predicate with the threshold mapped from z units to raw units.
    pub fn to_raw(&self, stats: &StandardizationStats) -> Predicate {
        Predicate {
            threshold: stats.to_raw(self.feature_index, self.threshold),
            ..self.clone()
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            self.feature_name,
            self.op,
            format_threshold(self.threshold)
        )
    }
}

fn format_threshold(t: f64) -> String {
    let s = format!("{t:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub predicates: Vec<Predicate>,
    pub leaf_counts: ClassCounts,
    pub leaf_success_rate: f64,
}

impl Rule {
    pub fn to_raw(&self, stats: &StandardizationStats) -> Rule {
        Rule {
            predicates: self.predicates.iter().map(|p| p.to_raw(stats)).collect(),
            ..self.clone()
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.predicates.is_empty() {
            f.write_str("(all rows)")?;
        } else {
            let parts: Vec<String> = self.predicates.iter().map(ToString::to_string).collect();
            f.write_str(&parts.join(" and "))?;
        }
        write!(
            f,
            " => {}/{} successful",
            self.leaf_counts[1],
            self.leaf_counts[0] + self.leaf_counts[1]
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionPath {
    pub predicted_class: u8,
    pub leaf_counts: ClassCounts,
    pub predicates: Vec<Predicate>,
}

fn node_impurity(counts: ClassCounts, measure: Impurity) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    let p = [counts[0] as f64 / n, counts[1] as f64 / n];
    match measure {
        Impurity::Gini => 1.0 - p[0] * p[0] - p[1] * p[1],
        Impurity::Entropy => -p.iter().filter(|&&pi| pi > 0.0).map(|&pi| pi * pi.log2()).sum::<f64>(),
    }
}

/// Gini `1 - sum p_i^2` or entropy `-sum p_i log2 p_i` of a node.
pub fn impurity(counts: ClassCounts, measure: Impurity) -> Result<f64> {
    if counts[0] + counts[1] == 0 {
        return Err(Error::Empty("impurity of an empty node"));
    }
    Ok(node_impurity(counts, measure))
}

fn gain_unchecked(parent: ClassCounts, left: ClassCounts, right: ClassCounts, measure: Impurity) -> f64 {
    let n = (parent[0] + parent[1]) as f64;
    let nl = (left[0] + left[1]) as f64;
    let nr = (right[0] + right[1]) as f64;
    node_impurity(parent, measure) - (nl / n) * node_impurity(left, measure) - (nr / n) * node_impurity(right, measure)
}

/// Parent impurity minus the size-weighted impurities of both children.
pub fn split_gain(parent: ClassCounts, left: ClassCounts, right: ClassCounts, measure: Impurity) -> Result<f64> {
    if left[0] + right[0] != parent[0] || left[1] + right[1] != parent[1] {
        return Err(Error::Data(format!(
            "child counts {left:?} + {right:?} do not add up to {parent:?}"
        )));
    }
    if left[0] + left[1] == 0 || right[0] + right[1] == 0 {
        return Err(Error::Empty("split with an empty child"));
    }
    Ok(gain_unchecked(parent, left, right, measure))
}

fn counts_of(labels: &[u8], idx: &[usize]) -> ClassCounts {
    let ones = idx.iter().filter(|&&i| labels[i] == 1).count();
    [idx.len() - ones, ones]
}

fn leaf(counts: ClassCounts, depth: usize) -> TreeNode {
    TreeNode::Leaf {
        class_counts: counts,
        predicted_class: u8::from(counts[1] > counts[0]),
        depth,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature_index: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Best admissible split of the rows in `idx`, ignoring depth and `min_gain`.
fn best_split(rows: &[Vec<f64>], labels: &[u8], idx: &[usize], config: &TreeConfig) -> Option<SplitCandidate> {
    let parent = counts_of(labels, idx);
    let d = rows[idx[0]].len();
    let mut best: Option<SplitCandidate> = None;
    let mut order = idx.to_vec();
    for f in 0..d {
        order.sort_by(|&a, &b| rows[a][f].total_cmp(&rows[b][f]));
        let mut left = [0usize; 2];
        for p in 0..order.len() - 1 {
            left[labels[order[p]] as usize] += 1;
            let (lo, hi) = (rows[order[p]][f], rows[order[p + 1]][f]);
            if lo == hi {
                continue;
            }
            let n_left = p + 1;
            let n_right = order.len() - n_left;
            if n_left < config.min_leaf_size || n_right < config.min_leaf_size {
                continue;
            }
            let right = [parent[0] - left[0], parent[1] - left[1]];
            let gain = gain_unchecked(parent, left, right, config.impurity);
            if best.map_or(true, |b| gain > b.gain + GAIN_TIE_EPS) {
                best = Some(SplitCandidate {
                    feature_index: f,
                    threshold: midpoint(lo, hi),
                    gain,
                });
            }
        }
    }
    best
}

pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi {
        mid
    } else {
        lo
    }
}

fn grow(rows: &[Vec<f64>], labels: &[u8], idx: &[usize], depth: usize, config: &TreeConfig) -> TreeNode {
    let counts = counts_of(labels, idx);
    if depth >= config.max_depth || counts[0] == 0 || counts[1] == 0 {
        return leaf(counts, depth);
    }
    let split = match best_split(rows, labels, idx, config) {
        Some(s) if s.gain > config.min_gain => s,
        _ => return leaf(counts, depth),
    };
    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
        .iter()
        .partition(|&&i| rows[i][split.feature_index] <= split.threshold);
    TreeNode::Internal {
        feature_index: split.feature_index,
        threshold: split.threshold,
        class_counts: counts,
        left: Box::new(grow(rows, labels, &left_idx, depth + 1, config)),
        right: Box::new(grow(rows, labels, &right_idx, depth + 1, config)),
    }
}

/// Greedy top-down induction. Deterministic; a single leaf is a valid result.
pub fn fit(rows: &[Vec<f64>], labels: &[u8], config: &TreeConfig) -> Result<DecisionTree> {
    config.validate()?;
    if rows.is_empty() {
        return Err(Error::Empty("cannot fit a tree on zero rows"));
    }
    if rows.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: rows.len(),
            found: labels.len(),
        });
    }
    let d = rows[0].len();
    if let Some(row) = rows.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: row.len(),
        });
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::Data("labels must be 0 or 1".into()));
    }
    let idx: Vec<usize> = (0..rows.len()).collect();
    let root = grow(rows, labels, &idx, 0, config);
    let mut tree = DecisionTree {
        root,
        config: config.clone(),
        n_train: rows.len(),
        n_features: d,
        feature_importances: Vec::new(),
    };
    tree.feature_importances = feature_importance(&tree);
    Ok(tree)
}

/// Root split search exposed for diagnostics and benchmarking.
pub fn root_split(rows: &[Vec<f64>], labels: &[u8], config: &TreeConfig) -> Option<SplitCandidate> {
    if rows.is_empty() {
        return None;
    }
    let idx: Vec<usize> = (0..rows.len()).collect();
    best_split(rows, labels, &idx, config)
}

/// Impurity-decrease importance, `sum (N_j / N_total) * gain_j` over the nodes
/// splitting on each feature, normalized to sum to 1. All zero for a leaf.
pub fn feature_importance(tree: &DecisionTree) -> Vec<f64> {
    fn walk(node: &TreeNode, n_total: f64, measure: Impurity, acc: &mut [f64]) {
        if let TreeNode::Internal {
            feature_index,
            class_counts,
            left,
            right,
            ..
        } = node
        {
            let n_node = (class_counts[0] + class_counts[1]) as f64;
            let gain = gain_unchecked(*class_counts, left.class_counts(), right.class_counts(), measure);
            acc[*feature_index] += n_node / n_total * gain;
            walk(left, n_total, measure, acc);
            walk(right, n_total, measure, acc);
        }
    }
    let mut importances = vec![0.0; tree.n_features];
    walk(&tree.root, tree.n_train as f64, tree.config.impurity, &mut importances);
    let total: f64 = importances.iter().sum();
    if total > 0.0 {
        for v in &mut importances {
            *v /= total;
        }
    }
    importances
}

fn name_of(names: &[String], i: usize) -> String {
    names.get(i).cloned().unwrap_or_else(|| format!("x{i}"))
}

/// One rule per leaf, left to right.
pub fn extract_rules(tree: &DecisionTree, feature_names: &[String]) -> Vec<Rule> {
    fn walk(node: &TreeNode, names: &[String], path: &mut Vec<Predicate>, out: &mut Vec<Rule>) {
        match node {
            TreeNode::Leaf { class_counts, .. } => {
                let n = class_counts[0] + class_counts[1];
                out.push(Rule {
                    predicates: path.clone(),
                    leaf_counts: *class_counts,
                    leaf_success_rate: if n == 0 { 0.0 } else { class_counts[1] as f64 / n as f64 },
                });
            }
            TreeNode::Internal {
                feature_index,
                threshold,
                left,
                right,
                ..
            } => {
                for (op, child) in [(Comparison::LessOrEqual, left), (Comparison::Greater, right)] {
                    path.push(Predicate {
                        feature_index: *feature_index,
                        feature_name: name_of(names, *feature_index),
                        op,
                        threshold: *threshold,
                    });
                    walk(child, names, path, out);
                    path.pop();
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(&tree.root, feature_names, &mut Vec::new(), &mut out);
    out
}

/// Routes `x` to a leaf and records every predicate it satisfied on the way.
pub fn decision_path(tree: &DecisionTree, x: &[f64], feature_names: &[String]) -> Result<DecisionPath> {
    tree.check_dim(x)?;
    let mut node = &tree.root;
    let mut predicates = Vec::new();
    loop {
        match node {
            TreeNode::Leaf {
                class_counts,
                predicted_class,
                ..
            } => {
                return Ok(DecisionPath {
                    predicted_class: *predicted_class,
                    leaf_counts: *class_counts,
                    predicates,
                })
            }
            TreeNode::Internal {
                feature_index,
                threshold,
                left,
                right,
                ..
            } => {
                let goes_left = x[*feature_index] <= *threshold;
                predicates.push(Predicate {
                    feature_index: *feature_index,
                    feature_name: name_of(feature_names, *feature_index),
                    op: if goes_left {
                        Comparison::LessOrEqual
                    } else {
                        Comparison::Greater
                    },
                    threshold: *threshold,
                });
                node = if goes_left { left } else { right };
            }
        }
    }
}
