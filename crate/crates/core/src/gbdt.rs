//! Gradient-boosted regression trees with logistic output.
//!
//! Each round fits a tree to the residuals `y - p` by exact greedy
//! variance-reduction splitting (candidate thresholds are midpoints between
//! consecutive distinct values, at least one instance per side). Leaves hold
//! the Newton estimate `sum(r) / sum(p(1-p))`; scores add `shrinkage * leaf`.
//! Equal-gain splits go to the lower feature index, then the lower
//! threshold.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{fingerprint_of, FeatureVector, LabeledInstance};

pub const DEFAULT_TREES: usize = 100;
pub const DEFAULT_DEPTH: usize = 6;
pub const DEFAULT_SHRINKAGE: f64 = 0.1;
/// Training stops once the mean absolute residual falls below this.
pub const CONVERGENCE: f64 = 1e-8;
const HESSIAN_FLOOR: f64 = 1e-12;
/// Splits must reduce the node's sum of squared residuals by more than this
/// fraction of it.
const MIN_RELATIVE_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafEstimate {
    #[default]
    Newton,
    MeanResidual,
}

impl std::str::FromStr for LeafEstimate {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> crate::error::Result<Self> {
        crate::harness::parse_variant(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbdtParams {
    pub trees: usize,
    pub max_depth: usize,
    pub shrinkage: f64,
    pub seed: u64,
    #[serde(default)]
    pub leaf_estimate: LeafEstimate,
}

impl Default for GbdtParams {
    fn default() -> Self {
        GbdtParams {
            trees: DEFAULT_TREES,
            max_depth: DEFAULT_DEPTH,
            shrinkage: DEFAULT_SHRINKAGE,
            seed: 0,
            leaf_estimate: LeafEstimate::Newton,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    /// Instances with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Reduction in the sum of squared residuals achieved at fit time.
        gain: f64,
        samples: usize,
    },
    Leaf { value: f64, samples: usize },
}

/// Flat node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    /// Index of the leaf reached by `x`.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        while let Node::Split {
            feature,
            threshold,
            left,
            right,
            ..
        } = &self.nodes[i]
        {
            i = if x[*feature] <= *threshold { *left } else { *right };
        }
        i
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    fn validate(&self, n_features: usize, max_depth: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Load("tree has no nodes".into()));
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![(0usize, 0usize)];
        while let Some((i, depth)) = stack.pop() {
            if i >= self.nodes.len() || seen[i] {
                return Err(Error::Load(format!("tree node {i} is missing or shared")));
            }
            seen[i] = true;
            if let Node::Split {
                feature, left, right, ..
            } = self.nodes[i]
            {
                if feature >= n_features {
                    return Err(Error::Load(format!("split on unknown feature {feature}")));
                }
                if depth + 1 > max_depth {
                    return Err(Error::Load(format!("tree deeper than {max_depth}")));
                }
                stack.push((left, depth + 1));
                stack.push((right, depth + 1));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel {
    pub init_score: f64,
    pub shrinkage: f64,
    pub max_depth: usize,
    pub seed: u64,
    pub leaf_estimate: LeafEstimate,
    pub fingerprint: String,
    pub feature_names: Vec<String>,
    pub trees: Vec<RegressionTree>,
}

pub fn sigmoid(s: f64) -> f64 {
    1.0 / (1.0 + (-s).exp())
}

/// `floor(1000 p)` clamped to `[0, 1000]`.
pub fn confidence_from_probability(p: f64) -> u16 {
    if p.is_nan() {
        return 0;
    }
    (p * 1000.0).floor().clamp(0.0, 1000.0) as u16
}

impl GbdtModel {
    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Additive score `init + shrinkage * sum(tree(x))` for a raw row.
    pub fn raw_score(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        self.init_score + self.shrinkage * sum
    }

    pub fn probability_of_row(&self, x: &[f64]) -> f64 {
        sigmoid(self.raw_score(x))
    }

    pub fn check_schema(&self, features: &FeatureVector) -> Result<()> {
        if features.schema.fingerprint() != self.fingerprint || features.values.len() != self.num_features() {
            return Err(Error::Config(format!(
                "feature schema {} does not match model schema {}",
                features.schema.fingerprint(),
                self.fingerprint
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let model: GbdtModel = serde_json::from_str(json).map_err(|e| Error::Load(e.to_string()))?;
        if fingerprint_of(&model.feature_names) != model.fingerprint {
            return Err(Error::Load("fingerprint does not match the feature names".into()));
        }
        if !(model.shrinkage > 0.0 && model.shrinkage <= 1.0) {
            return Err(Error::Load(format!("shrinkage {} outside (0, 1]", model.shrinkage)));
        }
        for t in &model.trees {
            t.validate(model.num_features(), model.max_depth)?;
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

pub fn predict_probability(model: &GbdtModel, features: &FeatureVector) -> Result<f64> {
    model.check_schema(features)?;
    Ok(model.probability_of_row(&features.values))
}

pub fn predict_confidence(model: &GbdtModel, features: &FeatureVector) -> Result<u16> {
    predict_probability(model, features).map(confidence_from_probability)
}

/// Split gains summed per feature and tree, averaged over trees and
/// normalized to sum to one. Empty for a model without splits.
pub fn feature_importance(model: &GbdtModel) -> BTreeMap<String, f64> {
    let mut totals = vec![0.0; model.num_features()];
    for tree in &model.trees {
        for node in &tree.nodes {
            if let Node::Split { feature, gain, .. } = node {
                totals[*feature] += gain / model.trees.len() as f64;
            }
        }
    }
    let sum: f64 = totals.iter().sum();
    if model.trees.is_empty() || sum <= 0.0 {
        return BTreeMap::new();
    }
    model
        .feature_names
        .iter()
        .zip(totals)
        .map(|(n, v)| (n.clone(), v / sum))
        .collect()
}

/// Training data in column-major layout.
pub struct Dataset {
    columns: Vec<Vec<f64>>,
    labels: Vec<f64>,
    names: Vec<String>,
    fingerprint: String,
}

impl Dataset {
    pub fn from_rows(rows: &[Vec<f64>], labels: &[bool], names: Vec<String>) -> Result<Self> {
        let fingerprint = fingerprint_of(&names);
        Self::build(rows.iter().map(Vec::as_slice), labels, names, fingerprint)
    }

    pub fn from_instances(instances: &[LabeledInstance]) -> Result<Self> {
        let first = instances
            .first()
            .ok_or_else(|| Error::Training("no training instances".into()))?;
        let schema = &first.features.schema;
        if let Some(bad) = instances
            .iter()
            .find(|i| i.features.schema.fingerprint() != schema.fingerprint())
        {
            return Err(Error::Config(format!(
                "instance {}/{} uses a different feature schema",
                bad.entity_id, bad.doc_id
            )));
        }
        let labels: Vec<bool> = instances.iter().map(LabeledInstance::label).collect();
        Self::build(
            instances.iter().map(|i| i.features.values.as_slice()),
            &labels,
            schema.names().to_vec(),
            schema.fingerprint().to_string(),
        )
    }

    fn build<'a>(
        rows: impl Iterator<Item = &'a [f64]>,
        labels: &[bool],
        names: Vec<String>,
        fingerprint: String,
    ) -> Result<Self> {
        let mut columns = vec![Vec::with_capacity(labels.len()); names.len()];
        let mut n = 0;
        for row in rows {
            if row.len() != names.len() {
                return Err(Error::Config(format!(
                    "row {n} has {} values, schema has {}",
                    row.len(),
                    names.len()
                )));
            }
            if let Some(x) = row.iter().find(|x| x.is_nan()) {
                return Err(Error::Training(format!("row {n} contains {x}")));
            }
            for (c, x) in columns.iter_mut().zip(row) {
                c.push(*x);
            }
            n += 1;
        }
        if n != labels.len() {
            return Err(Error::Training(format!("{n} rows but {} labels", labels.len())));
        }
        Ok(Dataset {
            columns,
            labels: labels.iter().map(|&b| f64::from(u8::from(b))).collect(),
            names,
            fingerprint,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

pub fn train(instances: &[LabeledInstance], params: &GbdtParams) -> Result<GbdtModel> {
    train_dataset(&Dataset::from_instances(instances)?, params)
}

pub fn train_dataset(data: &Dataset, params: &GbdtParams) -> Result<GbdtModel> {
    if !(params.shrinkage > 0.0 && params.shrinkage <= 1.0) {
        return Err(Error::Parameter(format!("shrinkage {} outside (0, 1]", params.shrinkage)));
    }
    let n = data.len();
    let positives: f64 = data.labels.iter().sum();
    if positives == 0.0 || positives == n as f64 {
        return Err(Error::Training(format!(
            "training data needs both classes ({positives} positive of {n})"
        )));
    }
    let prior = positives / n as f64;
    let init_score = (prior / (1.0 - prior)).ln();
    let sorted = presort(&data.columns);
    let mut scores = vec![init_score; n];
    let mut trees = Vec::with_capacity(params.trees);
    for round in 0..params.trees {
        let probs: Vec<f64> = scores.iter().map(|&s| sigmoid(s)).collect();
        let residuals: Vec<f64> = data.labels.iter().zip(&probs).map(|(y, p)| y - p).collect();
        let mean_abs = residuals.iter().map(|r| r.abs()).sum::<f64>() / n as f64;
        if mean_abs < CONVERGENCE {
            log::debug!("converged after {round} trees");
            break;
        }
        let tree = fit_tree_sorted(
            &data.columns,
            &sorted,
            &residuals,
            &probs,
            params.max_depth,
            params.leaf_estimate,
        );
        for (i, s) in scores.iter_mut().enumerate() {
            *s += params.shrinkage * tree_value_column(&tree, &data.columns, i);
        }
        trees.push(tree);
    }
    Ok(GbdtModel {
        init_score,
        shrinkage: params.shrinkage,
        max_depth: params.max_depth,
        seed: params.seed,
        leaf_estimate: params.leaf_estimate,
        fingerprint: data.fingerprint.clone(),
        feature_names: data.names.clone(),
        trees,
    })
}

fn tree_value_column(tree: &RegressionTree, columns: &[Vec<f64>], row: usize) -> f64 {
    let mut i = 0;
    loop {
        match &tree.nodes[i] {
            Node::Leaf { value, .. } => return *value,
            Node::Split {
                feature,
                threshold,
                left,
                right,
                ..
            } => i = if columns[*feature][row] <= *threshold { *left } else { *right },
        }
    }
}

fn presort(columns: &[Vec<f64>]) -> Vec<Vec<u32>> {
    columns
        .par_iter()
        .map(|col| {
            let mut idx: Vec<u32> = (0..col.len() as u32).collect();
            idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
            idx
        })
        .collect()
}

/// Fits one regression tree to `residuals`; `probs` feed the Newton leaf
/// estimate. Rows are given column-major.
pub fn fit_tree(
    columns: &[Vec<f64>],
    residuals: &[f64],
    probs: &[f64],
    max_depth: usize,
    leaf_estimate: LeafEstimate,
) -> RegressionTree {
    fit_tree_sorted(columns, &presort(columns), residuals, probs, max_depth, leaf_estimate)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

impl Candidate {
    /// Higher gain wins; ties go to the lower feature, then lower threshold.
    fn better_than(&self, other: &Candidate) -> bool {
        self.gain > other.gain
            || (self.gain == other.gain
                && (self.feature < other.feature
                    || (self.feature == other.feature && self.threshold < other.threshold)))
    }
}

fn best_split_for_feature(col: &[f64], order: &[u32], residuals: &[f64], total: f64, feature: usize) -> Option<Candidate> {
    let n = order.len();
    if n < 2 || col[order[0] as usize] == col[order[n - 1] as usize] {
        return None;
    }
    let parent = total * total / n as f64;
    let mut left_sum = 0.0;
    let mut best: Option<Candidate> = None;
    for k in 0..n - 1 {
        let i = order[k] as usize;
        left_sum += residuals[i];
        let (x, next) = (col[i], col[order[k + 1] as usize]);
        if x == next {
            continue;
        }
        let nl = (k + 1) as f64;
        let nr = (n - k - 1) as f64;
        let right_sum = total - left_sum;
        let gain = left_sum * left_sum / nl + right_sum * right_sum / nr - parent;
        let mut threshold = x + (next - x) / 2.0;
        if threshold >= next {
            threshold = x;
        }
        let c = Candidate { gain, feature, threshold };
        if best.is_none_or(|b| c.gain > b.gain) {
            best = Some(c);
        }
    }
    best
}

fn fit_tree_sorted(
    columns: &[Vec<f64>],
    presorted: &[Vec<u32>],
    residuals: &[f64],
    probs: &[f64],
    max_depth: usize,
    leaf_estimate: LeafEstimate,
) -> RegressionTree {
    let n = residuals.len();
    let mut nodes = Vec::new();
    let mut go_left = vec![false; n];
    build_node(
        &mut nodes,
        columns,
        presorted.to_vec(),
        residuals,
        probs,
        0,
        max_depth,
        leaf_estimate,
        &mut go_left,
    );
    RegressionTree { nodes }
}

#[allow(clippy::too_many_arguments)]
fn build_node(
    nodes: &mut Vec<Node>,
    columns: &[Vec<f64>],
    sorted: Vec<Vec<u32>>,
    residuals: &[f64],
    probs: &[f64],
    depth: usize,
    max_depth: usize,
    leaf_estimate: LeafEstimate,
    go_left: &mut [bool],
) -> usize {
    let id = nodes.len();
    let members: &[u32] = sorted.first().map_or(&[], Vec::as_slice);
    let samples = members.len();
    let total: f64 = members.iter().map(|&i| residuals[i as usize]).sum();
    let sse: f64 = members.iter().map(|&i| residuals[i as usize].powi(2)).sum();

    let split = if depth < max_depth && samples >= 2 && sse > 0.0 {
        sorted
            .par_iter()
            .enumerate()
            .filter_map(|(f, order)| best_split_for_feature(&columns[f], order, residuals, total, f))
            .reduce_with(|a, b| if b.better_than(&a) { b } else { a })
            .filter(|c| c.gain > MIN_RELATIVE_GAIN * sse)
    } else {
        None
    };

    let Some(c) = split else {
        let value = match leaf_estimate {
            LeafEstimate::Newton => {
                let hess: f64 = members
                    .iter()
                    .map(|&i| probs[i as usize] * (1.0 - probs[i as usize]))
                    .sum();
                total / hess.max(HESSIAN_FLOOR)
            }
            LeafEstimate::MeanResidual => {
                if samples == 0 {
                    0.0
                } else {
                    total / samples as f64
                }
            }
        };
        nodes.push(Node::Leaf { value, samples });
        return id;
    };

    let col = &columns[c.feature];
    for &i in members {
        go_left[i as usize] = col[i as usize] <= c.threshold;
    }
    let (left_sorted, right_sorted): (Vec<Vec<u32>>, Vec<Vec<u32>>) = sorted
        .into_iter()
        .map(|order| order.into_iter().partition(|&i| go_left[i as usize]))
        .unzip();
    nodes.push(Node::Leaf { value: 0.0, samples });
    let left = build_node(
        nodes,
        columns,
        left_sorted,
        residuals,
        probs,
        depth + 1,
        max_depth,
        leaf_estimate,
        go_left,
    );
    let right = build_node(
        nodes,
        columns,
        right_sorted,
        residuals,
        probs,
        depth + 1,
        max_depth,
        leaf_estimate,
        go_left,
    );
    nodes[id] = Node::Split {
        feature: c.feature,
        threshold: c.threshold,
        left,
        right,
        gain: c.gain,
        samples,
    };
    id
}
