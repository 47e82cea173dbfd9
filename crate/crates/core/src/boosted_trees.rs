//! Second-order gradient boosting for binary risk classification, plus the
//! logistic-regression baseline.
//!
//! Trees are grown leaf-wise over histogram-binned features: at every step
//! the leaf with the largest split gain is split, until `max_leaves` leaves
//! exist or no split improves the regularized objective. Categorical codes
//! are ordinal, so they are split by threshold like numeric features.
//!
//! Rows are put into a canonical order before training, so gradient sums do
//! not depend on the order the caller supplied them in.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest gain accepted for a split.
const MIN_SPLIT_GAIN: f64 = 1e-12;

/// Samples with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        cover: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        value: f64,
        cover: f64,
    },
}

impl TreeNode {
    pub fn leaf(value: f64, cover: f64) -> Self {
        TreeNode::Leaf { value, cover }
    }

    pub fn split(feature: usize, threshold: f64, left: TreeNode, right: TreeNode) -> Self {
        TreeNode::Split {
            feature,
            threshold,
            cover: left.cover() + right.cover(),
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn cover(&self) -> f64 {
        match self {
            TreeNode::Split { cover, .. } | TreeNode::Leaf { cover, .. } => *cover,
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value, .. } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    pub fn collect_features(&self, out: &mut BTreeSet<usize>) {
        if let TreeNode::Split {
            feature, left, right, ..
        } = self
        {
            out.insert(*feature);
            left.collect_features(out);
            right.collect_features(out);
        }
    }

    /// Checks cover bookkeeping and feature indices.
    pub fn validate(&self, feature_count: usize) -> Result<()> {
        match self {
            TreeNode::Leaf { value, cover } => {
                if !value.is_finite() || !(cover.is_finite() && *cover >= 0.0) {
                    return Err(Error::MalformedTree(format!(
                        "leaf with value {value} and cover {cover}"
                    )));
                }
                Ok(())
            }
            TreeNode::Split {
                feature,
                threshold,
                cover,
                left,
                right,
            } => {
                if *feature >= feature_count {
                    return Err(Error::MalformedTree(format!(
                        "split on feature {feature} but the model has {feature_count} features"
                    )));
                }
                if threshold.is_nan() {
                    return Err(Error::MalformedTree("NaN threshold".into()));
                }
                if *cover <= 0.0 {
                    return Err(Error::MalformedTree(format!("split node with cover {cover}")));
                }
                let children = left.cover() + right.cover();
                if (children - cover).abs() > 1e-9 * cover.max(1.0) {
                    return Err(Error::MalformedTree(format!(
                        "split cover {cover} differs from children total {children}"
                    )));
                }
                left.validate(feature_count)?;
                right.validate(feature_count)
            }
        }
    }
}

/// Boosted trees: `raw(x) = base_score + learning_rate * Σ tree(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsemble {
    pub base_score: f64,
    pub learning_rate: f64,
    pub feature_count: usize,
    #[serde(default)]
    pub feature_names: Vec<String>,
    pub trees: Vec<TreeNode>,
}

impl TreeEnsemble {
    pub fn new(base_score: f64, learning_rate: f64, feature_count: usize, trees: Vec<TreeNode>) -> Self {
        TreeEnsemble {
            base_score,
            learning_rate,
            feature_count,
            feature_names: Vec::new(),
            trees,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.base_score.is_finite() || !self.learning_rate.is_finite() {
            return Err(Error::MalformedTree("non-finite base score or learning rate".into()));
        }
        if !self.feature_names.is_empty() && self.feature_names.len() != self.feature_count {
            return Err(Error::MalformedTree(format!(
                "{} feature names for {} features",
                self.feature_names.len(),
                self.feature_count
            )));
        }
        self.trees.iter().try_for_each(|t| t.validate(self.feature_count))
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.feature_count {
            return Err(Error::Dimension {
                expected: self.feature_count,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Sum of shrunken tree outputs, without the base score.
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.trees
            .iter()
            .map(|t| self.learning_rate * t.predict(x))
            .sum()
    }

    /// Raw log-odds score.
    pub fn predict_raw(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.base_score + self.margin(x))
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        Ok(logistic(self.predict_raw(x)?))
    }

    pub fn predict_proba_batch(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|x| self.predict_proba(x)).collect()
    }

    pub fn classify(&self, x: &[f64], threshold: f64) -> Result<u8> {
        Ok(u8::from(self.predict_proba(x)? >= threshold))
    }

    /// Features referenced by at least one split.
    pub fn used_features(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for t in &self.trees {
            t.collect_features(&mut out);
        }
        out
    }
}

pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub num_trees: usize,
    pub max_leaves: usize,
    pub min_samples_leaf: usize,
    pub lambda: f64,
    pub learning_rate: f64,
    pub histogram_bins: usize,
    /// Weight of positive samples. `None` means negatives / positives.
    pub pos_weight: Option<f64>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            num_trees: 200,
            max_leaves: 15,
            min_samples_leaf: 5,
            lambda: 1.0,
            learning_rate: 0.1,
            histogram_bins: 64,
            pos_weight: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.num_trees < 1 {
            return bad("num_trees must be at least 1");
        }
        if self.max_leaves < 2 {
            return bad("max_leaves must be at least 2");
        }
        if self.min_samples_leaf < 1 {
            return bad("min_samples_leaf must be at least 1");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be a finite non-negative number");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must lie in (0, 1]");
        }
        if !(2..=256).contains(&self.histogram_bins) {
            return bad("histogram_bins must lie in [2, 256]");
        }
        if let Some(w) = self.pos_weight {
            if !(w > 0.0 && w.is_finite()) {
                return bad("pos_weight must be positive");
            }
        }
        Ok(())
    }

    /// The positive-class weight used for `labels`.
    pub fn resolved_pos_weight(&self, labels: &[u8]) -> f64 {
        self.pos_weight.unwrap_or_else(|| {
            let pos = labels.iter().filter(|&&y| y == 1).count();
            let neg = labels.len() - pos;
            if pos == 0 {
                1.0
            } else {
                neg as f64 / pos as f64
            }
        })
    }
}

/// Newton step for a leaf: `-G / (H + lambda)`.
pub fn leaf_weight(grad_sum: f64, hess_sum: f64, lambda: f64) -> Result<f64> {
    let denom = hess_sum + lambda;
    if !(denom > 0.0) {
        return Err(Error::Domain(format!("leaf hessian plus lambda is {denom}, must be positive")));
    }
    Ok(-grad_sum / denom)
}

/// Loss reduction from splitting a node into (L, R).
pub fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64) -> Result<f64> {
    let (dl, dr, dp) = (hl + lambda, hr + lambda, hl + hr + lambda);
    if !(dl > 0.0 && dr > 0.0 && dp > 0.0) {
        return Err(Error::Domain(format!(
            "split gain needs positive hessian sums, got HL+λ={dl}, HR+λ={dr}"
        )));
    }
    let g = gl + gr;
    Ok(0.5 * (gl * gl / dl + gr * gr / dr - g * g / dp))
}

/// Per-feature candidate thresholds; bin `k` holds values in
/// `(t[k-1], t[k]]`.
#[derive(Debug, Clone)]
struct BinMapper {
    thresholds: Vec<f64>,
}

impl BinMapper {
    fn fit(values: &[f64], max_bins: usize) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut distinct = sorted.clone();
        distinct.dedup();
        let cut = |a: f64, b: f64| a + (b - a) / 2.0;
        let thresholds = if distinct.len() <= max_bins {
            distinct.windows(2).map(|w| cut(w[0], w[1])).collect()
        } else {
            let n = sorted.len();
            let mut out: Vec<f64> = Vec::with_capacity(max_bins - 1);
            for k in 1..max_bins {
                let v = sorted[(k * n / max_bins).min(n - 1)];
                let pos = distinct.partition_point(|&d| d <= v);
                if pos < distinct.len() {
                    let t = cut(v, distinct[pos]);
                    if out.last().map_or(true, |&last| t > last) {
                        out.push(t);
                    }
                }
            }
            out
        };
        BinMapper { thresholds }
    }

    fn n_bins(&self) -> usize {
        self.thresholds.len() + 1
    }

    fn bin(&self, v: f64) -> usize {
        self.thresholds.partition_point(|&t| t < v)
    }
}

#[derive(Debug, Clone, Copy)]
struct SplitChoice {
    gain: f64,
    feature: usize,
    bin: usize,
}

struct GrowingLeaf {
    rows: Vec<usize>,
    grad: f64,
    hess: f64,
    best: Option<SplitChoice>,
    slot: usize,
}

enum Slot {
    Leaf,
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

struct Grower<'a> {
    bins: &'a [Vec<u16>],
    mappers: &'a [BinMapper],
    grad: &'a [f64],
    hess: &'a [f64],
    config: &'a TrainConfig,
}

impl Grower<'_> {
    fn best_split(&self, rows: &[usize], grad: f64, hess: f64) -> Option<SplitChoice> {
        let min_leaf = self.config.min_samples_leaf;
        if rows.len() < 2 * min_leaf {
            return None;
        }
        let lambda = self.config.lambda;
        let mut best: Option<SplitChoice> = None;
        for (f, mapper) in self.mappers.iter().enumerate() {
            let nb = mapper.n_bins();
            if nb < 2 {
                continue;
            }
            let mut hg = vec![0.0; nb];
            let mut hh = vec![0.0; nb];
            let mut hc = vec![0usize; nb];
            for &i in rows {
                let b = self.bins[i][f] as usize;
                hg[b] += self.grad[i];
                hh[b] += self.hess[i];
                hc[b] += 1;
            }
            let (mut gl, mut hl, mut cl) = (0.0, 0.0, 0usize);
            for b in 0..nb - 1 {
                gl += hg[b];
                hl += hh[b];
                cl += hc[b];
                let cr = rows.len() - cl;
                if cl < min_leaf {
                    continue;
                }
                if cr < min_leaf {
                    break;
                }
                let Ok(gain) = split_gain(gl, hl, grad - gl, hess - hl, lambda) else {
                    continue;
                };
                if gain > MIN_SPLIT_GAIN && best.map_or(true, |b| gain > b.gain) {
                    best = Some(SplitChoice { gain, feature: f, bin: b });
                }
            }
        }
        best
    }

    fn leaf(&self, rows: Vec<usize>, slot: usize) -> GrowingLeaf {
        let grad: f64 = rows.iter().map(|&i| self.grad[i]).sum();
        let hess: f64 = rows.iter().map(|&i| self.hess[i]).sum();
        let best = self.best_split(&rows, grad, hess);
        GrowingLeaf {
            rows,
            grad,
            hess,
            best,
            slot,
        }
    }

    /// Grows one tree and returns it with the leaf value of every row.
    fn grow(&self, n_rows: usize) -> (TreeNode, Vec<f64>) {
        let mut slots = vec![Slot::Leaf];
        let mut leaves = vec![self.leaf((0..n_rows).collect(), 0)];
        while leaves.len() < self.config.max_leaves {
            let mut pick: Option<(usize, f64)> = None;
            for (li, leaf) in leaves.iter().enumerate() {
                if let Some(c) = leaf.best {
                    if pick.map_or(true, |(_, g)| c.gain > g) {
                        pick = Some((li, c.gain));
                    }
                }
            }
            let Some((li, _)) = pick else { break };
            let parent = leaves.remove(li);
            let choice = parent.best.expect("picked leaf has a split");
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = parent
                .rows
                .iter()
                .partition(|&&i| (self.bins[i][choice.feature] as usize) <= choice.bin);
            let (ls, rs) = (slots.len(), slots.len() + 1);
            slots.push(Slot::Leaf);
            slots.push(Slot::Leaf);
            slots[parent.slot] = Slot::Split {
                feature: choice.feature,
                threshold: self.mappers[choice.feature].thresholds[choice.bin],
                left: ls,
                right: rs,
            };
            // creation order: equal gains resolve to the older leaf
            leaves.push(self.leaf(left_rows, ls));
            leaves.push(self.leaf(right_rows, rs));
        }

        let mut row_values = vec![0.0; n_rows];
        let mut leaf_nodes: Vec<Option<(f64, f64)>> = (0..slots.len()).map(|_| None).collect();
        for leaf in &leaves {
            let value = leaf_weight(leaf.grad, leaf.hess, self.config.lambda).unwrap_or(0.0);
            for &i in &leaf.rows {
                row_values[i] = value;
            }
            leaf_nodes[leaf.slot] = Some((value, leaf.rows.len() as f64));
        }
        (assemble(&slots, &leaf_nodes, 0), row_values)
    }
}

fn assemble(slots: &[Slot], leaves: &[Option<(f64, f64)>], at: usize) -> TreeNode {
    match slots[at] {
        Slot::Leaf => {
            let (value, cover) = leaves[at].expect("every leaf slot is filled");
            TreeNode::leaf(value, cover)
        }
        Slot::Split {
            feature,
            threshold,
            left,
            right,
        } => TreeNode::split(
            feature,
            threshold,
            assemble(slots, leaves, left),
            assemble(slots, leaves, right),
        ),
    }
}

/// Weighted mean logistic loss of raw scores.
pub fn weighted_log_loss(raw: &[f64], labels: &[u8], pos_weight: f64) -> f64 {
    let mut total = 0.0;
    let mut wsum = 0.0;
    for (&z, &y) in raw.iter().zip(labels) {
        let w = if y == 1 { pos_weight } else { 1.0 };
        // log(1 + e^z) - y z, computed stably
        let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
        total += w * (softplus - f64::from(y) * z);
        wsum += w;
    }
    total / wsum
}

fn check_training_data(features: &[Vec<f64>], labels: &[u8]) -> Result<usize> {
    if features.len() != labels.len() {
        return Err(Error::Dimension {
            expected: features.len(),
            got: labels.len(),
        });
    }
    if features.len() < 2 {
        return Err(Error::Domain("training needs at least 2 rows".into()));
    }
    let m = features[0].len();
    for row in features {
        if row.len() != m {
            return Err(Error::Dimension {
                expected: m,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("training features must be finite".into()));
        }
    }
    if let Some(&y) = labels.iter().find(|&&y| y > 1) {
        return Err(Error::Domain(format!("label {y} is not 0/1")));
    }
    let pos = labels.iter().filter(|&&y| y == 1).count();
    if pos == 0 || pos == labels.len() {
        let which = if pos == 0 { "all 0" } else { "all 1" };
        return Err(Error::SingleClass(which.into()));
    }
    Ok(m)
}

/// Row order used for training: lexicographic on (features, label).
fn canonical_order(features: &[Vec<f64>], labels: &[u8]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..features.len()).collect();
    order.sort_by(|&a, &b| {
        features[a]
            .iter()
            .zip(&features[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
            .then(labels[a].cmp(&labels[b]))
    });
    order
}

pub fn train_gbdt(features: &[Vec<f64>], labels: &[u8], config: &TrainConfig) -> Result<TreeEnsemble> {
    train_gbdt_traced(features, labels, config).map(|(e, _)| e)
}

/// Trains and also returns the weighted training loss before the first tree
/// and after each tree.
pub fn train_gbdt_traced(
    features: &[Vec<f64>],
    labels: &[u8],
    config: &TrainConfig,
) -> Result<(TreeEnsemble, Vec<f64>)> {
    config.validate()?;
    let m = check_training_data(features, labels)?;
    if features.len() < config.min_samples_leaf {
        return Err(Error::Domain(format!(
            "{} rows is fewer than min_samples_leaf = {}",
            features.len(),
            config.min_samples_leaf
        )));
    }
    let order = canonical_order(features, labels);
    let x: Vec<&[f64]> = order.iter().map(|&i| features[i].as_slice()).collect();
    let y: Vec<u8> = order.iter().map(|&i| labels[i]).collect();
    let n = x.len();

    let pos_weight = config.resolved_pos_weight(&y);
    let w: Vec<f64> = y.iter().map(|&v| if v == 1 { pos_weight } else { 1.0 }).collect();
    let (wpos, wneg) = y.iter().zip(&w).fold((0.0, 0.0), |(p, q), (&v, &wi)| {
        if v == 1 {
            (p + wi, q)
        } else {
            (p, q + wi)
        }
    });
    let base_score = (wpos / wneg).ln();

    let mappers: Vec<BinMapper> = (0..m)
        .map(|f| {
            let col: Vec<f64> = x.iter().map(|r| r[f]).collect();
            BinMapper::fit(&col, config.histogram_bins)
        })
        .collect();
    let bins: Vec<Vec<u16>> = x
        .iter()
        .map(|r| mappers.iter().enumerate().map(|(f, mp)| mp.bin(r[f]) as u16).collect())
        .collect();

    let mut margin = vec![0.0; n];
    let mut raw = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut trees = Vec::with_capacity(config.num_trees);
    let mut losses = vec![weighted_log_loss(&raw, &y, pos_weight)];
    for _ in 0..config.num_trees {
        for i in 0..n {
            let p = logistic(raw[i]);
            grad[i] = w[i] * (p - f64::from(y[i]));
            hess[i] = w[i] * p * (1.0 - p);
        }
        let grower = Grower {
            bins: &bins,
            mappers: &mappers,
            grad: &grad,
            hess: &hess,
            config,
        };
        let (tree, values) = grower.grow(n);
        for i in 0..n {
            margin[i] += config.learning_rate * values[i];
            raw[i] = base_score + margin[i];
        }
        losses.push(weighted_log_loss(&raw, &y, pos_weight));
        trees.push(tree);
    }
    let ensemble = TreeEnsemble::new(base_score, config.learning_rate, m, trees);
    Ok((ensemble, losses))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn predict_raw(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::Dimension {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        Ok(self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        Ok(logistic(self.predict_raw(x)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    pub l2: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            l2: 1e-3,
            epochs: 500,
            learning_rate: 0.1,
            seed: 0,
        }
    }
}

pub fn train_logistic(features: &[Vec<f64>], labels: &[u8], config: &LogisticConfig) -> Result<LinearModel> {
    train_logistic_traced(features, labels, config).map(|(m, _)| m)
}

/// Full-batch gradient descent on the L2-regularized mean logistic loss.
///
/// Features are standardized internally; the returned coefficients are in
/// the original feature units. The trace holds the objective per epoch.
pub fn train_logistic_traced(
    features: &[Vec<f64>],
    labels: &[u8],
    config: &LogisticConfig,
) -> Result<(LinearModel, Vec<f64>)> {
    let m = check_training_data(features, labels)?;
    if !(config.l2 >= 0.0 && config.learning_rate > 0.0 && config.epochs >= 1) {
        return Err(Error::Config("logistic config needs l2 >= 0, lr > 0, epochs >= 1".into()));
    }
    let n = features.len() as f64;
    let mean: Vec<f64> = (0..m).map(|j| features.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let scale: Vec<f64> = (0..m)
        .map(|j| {
            let var = features.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
            if var > 0.0 {
                var.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let z: Vec<Vec<f64>> = features
        .iter()
        .map(|r| (0..m).map(|j| (r[j] - mean[j]) / scale[j]).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init = Normal::new(0.0, 0.01).expect("valid normal");
    let mut w: Vec<f64> = (0..m).map(|_| init.sample(&mut rng)).collect();
    let mut b = 0.0;

    let objective = |w: &[f64], b: f64| -> f64 {
        let raw: Vec<f64> = z
            .iter()
            .map(|r| b + r.iter().zip(w).map(|(a, c)| a * c).sum::<f64>())
            .collect();
        weighted_log_loss(&raw, labels, 1.0) + 0.5 * config.l2 * w.iter().map(|v| v * v).sum::<f64>()
    };

    let mut trace = Vec::with_capacity(config.epochs + 1);
    trace.push(objective(&w, b));
    for _ in 0..config.epochs {
        let mut gw = vec![0.0; m];
        let mut gb = 0.0;
        for (r, &y) in z.iter().zip(labels) {
            let p = logistic(b + r.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>());
            let e = p - f64::from(y);
            gb += e;
            for (g, a) in gw.iter_mut().zip(r) {
                *g += e * a;
            }
        }
        for (wj, g) in w.iter_mut().zip(&gw) {
            *wj -= config.learning_rate * (g / n + config.l2 * *wj);
        }
        b -= config.learning_rate * gb / n;
        let loss = objective(&w, b);
        if !loss.is_finite() {
            return Err(Error::Diverged(format!(
                "logistic loss became {loss}; use a smaller learning rate"
            )));
        }
        trace.push(loss);
    }
    let weights: Vec<f64> = w.iter().zip(&scale).map(|(wj, s)| wj / s).collect();
    let bias = b - weights.iter().zip(&mean).map(|(wj, mu)| wj * mu).sum::<f64>();
    Ok((LinearModel { weights, bias }, trace))
}
