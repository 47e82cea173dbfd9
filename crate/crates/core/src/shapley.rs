//! Shapley-value attributions for boosted-tree predictions.
//!
//! Three routes produce the same [`Explanation`] contract, all in raw
//! log-odds units:
//!
//! * [`exact_shapley`] enumerates every coalition of the features the
//!   ensemble actually uses, with the cover-weighted conditional
//!   expectation of [`tree_conditional_expectation`] as value function;
//! * [`tree_shap`] is the polynomial-time path-dependent recursion and must
//!   agree with the enumeration;
//! * [`sampled_shapley`] is model-agnostic permutation sampling against a
//!   background set.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boosted_trees::{TreeEnsemble, TreeNode};
use crate::error::{Error, Result};

/// Largest number of used features [`exact_shapley`] will enumerate.
pub const EXACT_FEATURE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub sample_id: String,
    pub base_value: f64,
    pub phi: Vec<f64>,
    pub output: f64,
    /// Residual spread over `phi` to restore efficiency (sampled route only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub efficiency_correction: Option<f64>,
    /// Monte Carlo standard error per feature (sampled route only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standard_errors: Option<Vec<f64>>,
}

impl Explanation {
    /// `output - (base_value + Σ phi)`.
    pub fn efficiency_gap(&self) -> f64 {
        self.output - (self.base_value + self.phi.iter().sum::<f64>())
    }

    pub fn with_id(mut self, id: &str) -> Self {
        self.sample_id = id.to_string();
        self
    }

    /// The JSON record `{sample_id, base_value, output, phi: {name: value}}`.
    pub fn to_record(&self, feature_names: &[String]) -> Result<ExplanationRecord> {
        if feature_names.len() != self.phi.len() {
            return Err(Error::Dimension {
                expected: self.phi.len(),
                got: feature_names.len(),
            });
        }
        Ok(ExplanationRecord {
            sample_id: self.sample_id.clone(),
            base_value: self.base_value,
            output: self.output,
            phi: feature_names.iter().cloned().zip(self.phi.iter().copied()).collect(),
        })
    }

    pub fn from_record(record: &ExplanationRecord, feature_names: &[String]) -> Result<Self> {
        let phi = feature_names
            .iter()
            .map(|n| {
                record.phi.get(n).copied().ok_or_else(|| Error::UnknownFeature {
                    name: n.clone(),
                    valid: record.phi.keys().cloned().collect::<Vec<_>>().join(", "),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Explanation {
            sample_id: record.sample_id.clone(),
            base_value: record.base_value,
            phi,
            output: record.output,
            efficiency_correction: None,
            standard_errors: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationRecord {
    pub sample_id: String,
    pub base_value: f64,
    pub output: f64,
    pub phi: BTreeMap<String, f64>,
}

fn check_tree(node: &TreeNode) -> Result<()> {
    if let TreeNode::Split { cover, left, right, .. } = node {
        if !(*cover > 0.0) {
            return Err(Error::MalformedTree("internal node with zero cover".into()));
        }
        check_tree(left)?;
        check_tree(right)?;
    }
    Ok(())
}

fn check_ensemble(ensemble: &TreeEnsemble, x: &[f64]) -> Result<()> {
    if x.len() != ensemble.feature_count {
        return Err(Error::Dimension {
            expected: ensemble.feature_count,
            got: x.len(),
        });
    }
    ensemble.trees.iter().try_for_each(check_tree)
}

/// Expected tree output when only the features in `in_coalition` are known.
///
/// Splits on known features follow `x`; splits on unknown features average
/// both children weighted by cover.
pub fn tree_conditional_expectation(tree: &TreeNode, x: &[f64], in_coalition: &[bool]) -> Result<f64> {
    match tree {
        TreeNode::Leaf { value, .. } => Ok(*value),
        TreeNode::Split {
            feature,
            threshold,
            cover,
            left,
            right,
        } => {
            if in_coalition[*feature] {
                let next = if x[*feature] <= *threshold { left } else { right };
                tree_conditional_expectation(next, x, in_coalition)
            } else {
                if !(*cover > 0.0) {
                    return Err(Error::MalformedTree("internal node with zero cover".into()));
                }
                let l = tree_conditional_expectation(left, x, in_coalition)?;
                let r = tree_conditional_expectation(right, x, in_coalition)?;
                Ok((left.cover() * l + right.cover() * r) / cover)
            }
        }
    }
}

/// Ensemble value of a coalition: `base_score + lr * Σ_t E_t[f | x_S]`.
pub fn coalition_value(ensemble: &TreeEnsemble, x: &[f64], in_coalition: &[bool]) -> Result<f64> {
    let mut acc = 0.0;
    for t in &ensemble.trees {
        acc += ensemble.learning_rate * tree_conditional_expectation(t, x, in_coalition)?;
    }
    Ok(ensemble.base_score + acc)
}

/// Shapley values by full coalition enumeration over the used features.
pub fn exact_shapley(ensemble: &TreeEnsemble, x: &[f64]) -> Result<Explanation> {
    check_ensemble(ensemble, x)?;
    let used: Vec<usize> = ensemble.used_features().into_iter().collect();
    let mu = used.len();
    if mu > EXACT_FEATURE_LIMIT {
        return Err(Error::TooManyFeatures {
            used: mu,
            limit: EXACT_FEATURE_LIMIT,
        });
    }
    let m = ensemble.feature_count;
    let n_sets = 1usize << mu;
    let mut values = vec![0.0; n_sets];
    let mut mask = vec![false; m];
    for (s, value) in values.iter_mut().enumerate() {
        for (k, &f) in used.iter().enumerate() {
            mask[f] = s & (1 << k) != 0;
        }
        *value = coalition_value(ensemble, x, &mask)?;
    }
    // |S|! (M - |S| - 1)! / M!
    let mut fact = vec![1.0f64; mu + 1];
    for k in 1..=mu {
        fact[k] = fact[k - 1] * k as f64;
    }
    let weight: Vec<f64> = (0..mu.max(1))
        .map(|s| {
            if mu == 0 {
                0.0
            } else {
                fact[s] * fact[mu - s - 1] / fact[mu]
            }
        })
        .collect();
    let mut phi = vec![0.0; m];
    for (k, &f) in used.iter().enumerate() {
        let bit = 1usize << k;
        let mut acc = 0.0;
        for s in 0..n_sets {
            if s & bit == 0 {
                acc += weight[s.count_ones() as usize] * (values[s | bit] - values[s]);
            }
        }
        phi[f] = acc;
    }
    Ok(Explanation {
        sample_id: String::new(),
        base_value: values[0],
        phi,
        output: values[n_sets - 1],
        efficiency_correction: None,
        standard_errors: None,
    })
}

#[derive(Debug, Clone, Copy)]
struct PathElement {
    feature: Option<usize>,
    zero_fraction: f64,
    one_fraction: f64,
    weight: f64,
}

fn extend_path(path: &mut Vec<PathElement>, zero_fraction: f64, one_fraction: f64, feature: Option<usize>) {
    let depth = path.len();
    path.push(PathElement {
        feature,
        zero_fraction,
        one_fraction,
        weight: if depth == 0 { 1.0 } else { 0.0 },
    });
    let d1 = (depth + 1) as f64;
    for i in (0..depth).rev() {
        path[i + 1].weight += one_fraction * path[i].weight * (i + 1) as f64 / d1;
        path[i].weight = zero_fraction * path[i].weight * (depth - i) as f64 / d1;
    }
}

fn unwind_path(path: &mut Vec<PathElement>, index: usize) {
    let depth = path.len() - 1;
    let one = path[index].one_fraction;
    let zero = path[index].zero_fraction;
    let d1 = (depth + 1) as f64;
    let mut next_one = path[depth].weight;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = path[i].weight;
            path[i].weight = next_one * d1 / ((i + 1) as f64 * one);
            next_one = tmp - path[i].weight * zero * (depth - i) as f64 / d1;
        } else {
            path[i].weight = path[i].weight * d1 / (zero * (depth - i) as f64);
        }
    }
    for i in index..depth {
        path[i].feature = path[i + 1].feature;
        path[i].zero_fraction = path[i + 1].zero_fraction;
        path[i].one_fraction = path[i + 1].one_fraction;
    }
    path.pop();
}

/// Total permutation weight of the path with element `index` removed.
fn unwound_path_sum(path: &[PathElement], index: usize) -> f64 {
    let depth = path.len() - 1;
    let one = path[index].one_fraction;
    let zero = path[index].zero_fraction;
    let d1 = (depth + 1) as f64;
    let mut next_one = path[depth].weight;
    let mut total = 0.0;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = next_one * d1 / ((i + 1) as f64 * one);
            total += tmp;
            next_one = path[i].weight - tmp * zero * (depth - i) as f64 / d1;
        } else {
            total += path[i].weight / zero * d1 / (depth - i) as f64;
        }
    }
    total
}

fn tree_shap_recurse(
    node: &TreeNode,
    x: &[f64],
    phi: &mut [f64],
    mut path: Vec<PathElement>,
    zero_fraction: f64,
    one_fraction: f64,
    feature: Option<usize>,
) {
    extend_path(&mut path, zero_fraction, one_fraction, feature);
    match node {
        TreeNode::Leaf { value, .. } => {
            for i in 1..path.len() {
                let w = unwound_path_sum(&path, i);
                let el = path[i];
                if let Some(f) = el.feature {
                    phi[f] += w * (el.one_fraction - el.zero_fraction) * value;
                }
            }
        }
        TreeNode::Split {
            feature: split,
            threshold,
            cover,
            left,
            right,
        } => {
            let (hot, cold) = if x[*split] <= *threshold {
                (left, right)
            } else {
                (right, left)
            };
            let mut incoming_zero = 1.0;
            let mut incoming_one = 1.0;
            if let Some(k) = path.iter().position(|p| p.feature == Some(*split)) {
                incoming_zero = path[k].zero_fraction;
                incoming_one = path[k].one_fraction;
                unwind_path(&mut path, k);
            }
            tree_shap_recurse(
                hot,
                x,
                phi,
                path.clone(),
                hot.cover() / cover * incoming_zero,
                incoming_one,
                Some(*split),
            );
            tree_shap_recurse(
                cold,
                x,
                phi,
                path,
                cold.cover() / cover * incoming_zero,
                0.0,
                Some(*split),
            );
        }
    }
}

/// Path-dependent TreeSHAP summed over the ensemble.
pub fn tree_shap(ensemble: &TreeEnsemble, x: &[f64]) -> Result<Explanation> {
    check_ensemble(ensemble, x)?;
    let m = ensemble.feature_count;
    let mut phi = vec![0.0; m];
    let mut tree_phi = vec![0.0; m];
    let none = vec![false; m];
    let mut expected = 0.0;
    let mut output = 0.0;
    for tree in &ensemble.trees {
        tree_phi.iter_mut().for_each(|p| *p = 0.0);
        tree_shap_recurse(tree, x, &mut tree_phi, Vec::new(), 1.0, 1.0, None);
        for (p, t) in phi.iter_mut().zip(&tree_phi) {
            *p += ensemble.learning_rate * t;
        }
        expected += ensemble.learning_rate * tree_conditional_expectation(tree, x, &none)?;
        output += ensemble.learning_rate * tree.predict(x);
    }
    Ok(Explanation {
        sample_id: String::new(),
        base_value: ensemble.base_score + expected,
        phi,
        output: ensemble.base_score + output,
        efficiency_correction: None,
        standard_errors: None,
    })
}

/// Explains every row with [`tree_shap`].
pub fn explain_rows(ensemble: &TreeEnsemble, rows: &[Vec<f64>], ids: &[String]) -> Result<Vec<Explanation>> {
    rows.iter()
        .zip(ids)
        .map(|(x, id)| tree_shap(ensemble, x).map(|e| e.with_id(id)))
        .collect()
}

/// Monte Carlo permutation Shapley values for any scorer.
///
/// Each draw takes a random feature order and a random background row,
/// starts from the background row and switches features to `x` one by
/// one, crediting each change in score to the switched feature. The base
/// value is the mean score over the whole background. The leftover
/// `output - base - Σ phi` is spread over the features in proportion to
/// `|phi|` (evenly if all are zero) and reported as the correction.
pub fn sampled_shapley<F>(
    model: F,
    x: &[f64],
    background: &[Vec<f64>],
    n_permutations: usize,
    seed: u64,
) -> Result<Explanation>
where
    F: Fn(&[f64]) -> f64,
{
    if background.is_empty() {
        return Err(Error::Domain("sampled Shapley needs a non-empty background".into()));
    }
    if n_permutations == 0 {
        return Err(Error::Config("n_permutations must be at least 1".into()));
    }
    let m = x.len();
    if let Some(row) = background.iter().find(|r| r.len() != m) {
        return Err(Error::Dimension {
            expected: m,
            got: row.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..m).collect();
    let mut sum = vec![0.0; m];
    let mut sum_sq = vec![0.0; m];
    let mut point = vec![0.0; m];
    for _ in 0..n_permutations {
        order.shuffle(&mut rng);
        let z = &background[rng.gen_range(0..background.len())];
        point.copy_from_slice(z);
        let mut prev = model(&point);
        for &j in &order {
            point[j] = x[j];
            let next = model(&point);
            let d = next - prev;
            sum[j] += d;
            sum_sq[j] += d * d;
            prev = next;
        }
    }
    let n = n_permutations as f64;
    let mut phi: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let standard_errors: Vec<f64> = sum
        .iter()
        .zip(&sum_sq)
        .map(|(s, q)| {
            let mean = s / n;
            let var = if n_permutations > 1 {
                ((q / n - mean * mean) * n / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            (var / n).sqrt()
        })
        .collect();

    let base_value = background.iter().map(|z| model(z)).sum::<f64>() / background.len() as f64;
    let output = model(x);
    let residual = output - base_value - phi.iter().sum::<f64>();
    let abs_total: f64 = phi.iter().map(|p| p.abs()).sum();
    if residual != 0.0 && m > 0 {
        if abs_total > 0.0 {
            let shares: Vec<f64> = phi.iter().map(|p| p.abs() / abs_total).collect();
            for (p, s) in phi.iter_mut().zip(shares) {
                *p += residual * s;
            }
        } else {
            phi.iter_mut().for_each(|p| *p += residual / m as f64);
        }
    }
    Ok(Explanation {
        sample_id: String::new(),
        base_value,
        phi,
        output,
        efficiency_correction: Some(residual),
        standard_errors: Some(standard_errors),
    })
}

/// Mean |phi| per feature over a set of explanations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalImportance {
    pub feature_names: Vec<String>,
    /// `(feature index, mean |phi|)`, descending; ties by index.
    pub ranking: Vec<(usize, f64)>,
    pub sample_ids: Vec<String>,
    pub per_sample: Vec<Vec<f64>>,
}

impl GlobalImportance {
    pub fn top(&self, k: usize) -> &[(usize, f64)] {
        &self.ranking[..k.min(self.ranking.len())]
    }

    pub fn rank_of(&self, feature: usize) -> Option<usize> {
        self.ranking.iter().position(|&(f, _)| f == feature)
    }

    pub fn mean_abs(&self, feature: usize) -> Option<f64> {
        self.ranking.iter().find(|&&(f, _)| f == feature).map(|&(_, v)| v)
    }

    pub fn name(&self, feature: usize) -> &str {
        &self.feature_names[feature]
    }

    /// CSV with header `feature,mean_abs_phi,rank` (rank from 1).
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["feature", "mean_abs_phi", "rank"])?;
        for (rank, &(f, v)) in self.ranking.iter().enumerate() {
            w.write_record([self.feature_names[f].clone(), format!("{v}"), (rank + 1).to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<importance>", e))?;
        Ok(())
    }
}

pub fn global_importance(explanations: &[Explanation], feature_names: &[String]) -> Result<GlobalImportance> {
    let first = explanations
        .first()
        .ok_or_else(|| Error::Domain("global importance of an empty explanation list".into()))?;
    let m = first.phi.len();
    if feature_names.len() != m {
        return Err(Error::Dimension {
            expected: m,
            got: feature_names.len(),
        });
    }
    if let Some(e) = explanations.iter().find(|e| e.phi.len() != m) {
        return Err(Error::Dimension {
            expected: m,
            got: e.phi.len(),
        });
    }
    let n = explanations.len() as f64;
    let mut ranking: Vec<(usize, f64)> = (0..m)
        .map(|f| (f, explanations.iter().map(|e| e.phi[f].abs()).sum::<f64>() / n))
        .collect();
    ranking.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(GlobalImportance {
        feature_names: feature_names.to_vec(),
        ranking,
        sample_ids: explanations.iter().map(|e| e.sample_id.clone()).collect(),
        per_sample: explanations.iter().map(|e| e.phi.clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stump(feature: usize, t: f64, a: (f64, f64), b: (f64, f64)) -> TreeNode {
        TreeNode::split(feature, t, TreeNode::leaf(a.0, a.1), TreeNode::leaf(b.0, b.1))
    }

    #[test]
    fn conditional_expectation_cases() {
        let tree = stump(0, 0.5, (2.0, 3.0), (-1.0, 1.0));
        let x = [1.0, 0.0];
        assert_eq!(tree_conditional_expectation(&tree, &x, &[true, true]).unwrap(), -1.0);
        let empty = tree_conditional_expectation(&tree, &x, &[false, false]).unwrap();
        assert!((empty - (3.0 * 2.0 + 1.0 * -1.0) / 4.0).abs() < 1e-15);

        // depth-2 fixture: root on f0, children on f1
        let t2 = TreeNode::split(
            0,
            0.0,
            stump(1, 0.0, (1.0, 2.0), (3.0, 6.0)),
            stump(1, 0.0, (-2.0, 1.0), (4.0, 3.0)),
        );
        let v = tree_conditional_expectation(&t2, &[-1.0, 5.0], &[true, false]).unwrap();
        assert!((v - (2.0 * 1.0 + 6.0 * 3.0) / 8.0).abs() < 1e-15);
        let v = tree_conditional_expectation(&t2, &[1.0, 5.0], &[true, false]).unwrap();
        assert!((v - (1.0 * -2.0 + 3.0 * 4.0) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn zero_cover_is_malformed() {
        let bad = TreeNode::Split {
            feature: 0,
            threshold: 0.0,
            cover: 0.0,
            left: Box::new(TreeNode::leaf(1.0, 0.0)),
            right: Box::new(TreeNode::leaf(2.0, 0.0)),
        };
        assert!(tree_conditional_expectation(&bad, &[0.0], &[false]).is_err());
        let e = TreeEnsemble::new(0.0, 1.0, 1, vec![bad]);
        assert!(matches!(tree_shap(&e, &[0.0]), Err(Error::MalformedTree(_))));
    }

    #[test]
    fn single_split_attribution() {
        let e = TreeEnsemble::new(0.3, 1.0, 3, vec![stump(1, 0.5, (2.0, 3.0), (-1.0, 1.0))]);
        let x = [9.0, 1.0, -4.0];
        let ex = exact_shapley(&e, &x).unwrap();
        let v_empty = (3.0 * 2.0 - 1.0) / 4.0;
        assert!((ex.phi[1] - (-1.0 - v_empty)).abs() < 1e-15);
        assert_eq!(ex.phi[0], 0.0);
        assert_eq!(ex.phi[2], 0.0);
        assert!((ex.base_value - (0.3 + v_empty)).abs() < 1e-15);
        let ts = tree_shap(&e, &x).unwrap();
        for (a, b) in ts.phi.iter().zip(&ex.phi) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn and_tree_symmetry() {
        let and = TreeNode::split(
            0,
            0.5,
            stump(1, 0.5, (0.0, 1.0), (0.0, 1.0)),
            stump(1, 0.5, (0.0, 1.0), (1.0, 1.0)),
        );
        let e = TreeEnsemble::new(0.0, 1.0, 2, vec![and]);
        let ex = exact_shapley(&e, &[1.0, 1.0]).unwrap();
        assert!((ex.phi[0] - ex.phi[1]).abs() < 1e-12);
        let ts = tree_shap(&e, &[1.0, 1.0]).unwrap();
        assert!((ts.phi[0] - ts.phi[1]).abs() < 1e-12);
        assert!((ts.phi[0] - 0.375).abs() < 1e-12);
    }

    #[test]
    fn empty_ensemble() {
        let e = TreeEnsemble::new(-1.5, 0.1, 3, vec![]);
        let ts = tree_shap(&e, &[0.0; 3]).unwrap();
        assert_eq!(ts.phi, vec![0.0; 3]);
        assert_eq!(ts.base_value, -1.5);
        assert_eq!(ts.output, -1.5);
        let ex = exact_shapley(&e, &[0.0; 3]).unwrap();
        assert_eq!(ex.phi, vec![0.0; 3]);
        assert_eq!(ex.base_value, -1.5);
    }

    #[test]
    fn repeated_feature_on_path() {
        // same feature split twice along a path exercises the unwind step
        let tree = TreeNode::split(
            0,
            0.5,
            stump(0, 0.2, (1.0, 2.0), (3.0, 3.0)),
            TreeNode::split(
                1,
                0.0,
                TreeNode::leaf(-2.0, 4.0),
                stump(0, 0.9, (5.0, 1.0), (7.0, 2.0)),
            ),
        );
        let e = TreeEnsemble::new(0.0, 1.0, 2, vec![tree]);
        for x in [[0.1, 0.0], [0.3, 1.0], [0.7, -1.0], [0.95, 1.0], [0.6, 2.0]] {
            let a = exact_shapley(&e, &x).unwrap();
            let b = tree_shap(&e, &x).unwrap();
            for (p, q) in a.phi.iter().zip(&b.phi) {
                assert!((p - q).abs() < 1e-12, "{x:?}: {a:?} vs {b:?}");
            }
            assert!(b.efficiency_gap().abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_constant_model() {
        let bg = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        let ex = sampled_shapley(|_| 2.5, &[0.0, 0.0], &bg, 10, 7).unwrap();
        assert_eq!(ex.phi, vec![0.0, 0.0]);
        assert_eq!(ex.base_value, 2.5);
        assert_eq!(ex.efficiency_correction, Some(0.0));
        assert!(sampled_shapley(|_| 0.0, &[0.0], &[], 10, 0).is_err());
    }

    #[test]
    fn sampled_is_deterministic_and_efficient() {
        let bg: Vec<Vec<f64>> = (0..20).map(|i| vec![f64::from(i), f64::from(i % 3)]).collect();
        let f = |x: &[f64]| x[0] * x[1] + 0.5 * x[0];
        let a = sampled_shapley(f, &[4.0, 2.0], &bg, 50, 3).unwrap();
        let b = sampled_shapley(f, &[4.0, 2.0], &bg, 50, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.efficiency_gap().abs() < 1e-9);
    }

    #[test]
    fn global_importance_ordering() {
        let names: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let mk = |phi: Vec<f64>| Explanation {
            sample_id: "s".into(),
            base_value: 0.0,
            output: phi.iter().sum(),
            phi,
            efficiency_correction: None,
            standard_errors: None,
        };
        let g = global_importance(&[mk(vec![0.1, -0.5, 0.2])], &names).unwrap();
        assert_eq!(g.ranking.iter().map(|r| r.0).collect::<Vec<_>>(), vec![1, 2, 0]);
        let z = global_importance(&[mk(vec![0.0; 3]), mk(vec![0.0; 3])], &names).unwrap();
        assert_eq!(z.ranking, vec![(0, 0.0), (1, 0.0), (2, 0.0)]);
        assert!(global_importance(&[], &names).is_err());
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "feature,mean_abs_phi,rank\nb,0.5,1\nc,0.2,2\na,0.1,3\n"
        );
    }

    #[test]
    fn record_round_trip() {
        let names: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
        let e = Explanation {
            sample_id: "s1".into(),
            base_value: -1.0,
            phi: vec![0.25, -0.5],
            output: -1.25,
            efficiency_correction: None,
            standard_errors: None,
        };
        let rec = e.to_record(&names).unwrap();
        assert_eq!(Explanation::from_record(&rec, &names).unwrap(), e);
    }
}
