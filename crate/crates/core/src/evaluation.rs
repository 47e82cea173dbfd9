//! ROC/AUC, confusion-matrix metrics and stratified splitting.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boosted_trees::{train_gbdt, TrainConfig};
use crate::data_model::Cohort;
use crate::error::{Error, Result};

fn class_sizes(scores: &[f64], labels: &[u8]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            expected: scores.len(),
            got: labels.len(),
        });
    }
    let pos = labels.iter().filter(|&&y| y == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        let which = if pos == 0 { "no positives" } else { "no negatives" };
        return Err(Error::SingleClass(which.into()));
    }
    Ok((pos, neg))
}

/// Mann-Whitney AUC: the fraction of (positive, negative) pairs in which
/// the positive scores higher, ties counting one half. Computed from
/// mid-ranks in `O(n log n)`.
pub fn auc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (pos, neg) = class_sizes(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let mid = (i + j + 2) as f64 / 2.0;
        let tied_pos = order[i..=j].iter().filter(|&&k| labels[k] == 1).count();
        rank_sum += mid * tied_pos as f64;
        i = j + 1;
    }
    let u = rank_sum - (pos * (pos + 1)) as f64 / 2.0;
    Ok(u / (pos as f64 * neg as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores `>= threshold` are called positive. The origin uses `+inf`.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

impl RocCurve {
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["threshold", "fpr", "tpr"])?;
        for p in &self.points {
            w.write_record([format!("{}", p.threshold), format!("{}", p.fpr), format!("{}", p.tpr)])?;
        }
        w.flush().map_err(|e| Error::io("<roc>", e))?;
        Ok(())
    }

    /// Threshold maximizing `tpr - fpr` (first on ties, i.e. the highest).
    pub fn youden_threshold(&self) -> f64 {
        let mut best = (f64::NEG_INFINITY, f64::INFINITY);
        for p in &self.points {
            let j = p.tpr - p.fpr;
            if j > best.0 {
                best = (j, p.threshold);
            }
        }
        best.1
    }
}

/// ROC curve over distinct score thresholds, descending; the area is the
/// trapezoidal integral of the points.
pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<RocCurve> {
    let (pos, neg) = class_sizes(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint {
        fpr: 0.0,
        tpr: 0.0,
        threshold: f64::INFINITY,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
            threshold: t,
        });
    }
    let mut area = 0.0;
    for w in points.windows(2) {
        area += (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0;
    }
    Ok(RocCurve { points, auc: area })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: Confusion,
    pub threshold: f64,
    /// Metrics whose denominator was zero and were reported as 0.
    pub undefined: Vec<String>,
}

pub fn confusion_metrics(c: Confusion, threshold: f64) -> Metrics {
    let mut undefined = Vec::new();
    let mut ratio = |num: usize, den: usize, name: &str| {
        if den == 0 {
            undefined.push(name.to_string());
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let total = c.tp + c.fp + c.tn + c.fn_;
    let accuracy = ratio(c.tp + c.tn, total, "accuracy");
    let precision = ratio(c.tp, c.tp + c.fp, "precision");
    let recall = ratio(c.tp, c.tp + c.fn_, "recall");
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        undefined.push("f1".into());
        0.0
    };
    Metrics {
        accuracy,
        precision,
        recall,
        f1,
        confusion: c,
        threshold,
        undefined,
    }
}

/// Confusion-matrix metrics with risk (1) as the positive class; a score
/// at or above `threshold` predicts risk.
pub fn classification_metrics(scores: &[f64], labels: &[u8], threshold: f64) -> Result<Metrics> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension {
            expected: scores.len(),
            got: labels.len(),
        });
    }
    let mut c = Confusion {
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for (&s, &y) in scores.iter().zip(labels) {
        match (s >= threshold, y == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(confusion_metrics(c, threshold))
}

/// Splits each class separately: `round(n_c * test_fraction)` members of
/// class `c` (at least one, at most `n_c - 1`) go to the test side. Both
/// sides keep the cohort's row order.
pub fn stratified_split(cohort: &Cohort, test_fraction: f64, seed: u64) -> Result<(Cohort, Cohort)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!("test fraction {test_fraction} must lie in (0, 1)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_test = vec![false; cohort.len()];
    for class in [0u8, 1] {
        let mut members: Vec<usize> = cohort
            .rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.label == class)
            .map(|(i, _)| i)
            .collect();
        if members.len() < 2 {
            return Err(Error::Domain(format!(
                "class {class} has {} member(s); stratified splitting needs at least 2",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        let k = ((members.len() as f64 * test_fraction).round() as usize).clamp(1, members.len() - 1);
        for &i in &members[..k] {
            in_test[i] = true;
        }
    }
    let (test, train): (Vec<usize>, Vec<usize>) = (0..cohort.len()).partition(|&i| in_test[i]);
    Ok((cohort.subset(&train), cohort.subset(&test)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    pub confusion: Confusion,
    pub threshold: f64,
    /// For reference only; headline metrics use `threshold`.
    pub youden_threshold: f64,
    pub undefined: Vec<String>,
    pub split_descriptor: String,
}

impl EvalReport {
    pub fn from_scores(scores: &[f64], labels: &[u8], threshold: f64, split_descriptor: &str) -> Result<Self> {
        let m = classification_metrics(scores, labels, threshold)?;
        let roc = roc_curve(scores, labels)?;
        Ok(EvalReport {
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            auc: roc.auc,
            confusion: m.confusion,
            threshold,
            youden_threshold: roc.youden_threshold(),
            undefined: m.undefined,
            split_descriptor: split_descriptor.to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MeanSd { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub runs: Vec<EvalReport>,
    pub accuracy: MeanSd,
    pub precision: MeanSd,
    pub recall: MeanSd,
    pub f1: MeanSd,
    pub auc: MeanSd,
    pub protocol: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Protocol {
    pub runs: usize,
    pub test_fraction: f64,
    pub first_seed: u64,
    pub threshold: f64,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            runs: 5,
            test_fraction: 0.25,
            first_seed: 0,
            threshold: 0.5,
        }
    }
}

/// Repeated stratified hold-out evaluation of the boosted classifier.
pub fn evaluate_gbdt(cohort: &Cohort, config: &TrainConfig, protocol: &Protocol) -> Result<(EvalSummary, RocCurve)> {
    if protocol.runs == 0 {
        return Err(Error::Config("protocol needs at least one run".into()));
    }
    let mut runs = Vec::with_capacity(protocol.runs);
    let mut first_roc = None;
    for r in 0..protocol.runs {
        let seed = protocol.first_seed + r as u64;
        let (train, test) = stratified_split(cohort, protocol.test_fraction, seed)?;
        let model = train_gbdt(&train.features(), &train.labels(), config)?;
        let scores = model.predict_proba_batch(&test.features())?;
        let descriptor = format!(
            "stratified hold-out, test fraction {}, split seed {seed}, train {} / test {} rows",
            protocol.test_fraction,
            train.len(),
            test.len()
        );
        let report = EvalReport::from_scores(&scores, &test.labels(), protocol.threshold, &descriptor)?;
        if first_roc.is_none() {
            first_roc = Some(roc_curve(&scores, &test.labels())?);
        }
        runs.push(report);
    }
    let stat = |f: fn(&EvalReport) -> f64| MeanSd::of(&runs.iter().map(f).collect::<Vec<_>>());
    let summary = EvalSummary {
        accuracy: stat(|r| r.accuracy),
        precision: stat(|r| r.precision),
        recall: stat(|r| r.recall),
        f1: stat(|r| r.f1),
        auc: stat(|r| r.auc),
        protocol: format!(
            "{} runs of stratified {:.0}/{:.0} split, seeds {}..{}, threshold {}",
            protocol.runs,
            (1.0 - protocol.test_fraction) * 100.0,
            protocol.test_fraction * 100.0,
            protocol.first_seed,
            protocol.first_seed + protocol.runs as u64 - 1,
            protocol.threshold
        ),
        runs,
    };
    Ok((summary, first_roc.expect("at least one run")))
}
