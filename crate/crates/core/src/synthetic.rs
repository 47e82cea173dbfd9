//! Synthetic grade groups with planted risk effects.
//!
//! The generator samples student attributes, builds real dormitory and
//! learning-team layers, runs the centrality code on them, and draws risk
//! labels from a logistic model whose only non-zero terms are the planted
//! effects. Attribution methods can then be scored on whether they recover
//! the planted features.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::boosted_trees::logistic;
use crate::data_model::{Cohort, CohortRow, FeatureSchema, FeatureSpec};
use crate::error::{Error, Result};
use crate::interaction_network::{
    attach_centrality_features, graph_from_defs, InteractionGraph, LayerDef,
};
use crate::shapley::GlobalImportance;

/// Expected positive rate must match the target this closely after
/// intercept calibration.
pub const CALIBRATION_TOLERANCE: f64 = 0.01;
/// Realized positive rate must match the target this closely.
pub const REALIZED_TOLERANCE: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum EffectShape {
    /// `sign * strength * (x - mean) / sd` over the cohort.
    Linear,
    /// `sign * strength * [x > at]`.
    Threshold { at: f64 },
    /// `sign * strength * [x >= at]`; meant for ordinal codes.
    Step { at: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedEffect {
    pub feature: String,
    #[serde(flatten)]
    pub shape: EffectShape,
    pub strength: f64,
    /// +1 raises risk where the shape is active, -1 lowers it.
    pub direction: i8,
}

impl PlantedEffect {
    fn new(feature: &str, shape: EffectShape, strength: f64, direction: i8) -> Self {
        PlantedEffect {
            feature: feature.to_string(),
            shape,
            strength,
            direction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkSpec {
    /// Defaults to one dormitory per four students.
    pub n_dorms: Option<usize>,
    pub teams_per_student: usize,
    pub team_size: usize,
    /// Beta shape of the per-student probability of joining a team.
    pub engagement_alpha: f64,
    pub engagement_beta: f64,
    /// Mean probability of joining a team outside one's own class.
    pub mobility_rate: f64,
}

impl Default for NetworkSpec {
    fn default() -> Self {
        NetworkSpec {
            n_dorms: None,
            teams_per_student: 4,
            team_size: 5,
            engagement_alpha: 0.8,
            engagement_beta: 0.8,
            mobility_rate: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub n_students: usize,
    pub schema: FeatureSchema,
    pub planted_effects: Vec<PlantedEffect>,
    pub noise_features: Vec<String>,
    pub network: NetworkSpec,
    pub target_positive_rate: f64,
    pub seed: u64,
    pub cohort_tag: String,
}

/// The eight strongest predictors, with the partner-quality threshold at
/// 0.03 and the rear-seat step.
pub fn default_planted_effects() -> Vec<PlantedEffect> {
    use EffectShape::*;
    vec![
        PlantedEffect::new("EgnCnt", Threshold { at: 0.03 }, 6.0, -1),
        PlantedEffect::new("Seat", Step { at: 3.0 }, 4.0, 1),
        PlantedEffect::new("DrmStyle", Step { at: 2.0 }, 3.6, -1),
        PlantedEffect::new("ExamEnN", Linear, 2.0, -1),
        PlantedEffect::new("DgrCnt", Linear, 4.0, -1),
        PlantedEffect::new("Game", Linear, 2.0, 1),
        PlantedEffect::new("BtwnCnt", Linear, 3.0, 1),
        PlantedEffect::new("Truant", Linear, 2.0, 1),
    ]
}

/// Variables with no effect on risk.
pub const DEFAULT_NOISE_FEATURES: [&str; 6] = ["NonRsdnt", "WrkStdy", "Lpstck", "Leader", "Lover", "Smk"];

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_students: 96,
            schema: FeatureSchema::standard(),
            planted_effects: default_planted_effects(),
            noise_features: DEFAULT_NOISE_FEATURES.iter().map(|s| s.to_string()).collect(),
            network: NetworkSpec::default(),
            target_positive_rate: 0.155,
            seed: 0,
            cohort_tag: "synthetic".to_string(),
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        self.schema.validate()?;
        if self.n_students < 4 {
            return Err(Error::Config("n_students must be at least 4".into()));
        }
        if !(self.target_positive_rate > 0.0 && self.target_positive_rate < 1.0) {
            return Err(Error::Config("target_positive_rate must lie in (0, 1)".into()));
        }
        if self.network.team_size < 2 {
            return Err(Error::Config("team_size must be at least 2".into()));
        }
        let net = &self.network;
        if !(net.engagement_alpha > 0.0 && net.engagement_beta > 0.0) {
            return Err(Error::Config("engagement shape parameters must be positive".into()));
        }
        if !(0.0..1.0).contains(&net.mobility_rate) {
            return Err(Error::Config("mobility_rate must lie in [0, 1)".into()));
        }
        if self.network.n_dorms == Some(0) {
            return Err(Error::Config("n_dorms must be positive".into()));
        }
        let planted: BTreeSet<&str> = self.planted_effects.iter().map(|p| p.feature.as_str()).collect();
        if planted.len() != self.planted_effects.len() {
            return Err(Error::Config("a feature is planted more than once".into()));
        }
        for name in planted.iter().copied().chain(self.noise_features.iter().map(String::as_str)) {
            if self.schema.active_index(name).is_none() {
                return Err(Error::UnknownFeature {
                    name: name.to_string(),
                    valid: self.schema.active_names().join(", "),
                });
            }
        }
        if let Some(n) = self.noise_features.iter().find(|n| planted.contains(n.as_str())) {
            return Err(Error::Config(format!("{n} is both planted and noise")));
        }
        for p in &self.planted_effects {
            if !p.strength.is_finite() || p.strength < 0.0 || !(p.direction == 1 || p.direction == -1) {
                return Err(Error::Config(format!(
                    "effect on {} needs a finite non-negative strength and direction ±1",
                    p.feature
                )));
            }
        }
        Ok(())
    }

    fn n_dorms(&self) -> usize {
        self.network
            .n_dorms
            .unwrap_or_else(|| self.n_students.div_ceil(4))
            .min(self.n_students)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub planted_set: Vec<String>,
    pub noise_set: Vec<String>,
    pub intercept: f64,
    pub per_sample_logit: Vec<f64>,
    pub expected_positive_rate: f64,
    pub realized_positive_rate: f64,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub cohort: Cohort,
    pub layers: Vec<LayerDef>,
    pub graph: InteractionGraph,
    pub truth: GroundTruth,
}

fn categorical_weights(name: &str) -> Option<&'static [f64]> {
    Some(match name {
        "EntrnceTyp" => &[0.2, 0.8],
        "NonRsdnt" => &[0.85, 0.15],
        "GftedStdnt" => &[0.9, 0.1],
        "SftSp" => &[0.8, 0.2],
        "WrkStdy" => &[0.8, 0.2],
        "Smk" => &[0.75, 0.25],
        "Leader" => &[0.7, 0.22, 0.08],
        "BkBrrw" => &[0.3, 0.4, 0.2, 0.1],
        "Lover" => &[0.45, 0.3, 0.15, 0.1],
        "Lpstck" => &[0.4, 0.3, 0.2, 0.1],
        "Game" => &[0.25, 0.35, 0.25, 0.15],
        "PltclStts" => &[0.15, 0.7, 0.1, 0.05],
        "Seat" => &[0.15, 0.45, 0.4],
        "DrmStyle" => &[0.15, 0.35, 0.35, 0.15],
        _ => return None,
    })
}

fn pick<R: Rng>(rng: &mut R, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

fn code(spec: &FeatureSpec, index: usize) -> f64 {
    (spec.code_base + index as i64) as f64
}

/// (mean, sd, max) of the entrance-exam subject scores.
fn exam_distribution(name: &str) -> Option<(f64, f64, f64)> {
    Some(match name {
        "ExamCnN" => (81.7, 18.3, 150.0),
        "ExamEnN" => (66.7, 25.8, 150.0),
        "ExamMatN" => (55.4, 32.0, 150.0),
        "ExamProN" => (179.2, 46.5, 300.0),
        _ => return None,
    })
}

pub fn generate(spec: &SynthSpec) -> Result<SynthOutput> {
    spec.validate()?;
    let n = spec.n_students;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let width = n.to_string().len().max(4);
    let ids: Vec<String> = (1..=n).map(|i| format!("S{i:0width$}")).collect();
    let specs: Vec<&FeatureSpec> = spec.schema.active_specs().collect();
    let m = specs.len();
    let mut x = vec![vec![0.0; m]; n];
    let col = |name: &str| spec.schema.active_index(name);

    // exam subjects, then the total as their sum
    let mut subjects = Vec::new();
    for (j, s) in specs.iter().enumerate() {
        if let Some((mean, sd, max)) = exam_distribution(&s.name) {
            let normal: Normal<f64> = Normal::new(mean, sd).expect("valid normal");
            for row in x.iter_mut() {
                row[j] = normal.sample(&mut rng).clamp(0.0, max).round();
            }
            subjects.push(j);
        }
    }
    if let Some(j) = col("ExmSumN") {
        if subjects.is_empty() {
            let normal: Normal<f64> = Normal::new(383.1, 74.2).expect("valid normal");
            for row in x.iter_mut() {
                row[j] = normal.sample(&mut rng).clamp(0.0, 750.0).round();
            }
        } else {
            for row in x.iter_mut() {
                row[j] = subjects.iter().map(|&k| row[k]).sum();
            }
        }
    }

    // administrative classes are filled in descending English-score order
    let n_classes = n.div_ceil(30);
    let mut order: Vec<usize> = (0..n).collect();
    match col("ExamEnN") {
        Some(en) => order.sort_by(|&a, &b| x[b][en].total_cmp(&x[a][en]).then(a.cmp(&b))),
        None => order.shuffle(&mut rng),
    }
    let mut class_of = vec![0usize; n];
    for (rank, &i) in order.iter().enumerate() {
        class_of[i] = rank * n_classes / n;
    }
    if let Some(j) = col("Class") {
        let s = specs[j];
        for i in 0..n {
            x[i][j] = code(s, class_of[i].min(s.categories.len() - 1));
        }
    }

    // dormitories are allotted class by class, so most room-mates share a class
    let n_dorms = spec.n_dorms();
    let keys: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| class_of[a].cmp(&class_of[b]).then(keys[a].total_cmp(&keys[b])));
    let mut dorm_of = vec![0usize; n];
    for (k, &i) in order.iter().enumerate() {
        dorm_of[i] = k * n_dorms / n;
    }

    // dormitory atmosphere is shared by room-mates
    if let Some(j) = col("DrmStyle") {
        let s = specs[j];
        let weights = categorical_weights("DrmStyle").filter(|w| w.len() == s.categories.len());
        let dorm_style: Vec<usize> = (0..n_dorms)
            .map(|_| match weights {
                Some(w) => pick(&mut rng, w),
                None => rng.gen_range(0..s.categories.len()),
            })
            .collect();
        for i in 0..n {
            x[i][j] = code(s, dorm_style[dorm_of[i]]);
        }
    }

    let seat_col = col("Seat");
    for (j, s) in specs.iter().enumerate() {
        if s.derived || s.name == "DrmStyle" || s.name == "Class" || s.name == "ExmSumN" {
            continue;
        }
        if exam_distribution(&s.name).is_some() {
            continue;
        }
        if s.name == "Truant" {
            continue;
        }
        for i in 0..n {
            x[i][j] = match s.kind {
                crate::data_model::FeatureKind::Numeric => Normal::new(0.0, 1.0).expect("valid normal").sample(&mut rng),
                crate::data_model::FeatureKind::Categorical => {
                    let idx = match categorical_weights(&s.name).filter(|w| w.len() == s.categories.len()) {
                        Some(w) => pick(&mut rng, w),
                        None => rng.gen_range(0..s.categories.len()),
                    };
                    code(s, idx)
                }
            };
        }
    }
    // truancy leans towards the back rows
    if let Some(j) = col("Truant") {
        let s = specs[j];
        for i in 0..n {
            let rear = seat_col.is_some_and(|sc| specs[sc].category_index(x[i][sc]) == Some(2));
            let w: &[f64] = if rear { &[0.25, 0.35, 0.25, 0.15] } else { &[0.35, 0.35, 0.2, 0.1] };
            let idx = if s.categories.len() == w.len() {
                pick(&mut rng, w)
            } else {
                rng.gen_range(0..s.categories.len())
            };
            x[i][j] = code(s, idx);
        }
    }

    let layers = build_layers(spec, &ids, &dorm_of, &class_of, &mut rng);
    let graph = graph_from_defs(&layers, &ids)?;
    let rows: Vec<CohortRow> = ids
        .iter()
        .zip(x)
        .map(|(id, features)| CohortRow {
            student_id: id.clone(),
            features,
            label: 0,
        })
        .collect();
    let unlabeled = Cohort::new(spec.schema.clone(), rows, &spec.cohort_tag)?;
    let mut cohort = if specs.iter().any(|s| s.derived) {
        attach_centrality_features(&unlabeled, &graph)?
    } else {
        unlabeled
    };

    let effects = planted_logits(spec, &cohort)?;
    let uniforms: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let target = spec.target_positive_rate;
    let expected_rate = |b: f64| effects.iter().map(|e| logistic(b + e)).sum::<f64>() / n as f64;
    let mut intercept = bisect_increasing(expected_rate, target, 1e-12)
        .ok_or_else(|| Error::Domain(format!("cannot calibrate the intercept to a positive rate of {target}")))?;
    let expected = expected_rate(intercept);
    if (expected - target).abs() > CALIBRATION_TOLERANCE {
        return Err(Error::Domain(format!(
            "calibrated expected positive rate {expected} misses the target {target}"
        )));
    }
    let draw = |b: f64| -> Vec<u8> {
        effects
            .iter()
            .zip(&uniforms)
            .map(|(e, u)| u8::from(*u < logistic(b + e)))
            .collect()
    };
    let rate = |labels: &[u8]| labels.iter().map(|&y| f64::from(y)).sum::<f64>() / n as f64;
    let mut labels = draw(intercept);
    if (rate(&labels) - target).abs() > REALIZED_TOLERANCE {
        // keep the same uniforms and move the intercept until the realized
        // rate lands on the target count
        let goal = (target * n as f64).round() / n as f64;
        let realized = |b: f64| rate(&draw(b));
        if let Some(b) = bisect_increasing(realized, goal, 0.0) {
            intercept = b;
            labels = draw(intercept);
        }
        if (rate(&labels) - target).abs() > REALIZED_TOLERANCE {
            return Err(Error::Domain(format!(
                "realized positive rate {} cannot be brought within {REALIZED_TOLERANCE} of {target}",
                rate(&labels)
            )));
        }
    }
    for (row, &y) in cohort.rows.iter_mut().zip(&labels) {
        row.label = y;
    }
    let truth = GroundTruth {
        planted_set: spec.planted_effects.iter().map(|p| p.feature.clone()).collect(),
        noise_set: spec.noise_features.clone(),
        intercept,
        per_sample_logit: effects.iter().map(|e| intercept + e).collect(),
        expected_positive_rate: expected_rate(intercept),
        realized_positive_rate: rate(&labels),
    };
    Ok(SynthOutput {
        cohort,
        layers,
        graph,
        truth,
    })
}

/// Smallest `b` in [-60, 60] (to bisection precision) with `f(b) >= target`
/// for a non-decreasing `f`; `None` if the target is out of reach.
fn bisect_increasing(f: impl Fn(f64) -> f64, target: f64, tol: f64) -> Option<f64> {
    let (mut lo, mut hi) = (-60.0, 60.0);
    if f(lo) > target + tol || f(hi) < target - tol {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Some(hi)
}

/// Sum of planted effects per student, without the intercept.
fn planted_logits(spec: &SynthSpec, cohort: &Cohort) -> Result<Vec<f64>> {
    let mut total = vec![0.0; cohort.len()];
    for p in &spec.planted_effects {
        let values = cohort.column(&p.feature).ok_or_else(|| Error::UnknownFeature {
            name: p.feature.clone(),
            valid: cohort.feature_names().join(", "),
        })?;
        let sign = f64::from(p.direction) * p.strength;
        match p.shape {
            EffectShape::Linear => {
                let n = values.len() as f64;
                let mean = values.iter().sum::<f64>() / n;
                let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
                if sd > 0.0 {
                    for (t, v) in total.iter_mut().zip(&values) {
                        *t += sign * (v - mean) / sd;
                    }
                }
            }
            EffectShape::Threshold { at } => {
                for (t, v) in total.iter_mut().zip(&values) {
                    if *v > at {
                        *t += sign;
                    }
                }
            }
            EffectShape::Step { at } => {
                for (t, v) in total.iter_mut().zip(&values) {
                    if *v >= at {
                        *t += sign;
                    }
                }
            }
        }
    }
    Ok(total)
}

/// One dormitory layer plus `teams_per_student` team layers. Each student
/// joins a team in a given layer with their own engagement probability,
/// and when they do, picks a team outside their class with their own
/// mobility probability. Teams are cut from the shuffled pool of each
/// class.
fn build_layers<R: Rng>(
    spec: &SynthSpec,
    ids: &[String],
    dorm_of: &[usize],
    class_of: &[usize],
    rng: &mut R,
) -> Vec<LayerDef> {
    let n = ids.len();
    let n_classes = class_of.iter().max().map_or(1, |c| c + 1);
    let mut dorms: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, &d) in dorm_of.iter().enumerate() {
        dorms.entry(format!("D{:03}", d + 1)).or_default().push(ids[i].clone());
    }
    let mut layers = vec![LayerDef {
        layer_name: "dormitory".into(),
        weight: 1.0,
        groups: dorms,
    }];
    let net = &spec.network;
    let engagement_dist = Beta::new(net.engagement_alpha, net.engagement_beta).expect("valid beta");
    let engagement: Vec<f64> = (0..n).map(|_| engagement_dist.sample(rng)).collect();
    let mobility: Vec<f64> = if net.mobility_rate > 0.0 && n_classes > 1 {
        let b = Beta::new(1.0, (1.0 - net.mobility_rate) / net.mobility_rate).expect("valid beta");
        (0..n).map(|_| b.sample(rng)).collect()
    } else {
        vec![0.0; n]
    };
    for t in 0..net.teams_per_student {
        let mut pools: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
        for i in 0..n {
            if rng.gen::<f64>() >= engagement[i] {
                continue;
            }
            let mut pool = class_of[i];
            if rng.gen::<f64>() < mobility[i] {
                pool = (pool + rng.gen_range(1..n_classes)) % n_classes;
            }
            pools[pool].push(i);
        }
        let mut groups = BTreeMap::new();
        for (c, pool) in pools.iter_mut().enumerate() {
            pool.shuffle(rng);
            for (k, team) in pool.chunks(net.team_size).enumerate() {
                if team.len() < 2 {
                    continue;
                }
                let mut members: Vec<String> = team.iter().map(|&i| ids[i].clone()).collect();
                members.sort();
                groups.insert(format!("T{}-C{:02}-{:02}", t + 1, c + 1, k + 1), members);
            }
        }
        layers.push(LayerDef {
            layer_name: format!("team-{}", t + 1),
            weight: 1.0,
            groups,
        });
    }
    layers
}

/// Fraction of planted features that appear in the top `k` of the ranking.
pub fn recovery_score(ranking: &GlobalImportance, truth: &GroundTruth, k: usize) -> Result<f64> {
    if k < truth.planted_set.len() {
        return Err(Error::Config(format!(
            "k = {k} is smaller than the {} planted features",
            truth.planted_set.len()
        )));
    }
    if truth.planted_set.is_empty() {
        return Ok(1.0);
    }
    let top: BTreeSet<&str> = ranking.top(k).iter().map(|&(f, _)| ranking.name(f)).collect();
    let hits = truth.planted_set.iter().filter(|p| top.contains(p.as_str())).count();
    Ok(hits as f64 / truth.planted_set.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_model::ingest_csv;

    #[test]
    fn default_spec_shape() {
        let out = generate(&SynthSpec::default()).unwrap();
        assert_eq!(out.cohort.len(), 96);
        assert!((out.truth.realized_positive_rate - 0.155).abs() <= REALIZED_TOLERANCE);
        assert!((out.truth.expected_positive_rate - 0.155).abs() <= CALIBRATION_TOLERANCE);
        assert_eq!(out.truth.planted_set.len(), 8);
        for name in ["DgrCnt", "BtwnCnt", "EgnCnt"] {
            let c = out.cohort.column(name).unwrap();
            assert!(c.iter().all(|v| (0.0..=1.0).contains(v)), "{name}");
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = SynthSpec::default();
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.cohort.to_json().unwrap(), b.cohort.to_json().unwrap());
        assert_eq!(a.layers, b.layers);
        let c = generate(&SynthSpec { seed: 1, ..spec }).unwrap();
        assert_ne!(a.cohort.to_json().unwrap(), c.cohort.to_json().unwrap());
    }

    #[test]
    fn exam_total_is_subject_sum() {
        let out = generate(&SynthSpec::default()).unwrap();
        let names = out.cohort.feature_names();
        let idx = |n: &str| names.iter().position(|s| s == n).unwrap();
        for r in &out.cohort.rows {
            let sum: f64 = ["ExamCnN", "ExamEnN", "ExamMatN", "ExamProN"].iter().map(|n| r.features[idx(n)]).sum();
            assert_eq!(r.features[idx("ExmSumN")], sum);
        }
    }

    #[test]
    fn csv_round_trip_through_ingestion() {
        let out = generate(&SynthSpec::default()).unwrap();
        let mut buf = Vec::new();
        out.cohort.write_csv(&mut buf).unwrap();
        let back = ingest_csv(buf.as_slice(), &out.cohort.schema, "synthetic").unwrap();
        assert_eq!(back.rejected_count(), 0);
        assert_eq!(back.cohort, out.cohort);
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec = SynthSpec {
            noise_features: vec!["Seat".into()],
            ..SynthSpec::default()
        };
        assert!(generate(&spec).is_err());
        spec.noise_features.clear();
        spec.target_positive_rate = 1.0;
        assert!(generate(&spec).is_err());
        spec.target_positive_rate = 0.2;
        spec.planted_effects.push(PlantedEffect::new("Nope", EffectShape::Linear, 1.0, 1));
        assert!(matches!(generate(&spec), Err(Error::UnknownFeature { .. })));
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = SynthSpec::default();
        let text = serde_json::to_string(&spec).unwrap();
        let back: SynthSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let partial: SynthSpec = serde_json::from_str(r#"{"n_students": 150, "seed": 4}"#).unwrap();
        assert_eq!(partial.n_students, 150);
        assert_eq!(partial.planted_effects.len(), 8);
    }

    #[test]
    fn recovery_score_bounds() {
        let names: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let truth = GroundTruth {
            planted_set: vec!["a".into(), "b".into()],
            noise_set: vec![],
            intercept: 0.0,
            per_sample_logit: vec![],
            expected_positive_rate: 0.0,
            realized_positive_rate: 0.0,
        };
        let ranking = |order: Vec<usize>| GlobalImportance {
            feature_names: names.clone(),
            ranking: order.into_iter().enumerate().map(|(r, f)| (f, 10.0 - r as f64)).collect(),
            sample_ids: vec![],
            per_sample: vec![],
        };
        assert_eq!(recovery_score(&ranking(vec![0, 1, 2, 3]), &truth, 2).unwrap(), 1.0);
        assert_eq!(recovery_score(&ranking(vec![2, 3, 0, 1]), &truth, 2).unwrap(), 0.0);
        assert_eq!(recovery_score(&ranking(vec![2, 0, 3, 1]), &truth, 2).unwrap(), 0.5);
        assert!(recovery_score(&ranking(vec![0, 1, 2, 3]), &truth, 1).is_err());
    }
}
