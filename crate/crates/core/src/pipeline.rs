//! File-level stages behind the command-line tool. Every artifact is
//! written as canonical JSON or plain CSV under one output directory.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::boosted_trees::{train_gbdt, TrainConfig, TreeEnsemble};
use crate::data_model::{ingest_csv, Cohort, FeatureSchema, Ingested, Rejection};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_gbdt, EvalSummary, Protocol};
use crate::interaction_network::{attach_centrality_features, graph_from_defs, LayerDef};
use crate::json::{canonical_hash, read_json, to_canonical_string, write_canonical};
use crate::plots::{dependence_plot_data, summary_plot_data, waterfall_data, PlotBundle, PlotKind};
use crate::shapley::{explain_rows, global_importance, Explanation, ExplanationRecord, GlobalImportance};
use crate::synthetic::{generate, GroundTruth, SynthSpec};

pub const COHORT_CSV: &str = "cohort.csv";
pub const LAYERS_JSON: &str = "layers.json";
pub const TRUTH_JSON: &str = "truth.json";
pub const COHORT_JSON: &str = "cohort.json";
pub const REJECTED_JSON: &str = "rejected.json";
pub const FEATURIZED_JSON: &str = "featurized.json";
pub const EDGES_CSV: &str = "edges.csv";
pub const MODEL_JSON: &str = "model.json";
pub const EVAL_JSON: &str = "eval.json";
pub const ROC_CSV: &str = "roc.csv";
pub const EXPLANATIONS_JSON: &str = "explanations.json";
pub const IMPORTANCE_CSV: &str = "importance.csv";

/// Optional `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub train: TrainConfig,
    pub protocol: Protocol,
    pub synth: Option<SynthSpec>,
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        read_json(path)
    }
}

/// Seconds since the epoch, or `SOURCE_DATE_EPOCH` when set.
pub fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.parse().ok()) {
        return t;
    }
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a cohort from `.csv` (ingested) or from canonical JSON.
pub fn load_cohort(path: &Path, schema: &FeatureSchema) -> Result<Cohort> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let tag = path.file_stem().map_or("cohort".into(), |s| s.to_string_lossy().into_owned());
        Ok(ingest_csv(file, schema, &tag)?.cohort)
    } else {
        Cohort::load(path, schema)
    }
}

pub fn load_model(path: &Path) -> Result<TreeEnsemble> {
    let model: TreeEnsemble = read_json(path)?;
    model.validate()?;
    Ok(model)
}

pub fn model_hash(model: &TreeEnsemble) -> Result<String> {
    canonical_hash(model)
}

/// Restricts `cohort` to the features the model was trained on.
pub fn align_to_model(cohort: &Cohort, model: &TreeEnsemble) -> Result<Cohort> {
    let names = cohort.feature_names();
    if model.feature_names.is_empty() || model.feature_names == names {
        if model.feature_count != names.len() {
            return Err(Error::Schema(format!(
                "schema mismatch: model expects {} features, cohort has {}",
                model.feature_count,
                names.len()
            )));
        }
        return Ok(cohort.clone());
    }
    let dropped: Vec<String> = names.iter().filter(|n| !model.feature_names.contains(n)).cloned().collect();
    let schema = cohort.schema.without(&dropped)?;
    if schema.active_names() != model.feature_names {
        return Err(Error::Schema(format!(
            "schema mismatch: model features [{}] are not a subset of the cohort's in order",
            model.feature_names.join(", ")
        )));
    }
    cohort.project(&schema)
}

pub struct SynthArtifacts {
    pub cohort_csv: PathBuf,
    pub layers: PathBuf,
    pub truth: PathBuf,
    pub truth_value: GroundTruth,
    pub rows: usize,
}

pub fn synth(spec: &SynthSpec, out_dir: &Path) -> Result<SynthArtifacts> {
    ensure_dir(out_dir)?;
    let out = generate(spec)?;
    let cohort_csv = out_dir.join(COHORT_CSV);
    out.cohort.write_csv(create(&cohort_csv)?)?;
    let layers = out_dir.join(LAYERS_JSON);
    write_canonical(&layers, &out.layers)?;
    let truth = out_dir.join(TRUTH_JSON);
    write_canonical(&truth, &out.truth)?;
    Ok(SynthArtifacts {
        cohort_csv,
        layers,
        truth,
        rows: out.cohort.len(),
        truth_value: out.truth,
    })
}

pub fn ingest(csv_path: &Path, schema: &FeatureSchema, tag: &str, out_dir: &Path) -> Result<Ingested> {
    ensure_dir(out_dir)?;
    let file = File::open(csv_path).map_err(|e| Error::io(csv_path, e))?;
    let ingested = ingest_csv(file, schema, tag)?;
    ingested.cohort.save(out_dir.join(COHORT_JSON))?;
    write_canonical(out_dir.join(REJECTED_JSON), &ingested.rejected)?;
    Ok(ingested)
}

/// Attaches the three centrality columns computed from `layers_path`.
pub fn featurize(cohort_path: &Path, layers_path: &Path, schema: &FeatureSchema, out_dir: &Path) -> Result<Cohort> {
    ensure_dir(out_dir)?;
    let cohort = load_cohort(cohort_path, schema)?;
    let layers: Vec<LayerDef> = read_json(layers_path)?;
    let graph = graph_from_defs(&layers, &cohort.ids())?;
    let featurized = attach_centrality_features(&cohort, &graph)?;
    featurized.save(out_dir.join(FEATURIZED_JSON))?;
    graph.write_edge_csv(create(&out_dir.join(EDGES_CSV))?)?;
    Ok(featurized)
}

pub fn train(
    cohort_path: &Path,
    schema: &FeatureSchema,
    config: &TrainConfig,
    drop_features: &[String],
    out_dir: &Path,
) -> Result<TreeEnsemble> {
    ensure_dir(out_dir)?;
    let mut cohort = load_cohort(cohort_path, schema)?;
    if !drop_features.is_empty() {
        for name in drop_features {
            if schema.active_index(name).is_none() {
                return Err(Error::UnknownFeature {
                    name: name.clone(),
                    valid: schema.active_names().join(", "),
                });
            }
        }
        cohort = cohort.project(&schema.without(drop_features)?)?;
    }
    let mut model = train_gbdt(&cohort.features(), &cohort.labels(), config)?;
    model.feature_names = cohort.feature_names();
    write_canonical(out_dir.join(MODEL_JSON), &model)?;
    Ok(model)
}

pub fn evaluate(
    cohort_path: &Path,
    schema: &FeatureSchema,
    config: &TrainConfig,
    protocol: &Protocol,
    out_dir: &Path,
) -> Result<EvalSummary> {
    ensure_dir(out_dir)?;
    let cohort = load_cohort(cohort_path, schema)?;
    let (summary, roc) = evaluate_gbdt(&cohort, config, protocol)?;
    write_canonical(out_dir.join(EVAL_JSON), &summary)?;
    roc.write_csv(create(&out_dir.join(ROC_CSV))?)?;
    Ok(summary)
}

pub struct ExplainArtifacts {
    pub explanations: Vec<Explanation>,
    pub importance: GlobalImportance,
    pub waterfall: Option<PathBuf>,
}

pub fn waterfall_file(sample: &str) -> String {
    format!("waterfall_{sample}.json")
}

pub fn explain(
    model_path: &Path,
    cohort_path: &Path,
    schema: &FeatureSchema,
    sample: Option<&str>,
    out_dir: &Path,
) -> Result<ExplainArtifacts> {
    ensure_dir(out_dir)?;
    let model = load_model(model_path)?;
    let cohort = align_to_model(&load_cohort(cohort_path, schema)?, &model)?;
    let names = cohort.feature_names();
    let explanations = explain_rows(&model, &cohort.features(), &cohort.ids())?;
    let records = explanations
        .iter()
        .map(|e| e.to_record(&names))
        .collect::<Result<Vec<_>>>()?;
    write_canonical(out_dir.join(EXPLANATIONS_JSON), &records)?;
    let importance = global_importance(&explanations, &names)?;
    importance.write_csv(create(&out_dir.join(IMPORTANCE_CSV))?)?;
    let waterfall = match sample {
        Some(id) => {
            let e = explanations
                .iter()
                .find(|e| e.sample_id == id)
                .ok_or_else(|| Error::NotFound(format!("sample {id} is not in the cohort")))?;
            let bundle = waterfall_data(e, &cohort)?.with_metadata(&model_hash(&model)?, timestamp());
            let path = out_dir.join(waterfall_file(id));
            write_canonical(&path, &bundle)?;
            Some(path)
        }
        None => None,
    };
    Ok(ExplainArtifacts {
        explanations,
        importance,
        waterfall,
    })
}

pub fn load_explanations(path: &Path, feature_names: &[String]) -> Result<Vec<Explanation>> {
    let records: Vec<ExplanationRecord> = read_json(path)?;
    records.iter().map(|r| Explanation::from_record(r, feature_names)).collect()
}

#[derive(Debug, Clone, Default)]
pub struct PlotRequest {
    pub feature: Option<String>,
    pub color_feature: Option<String>,
    pub sample: Option<String>,
    pub top_k: Option<usize>,
}

/// Writes `plot_<kind>.json` and `plot_<kind>.svg`; returns both paths.
pub fn plot(
    kind: PlotKind,
    model_path: &Path,
    cohort_path: &Path,
    explanations_path: &Path,
    schema: &FeatureSchema,
    request: &PlotRequest,
    out_dir: &Path,
) -> Result<(PathBuf, PathBuf)> {
    ensure_dir(out_dir)?;
    let model = load_model(model_path)?;
    let cohort = align_to_model(&load_cohort(cohort_path, schema)?, &model)?;
    let names = cohort.feature_names();
    let explanations = load_explanations(explanations_path, &names)?;
    let bundle: PlotBundle = match kind {
        PlotKind::Summary => {
            let importance = global_importance(&explanations, &names)?;
            let k = request.top_k.unwrap_or(20).min(names.len());
            summary_plot_data(&importance, &cohort, k)?
        }
        PlotKind::Dependence => {
            let feature = request
                .feature
                .as_deref()
                .ok_or_else(|| Error::Config("dependence plot needs --feature".into()))?;
            let color = request.color_feature.as_deref().unwrap_or(feature);
            dependence_plot_data(feature, color, &explanations, &cohort)?
        }
        PlotKind::Waterfall => {
            let id = request
                .sample
                .as_deref()
                .ok_or_else(|| Error::Config("waterfall plot needs --sample".into()))?;
            let e = explanations
                .iter()
                .find(|e| e.sample_id == id)
                .ok_or_else(|| Error::NotFound(format!("sample {id} has no explanation")))?;
            waterfall_data(e, &cohort)?
        }
    };
    let bundle = bundle.with_metadata(&model_hash(&model)?, timestamp());
    let stem = match kind {
        PlotKind::Summary => "plot_summary".to_string(),
        PlotKind::Dependence => format!("plot_dependence_{}", request.feature.as_deref().unwrap_or_default()),
        PlotKind::Waterfall => format!("plot_waterfall_{}", request.sample.as_deref().unwrap_or_default()),
    };
    let json_path = out_dir.join(format!("{stem}.json"));
    let svg_path = out_dir.join(format!("{stem}.svg"));
    write_text(&json_path, &to_canonical_string(&bundle)?)?;
    write_text(&svg_path, &bundle.to_svg())?;
    Ok((json_path, svg_path))
}

/// Rejections as one line each, for diagnostics.
pub fn describe_rejections(rejected: &[Rejection]) -> Vec<String> {
    rejected
        .iter()
        .map(|r| format!("row {}: column {}: {}", r.row, r.column, r.reason))
        .collect()
}
