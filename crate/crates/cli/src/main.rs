use std::path::{Path, PathBuf};
use std::process::ExitCode;

use acadrisk::data_model::FeatureSchema;
use acadrisk::pipeline::{self, PipelineConfig, PlotRequest};
use acadrisk::plots::PlotKind;
use acadrisk::synthetic::SynthSpec;
use acadrisk::{Error, ErrorCategory};
use clap::{Parser, Subcommand, ValueEnum};

/// Academic-risk prediction with boosted trees and Shapley explanations.
#[derive(Debug, Parser)]
#[command(name = "acadrisk", version)]
struct Cli {
    /// Schema JSON; defaults to the built-in 36-variable schema.
    #[arg(long, global = true)]
    schema: Option<PathBuf>,
    /// Pipeline config JSON with optional `train`, `protocol` and `synth` sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the generator seed and the training seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic grade group with planted effects.
    Synth {
        /// Generator spec JSON (takes precedence over the config's `synth` section).
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        n_students: Option<usize>,
    },
    /// Validate a cohort CSV and write canonical cohort JSON.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "cohort")]
        tag: String,
    },
    /// Attach degree, betweenness and eigenvector centralities from layer definitions.
    Featurize {
        /// Cohort CSV or JSON [default: <out-dir>/cohort.csv]
        #[arg(long)]
        cohort: Option<PathBuf>,
        /// Layer definitions [default: <out-dir>/layers.json]
        #[arg(long)]
        layers: Option<PathBuf>,
    },
    /// Train the boosted-tree classifier and write model JSON.
    Train {
        /// [default: <out-dir>/featurized.json]
        #[arg(long)]
        cohort: Option<PathBuf>,
        /// Leave a feature out of training (repeatable).
        #[arg(long = "drop-feature")]
        drop_features: Vec<String>,
    },
    /// Repeated stratified hold-out evaluation.
    Evaluate {
        /// [default: <out-dir>/featurized.json]
        #[arg(long)]
        cohort: Option<PathBuf>,
    },
    /// Per-student Shapley values and global importance.
    Explain {
        /// [default: <out-dir>/model.json]
        #[arg(long)]
        model: Option<PathBuf>,
        /// [default: <out-dir>/featurized.json]
        #[arg(long)]
        cohort: Option<PathBuf>,
        /// Also write a waterfall for this student.
        #[arg(long)]
        sample: Option<String>,
    },
    /// Figure data as JSON plus a static SVG.
    Plot {
        #[arg(long, value_enum)]
        kind: Kind,
        /// [default: <out-dir>/model.json]
        #[arg(long)]
        model: Option<PathBuf>,
        /// [default: <out-dir>/featurized.json]
        #[arg(long)]
        cohort: Option<PathBuf>,
        /// [default: <out-dir>/explanations.json]
        #[arg(long)]
        explanations: Option<PathBuf>,
        #[arg(long)]
        feature: Option<String>,
        #[arg(long)]
        color_feature: Option<String>,
        #[arg(long)]
        sample: Option<String>,
        #[arg(long)]
        top_k: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Summary,
    Dependence,
    Waterfall,
}

impl From<Kind> for PlotKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Summary => PlotKind::Summary,
            Kind::Dependence => PlotKind::Dependence,
            Kind::Waterfall => PlotKind::Waterfall,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.category() {
        ErrorCategory::Io => 3,
        ErrorCategory::Schema => 4,
        ErrorCategory::SingleClass => 5,
        ErrorCategory::Numerical => 6,
        ErrorCategory::Input => 1,
    }
}

fn or_default(path: Option<PathBuf>, dir: &Path, name: &str) -> PathBuf {
    path.unwrap_or_else(|| dir.join(name))
}

fn run(cli: Cli) -> acadrisk::Result<()> {
    let schema = match &cli.schema {
        Some(p) => FeatureSchema::load(p)?,
        None => FeatureSchema::standard(),
    };
    let mut config = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.train.seed = seed;
    }
    let out = cli.out_dir.as_path();
    match cli.command {
        Command::Synth { spec, n_students } => {
            let mut spec = match spec {
                Some(p) => acadrisk::json::read_json(p)?,
                None => config.synth.clone().unwrap_or_else(|| SynthSpec {
                    schema: schema.clone(),
                    ..SynthSpec::default()
                }),
            };
            if let Some(n) = n_students {
                spec.n_students = n;
            }
            if let Some(seed) = cli.seed {
                spec.seed = seed;
            }
            let a = pipeline::synth(&spec, out)?;
            println!(
                "wrote {} ({} students, positive rate {:.3}), {}, {}",
                a.cohort_csv.display(),
                a.rows,
                a.truth_value.realized_positive_rate,
                a.layers.display(),
                a.truth.display()
            );
        }
        Command::Ingest { input, tag } => {
            let ingested = pipeline::ingest(&input, &schema, &tag, out)?;
            for line in pipeline::describe_rejections(&ingested.rejected) {
                eprintln!("rejected {line}");
            }
            println!(
                "wrote {} ({} rows kept, {} rejected)",
                out.join(pipeline::COHORT_JSON).display(),
                ingested.cohort.len(),
                ingested.rejected_count()
            );
        }
        Command::Featurize { cohort, layers } => {
            let cohort = or_default(cohort, out, pipeline::COHORT_CSV);
            let layers = or_default(layers, out, pipeline::LAYERS_JSON);
            let c = pipeline::featurize(&cohort, &layers, &schema, out)?;
            println!("wrote {} ({} rows)", out.join(pipeline::FEATURIZED_JSON).display(), c.len());
        }
        Command::Train { cohort, drop_features } => {
            let cohort = or_default(cohort, out, pipeline::FEATURIZED_JSON);
            let model = pipeline::train(&cohort, &schema, &config.train, &drop_features, out)?;
            println!(
                "wrote {} ({} trees over {} features)",
                out.join(pipeline::MODEL_JSON).display(),
                model.trees.len(),
                model.feature_count
            );
        }
        Command::Evaluate { cohort } => {
            let cohort = or_default(cohort, out, pipeline::FEATURIZED_JSON);
            let s = pipeline::evaluate(&cohort, &schema, &config.train, &config.protocol, out)?;
            println!(
                "accuracy {:.3}±{:.3}  recall {:.3}±{:.3}  f1 {:.3}±{:.3}  auc {:.3}±{:.3}",
                s.accuracy.mean, s.accuracy.sd, s.recall.mean, s.recall.sd, s.f1.mean, s.f1.sd, s.auc.mean, s.auc.sd
            );
            println!("wrote {}", out.join(pipeline::EVAL_JSON).display());
        }
        Command::Explain { model, cohort, sample } => {
            let model = or_default(model, out, pipeline::MODEL_JSON);
            let cohort = or_default(cohort, out, pipeline::FEATURIZED_JSON);
            let a = pipeline::explain(&model, &cohort, &schema, sample.as_deref(), out)?;
            for &(f, v) in a.importance.top(8) {
                println!("{:>12}  {v:.4}", a.importance.name(f));
            }
            println!(
                "wrote {} and {}",
                out.join(pipeline::EXPLANATIONS_JSON).display(),
                out.join(pipeline::IMPORTANCE_CSV).display()
            );
            if let Some(p) = a.waterfall {
                println!("wrote {}", p.display());
            }
        }
        Command::Plot {
            kind,
            model,
            cohort,
            explanations,
            feature,
            color_feature,
            sample,
            top_k,
        } => {
            let request = PlotRequest {
                feature,
                color_feature,
                sample,
                top_k,
            };
            let (json, svg) = pipeline::plot(
                kind.into(),
                &or_default(model, out, pipeline::MODEL_JSON),
                &or_default(cohort, out, pipeline::FEATURIZED_JSON),
                &or_default(explanations, out, pipeline::EXPLANATIONS_JSON),
                &schema,
                &request,
                out,
            )?;
            println!("wrote {} and {}", json.display(), svg.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("acadrisk: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
