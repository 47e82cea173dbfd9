use acadrisk::boosted_trees::{train_gbdt, TrainConfig};
use acadrisk::data_model::{ingest_csv, FeatureSchema};
use acadrisk::evaluation::{evaluate_gbdt, Protocol};
use acadrisk::shapley::{explain_rows, global_importance, GlobalImportance};
use acadrisk::synthetic::{default_planted_effects, generate, recovery_score, EffectShape, PlantedEffect, SynthSpec};

fn importance(spec: &SynthSpec) -> (GlobalImportance, acadrisk::synthetic::SynthOutput) {
    let out = generate(spec).unwrap();
    let c = &out.cohort;
    let model = train_gbdt(&c.features(), &c.labels(), &TrainConfig::default()).unwrap();
    let ex = explain_rows(&model, &c.features(), &c.ids()).unwrap();
    (global_importance(&ex, &c.feature_names()).unwrap(), out)
}

#[test]
fn null_cohort_is_not_predictable() {
    let effects: Vec<PlantedEffect> = default_planted_effects()
        .into_iter()
        .map(|e| PlantedEffect { strength: 0.0, ..e })
        .collect();
    let mut aucs = Vec::new();
    for seed in 0..10 {
        let spec = SynthSpec {
            n_students: 200,
            planted_effects: effects.clone(),
            target_positive_rate: 0.3,
            seed,
            ..SynthSpec::default()
        };
        let out = generate(&spec).unwrap();
        let (summary, _) = evaluate_gbdt(&out.cohort, &TrainConfig::default(), &Protocol::default()).unwrap();
        aucs.push(summary.auc.mean);
    }
    let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
    assert!((0.4..0.6).contains(&mean), "{aucs:?}");
    assert!(aucs.iter().all(|a| (0.3..0.7).contains(a)), "{aucs:?}");
}

#[test]
fn single_planted_threshold_rises_to_the_top() {
    let mut hits = 0;
    for seed in 0..10 {
        let spec = SynthSpec {
            n_students: 200,
            planted_effects: vec![PlantedEffect {
                feature: "EgnCnt".into(),
                shape: EffectShape::Threshold { at: 0.03 },
                strength: 6.0,
                direction: -1,
            }],
            seed,
            ..SynthSpec::default()
        };
        let (gi, _) = importance(&spec);
        if gi.name(gi.top(1)[0].0) == "EgnCnt" {
            hits += 1;
        }
    }
    assert!(hits >= 9, "EgnCnt ranked first in {hits}/10 seeds");
}

#[test]
fn default_effects_are_mostly_recovered_at_small_n() {
    let mut total = 0.0;
    for seed in 0..3 {
        let (gi, out) = importance(&SynthSpec {
            seed,
            ..SynthSpec::default()
        });
        total += recovery_score(&gi, &out.truth, 10).unwrap();
    }
    assert!(total / 3.0 >= 0.6, "mean recovery {}", total / 3.0);
}

#[test]
fn written_cohort_reingests_with_shuffled_columns() {
    let out = generate(&SynthSpec {
        n_students: 40,
        ..SynthSpec::default()
    })
    .unwrap();
    let mut buf = Vec::new();
    out.cohort.write_csv(&mut buf).unwrap();
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let mut order: Vec<usize> = (0..header.len()).collect();
    order.reverse();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(order.iter().map(|&i| &header[i])).unwrap();
    for r in &records {
        w.write_record(order.iter().map(|&i| &r[i])).unwrap();
    }
    let shuffled = w.into_inner().unwrap();
    let back = ingest_csv(shuffled.as_slice(), &FeatureSchema::standard(), "synthetic").unwrap();
    assert_eq!(back.rejected_count(), 0);
    assert_eq!(back.cohort, out.cohort);
}
