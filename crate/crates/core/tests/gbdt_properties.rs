use acadrisk::boosted_trees::{
    train_gbdt, train_gbdt_traced, train_logistic, LogisticConfig, TrainConfig, TreeEnsemble, TreeNode,
};
use acadrisk::evaluation::{auc, classification_metrics};
use acadrisk::json::to_canonical_string;
use acadrisk::Error;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn xor_data(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    let y = x.iter().map(|r| u8::from((r[0] > 0.0) != (r[1] > 0.0))).collect();
    (x, y)
}

fn linear_data(n: usize, m: usize, seed: u64, positive_rate: f64) -> (Vec<Vec<f64>>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let mut scores: Vec<f64> = x.iter().map(|r| r[0] - 0.5 * r[1] + 0.3 * rng.gen_range(-1.0..1.0)).collect();
    let mut sorted = scores.clone();
    sorted.sort_by(f64::total_cmp);
    let cut = sorted[((1.0 - positive_rate) * n as f64) as usize];
    let y = scores.iter_mut().map(|s| u8::from(*s >= cut)).collect();
    (x, y)
}

fn margins(model: &TreeEnsemble, x: &[Vec<f64>]) -> Vec<f64> {
    x.iter().map(|r| model.margin(r)).collect()
}

fn check_covers(node: &TreeNode) -> f64 {
    match node {
        TreeNode::Leaf { cover, .. } => *cover,
        TreeNode::Split { cover, left, right, .. } => {
            let sum = check_covers(left) + check_covers(right);
            assert_eq!(*cover, sum);
            sum
        }
    }
}

#[test]
fn xor_separates_boosting_from_the_linear_baseline() {
    let (x, y) = xor_data(400, 1);
    let model = train_gbdt(&x, &y, &TrainConfig::default()).unwrap();
    let gbdt_auc = auc(&margins(&model, &x), &y).unwrap();
    let linear = train_logistic(&x, &y, &LogisticConfig::default()).unwrap();
    let lin_scores: Vec<f64> = x.iter().map(|r| linear.predict_raw(r).unwrap()).collect();
    let lin_auc = auc(&lin_scores, &y).unwrap();
    assert!(gbdt_auc > 0.95, "gbdt {gbdt_auc}");
    assert!((0.4..=0.6).contains(&lin_auc), "logistic {lin_auc}");
}

#[test]
fn training_loss_never_increases() {
    let fixtures = [
        xor_data(300, 2),
        linear_data(300, 4, 3, 0.155),
        linear_data(120, 3, 4, 0.5),
        {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let x: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.gen_range(0..4) as f64, rng.gen()]).collect();
            let y = (0..200).map(|_| u8::from(rng.gen_bool(0.3))).collect();
            (x, y)
        },
    ];
    for (x, y) in &fixtures {
        for config in [
            TrainConfig::default(),
            TrainConfig {
                learning_rate: 1.0,
                max_leaves: 4,
                lambda: 0.0,
                num_trees: 50,
                ..TrainConfig::default()
            },
        ] {
            let (_, losses) = train_gbdt_traced(x, y, &config).unwrap();
            assert_eq!(losses.len(), config.num_trees + 1);
            for w in losses.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "loss rose from {} to {}", w[0], w[1]);
            }
        }
    }
}

#[test]
fn retraining_is_bit_identical_and_order_free() {
    let (x, y) = linear_data(250, 5, 6, 0.2);
    let config = TrainConfig::default();
    let a = to_canonical_string(&train_gbdt(&x, &y, &config).unwrap()).unwrap();
    let b = to_canonical_string(&train_gbdt(&x, &y, &config).unwrap()).unwrap();
    assert_eq!(a, b);
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(9));
    let xs: Vec<Vec<f64>> = idx.iter().map(|&i| x[i].clone()).collect();
    let ys: Vec<u8> = idx.iter().map(|&i| y[i]).collect();
    let c = to_canonical_string(&train_gbdt(&xs, &ys, &config).unwrap()).unwrap();
    assert_eq!(a, c);
}

#[test]
fn covers_add_up_to_the_training_rows() {
    let (x, y) = linear_data(180, 3, 7, 0.3);
    let model = train_gbdt(&x, &y, &TrainConfig::default()).unwrap();
    for tree in &model.trees {
        assert_eq!(check_covers(tree), 180.0);
        assert!(tree.leaf_count() <= TrainConfig::default().max_leaves);
    }
    model.validate().unwrap();
}

#[test]
fn class_weighting_lifts_minority_recall() {
    let (x, y) = linear_data(400, 4, 8, 0.1);
    let (xt, yt) = linear_data(400, 4, 80, 0.1);
    let config = TrainConfig {
        num_trees: 40,
        ..TrainConfig::default()
    };
    let recall = |pos_weight: Option<f64>| {
        let model = train_gbdt(&x, &y, &TrainConfig { pos_weight, ..config.clone() }).unwrap();
        let p = model.predict_proba_batch(&xt).unwrap();
        classification_metrics(&p, &yt, 0.5).unwrap().recall
    };
    let unweighted = recall(Some(1.0));
    let balanced = recall(None);
    assert!(balanced > unweighted, "balanced {balanced} vs unweighted {unweighted}");
}

#[test]
fn logistic_finds_no_signal_in_noise() {
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let mut draw = |n: usize| -> (Vec<Vec<f64>>, Vec<u8>) {
            let x = (0..n).map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let y = (0..n).map(|_| u8::from(rng.gen_bool(0.3))).collect();
            (x, y)
        };
        let (x, y) = draw(300);
        let (xt, yt) = draw(300);
        let model = train_logistic(&x, &y, &LogisticConfig::default()).unwrap();
        let s: Vec<f64> = xt.iter().map(|r| model.predict_raw(r).unwrap()).collect();
        let a = auc(&s, &yt).unwrap();
        assert!(a < 0.65 && a > 0.35, "seed {seed}: {a}");
    }
}

#[test]
fn degenerate_inputs_are_rejected() {
    let x = vec![vec![0.0], vec![1.0], vec![2.0]];
    assert!(matches!(
        train_gbdt(&x, &[0, 0, 0], &TrainConfig::default()),
        Err(Error::SingleClass(_))
    ));
    assert!(matches!(
        train_logistic(&x, &[1, 1, 1], &LogisticConfig::default()),
        Err(Error::SingleClass(_))
    ));
    assert!(train_gbdt(&x, &[0, 1], &TrainConfig::default()).is_err());
}

#[test]
fn constant_feature_is_never_split() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let x: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.gen(), 7.0]).collect();
    let y: Vec<u8> = x.iter().map(|r| u8::from(r[0] > 0.6)).collect();
    let model = train_gbdt(&x, &y, &TrainConfig::default()).unwrap();
    assert!(!model.used_features().contains(&1));
}
