mod common;

use acadrisk::boosted_trees::{train_gbdt, TrainConfig, TreeEnsemble, TreeNode};
use acadrisk::shapley::{coalition_value, exact_shapley, sampled_shapley, tree_shap};
use common::{permutation_shapley, random_ensemble, random_point, random_tree};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn swap_features(node: &TreeNode, a: usize, b: usize) -> TreeNode {
    match node {
        TreeNode::Leaf { value, cover } => TreeNode::leaf(*value, *cover),
        TreeNode::Split {
            feature,
            threshold,
            left,
            right,
            ..
        } => {
            let f = if *feature == a {
                b
            } else if *feature == b {
                a
            } else {
                *feature
            };
            TreeNode::split(f, *threshold, swap_features(left, a, b), swap_features(right, a, b))
        }
    }
}

#[test]
fn tree_shap_equals_exact_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let m = rng.gen_range(1..=6);
        let trees = rng.gen_range(1..=5);
        let e = random_ensemble(&mut rng, m, trees, 4);
        for _ in 0..3 {
            let x = random_point(&mut rng, m);
            let fast = tree_shap(&e, &x).unwrap();
            let slow = exact_shapley(&e, &x).unwrap();
            assert!((fast.base_value - slow.base_value).abs() < TOL);
            assert!((fast.output - slow.output).abs() < TOL);
            for (a, b) in fast.phi.iter().zip(&slow.phi) {
                assert!((a - b).abs() < TOL, "{:?} vs {:?}", fast.phi, slow.phi);
            }
        }
    }
}

#[test]
fn exact_matches_permutation_average_for_three_features() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..30 {
        let e = random_ensemble(&mut rng, 3, 3, 4);
        let x = random_point(&mut rng, 3);
        let oracle = permutation_shapley(3, |s| coalition_value(&e, &x, s).unwrap());
        let exact = exact_shapley(&e, &x).unwrap();
        for (a, b) in exact.phi.iter().zip(&oracle) {
            assert!((a - b).abs() < TOL);
        }
    }
}

#[test]
fn efficiency_and_dummy() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        // features 4 and 5 never appear in any split
        let mut e = random_ensemble(&mut rng, 4, 4, 4);
        e.feature_count = 6;
        let x = random_point(&mut rng, 6);
        let ex = tree_shap(&e, &x).unwrap();
        assert!(ex.efficiency_gap().abs() < TOL);
        assert!((ex.output - e.predict_raw(&x).unwrap()).abs() < TOL);
        assert_eq!(ex.phi[4], 0.0);
        assert_eq!(ex.phi[5], 0.0);
    }
}

#[test]
fn symmetric_features_share_credit() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..100 {
        let t = random_tree(&mut rng, 4, 4);
        let trees = vec![t.clone(), swap_features(&t, 0, 1)];
        let e = TreeEnsemble::new(0.0, 0.5, 4, trees);
        let mut x = random_point(&mut rng, 4);
        x[1] = x[0];
        let ex = tree_shap(&e, &x).unwrap();
        assert!((ex.phi[0] - ex.phi[1]).abs() < TOL, "{:?}", ex.phi);
    }
}

#[test]
fn additivity_and_duplication() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..100 {
        let a = random_ensemble(&mut rng, 5, 3, 4);
        let mut b = random_ensemble(&mut rng, 5, 2, 4);
        b.learning_rate = a.learning_rate;
        let mut both = a.clone();
        both.base_score += b.base_score;
        both.trees.extend(b.trees.iter().cloned());
        let x = random_point(&mut rng, 5);
        let (pa, pb, pab) = (
            tree_shap(&a, &x).unwrap(),
            tree_shap(&b, &x).unwrap(),
            tree_shap(&both, &x).unwrap(),
        );
        for i in 0..5 {
            assert!((pab.phi[i] - pa.phi[i] - pb.phi[i]).abs() < TOL);
        }
        let mut doubled = a.clone();
        doubled.trees.extend(a.trees.iter().cloned());
        let pd = tree_shap(&doubled, &x).unwrap();
        for i in 0..5 {
            assert!((pd.phi[i] - 2.0 * pa.phi[i]).abs() < TOL);
        }
    }
}

#[test]
fn empty_ensemble_attributes_nothing() {
    let e = TreeEnsemble::new(0.7, 0.1, 3, vec![]);
    let ex = tree_shap(&e, &[0.1, 0.2, 0.3]).unwrap();
    assert_eq!(ex.phi, vec![0.0; 3]);
    assert_eq!(ex.output, 0.7);
    assert_eq!(ex.base_value, 0.7);
}

#[test]
fn sampled_linear_model_within_three_standard_errors() {
    let w = [1.5, -2.0, 0.5, 0.0];
    let f = |x: &[f64]| x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let background: Vec<Vec<f64>> = (0..200).map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let mean: Vec<f64> = (0..4).map(|j| background.iter().map(|r| r[j]).sum::<f64>() / 200.0).collect();
    let x = [0.8, 0.3, -0.9, 0.4];
    let ex = sampled_shapley(f, &x, &background, 2000, 7).unwrap();
    let se = ex.standard_errors.as_ref().unwrap();
    for j in 0..4 {
        let truth = w[j] * (x[j] - mean[j]);
        assert!((ex.phi[j] - truth).abs() <= 3.0 * se[j] + 1e-12, "feature {j}: {} vs {truth} (se {})", ex.phi[j], se[j]);
    }
    assert!(ex.efficiency_gap().abs() < 1e-12);
}

#[test]
fn sampled_approaches_tree_shap_on_product_data() {
    // full factorial design: path-dependent and interventional
    // expectations coincide
    let levels = [0.0, 1.0, 2.0, 3.0, 4.0];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for a in levels {
        for b in levels {
            for c in levels {
                for d in levels {
                    rows.push(vec![a, b, c, d]);
                    let bump = if b > 2.0 { 2.0 } else { 0.0 };
                    labels.push(u8::from(a + bump + 0.5 * c > 3.5));
                }
            }
        }
    }
    let config = TrainConfig {
        num_trees: 20,
        max_leaves: 6,
        ..TrainConfig::default()
    };
    let model = train_gbdt(&rows, &labels, &config).unwrap();
    let x = [3.0, 1.0, 4.0, 2.0];
    let exact = tree_shap(&model, &x).unwrap();
    let sampled = sampled_shapley(|z| model.margin(z), &x, &rows, 5000, 3).unwrap();
    assert!((exact.base_value - sampled.base_value).abs() < 1e-9);
    for j in 0..4 {
        assert!((exact.phi[j] - sampled.phi[j]).abs() < 0.05, "{:?} vs {:?}", exact.phi, sampled.phi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn efficiency_holds_for_any_ensemble(seed in any::<u64>(), m in 1usize..8, trees in 0usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_ensemble(&mut rng, m, trees, 5);
        let x = random_point(&mut rng, m);
        let ex = tree_shap(&e, &x).unwrap();
        prop_assert!(ex.efficiency_gap().abs() < TOL);
    }
}
