mod common;

use common::*;
use gnnseed::experiment::load_fixture;
use gnnseed::pipelines::split_sizes;
use gnnseed::rng::rng_from_seed;
use gnnseed::synth::{sample_sbm, BlockModelConfig, DegreeCorrection};
use gnnseed::{classify, split_nodes, Error, LabelVector, Method, MethodConfig, SplitRatio};

const RATIOS: [f64; 4] = [5.0, 10.0, 20.0, 50.0];

#[test]
fn karate_splits_conform() {
    let d = load_fixture("karate").unwrap();
    for ratio in RATIOS.map(SplitRatio) {
        for seed in 0..50 {
            let m = split_nodes(&d.labels, ratio, &mut rng_from_seed(seed)).unwrap();
            check_split(&d.labels, &m, ratio).unwrap_or_else(|e| panic!("{ratio:?} seed {seed}: {e}"));
            assert_eq!(m, split_nodes(&d.labels, ratio, &mut rng_from_seed(seed)).unwrap());
        }
    }
}

#[test]
fn split_sizes_follow_the_rules() {
    assert_eq!(split_sizes(2000, 4, SplitRatio(5.0)), (100, 10));
    assert_eq!(split_sizes(2000, 4, SplitRatio(50.0)), (1000, 100));
    assert_eq!(split_sizes(34, 4, SplitRatio(5.0)), (12, 4));
    assert_eq!(split_sizes(34, 4, SplitRatio(50.0)), (17, 4));
}

#[test]
fn two_member_class_is_rejected() {
    let y = LabelVector::new(vec![0, 0, 0, 1, 1, 0, 0, 2, 2, 2], 3).unwrap();
    for ratio in RATIOS.map(SplitRatio) {
        assert!(matches!(
            split_nodes(&y, ratio, &mut rng_from_seed(0)),
            Err(Error::InfeasibleSplit { class: 1, size: 2 })
        ));
    }
}

#[test]
fn test_labels_never_reach_a_method() {
    let bm = BlockModelConfig::planted(90, 0.3, 0.05, vec![1.0, 1.0, 1.0], DegreeCorrection::None);
    let (g, y) = sample_sbm(&bm, &mut rng_from_seed(4)).unwrap();
    let masks = split_nodes(&y, SplitRatio(20.0), &mut rng_from_seed(5)).unwrap();
    let mut scrambled = y.clone().into_values();
    for &i in &masks.test {
        scrambled[i] = (scrambled[i] + 1 + (i % 2) as i32) % 3;
    }
    let scrambled = LabelVector::new(scrambled, 3).unwrap();
    let mut cfg = MethodConfig::default();
    cfg.classification.max_epochs = 60;
    for method in Method::CLASSIFICATION {
        let a = classify(method, &g, &y, &masks, &cfg, 77).unwrap();
        let b = classify(method, &g, &scrambled, &masks, &cfg, 77).unwrap();
        assert_eq!(a.predictions, b.predictions, "{}", method.name());
        assert_eq!(a.embedding, b.embedding, "{}", method.name());
        assert_ne!(a.metric, b.metric, "{}", method.name());
    }
}
