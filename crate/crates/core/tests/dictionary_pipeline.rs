//! Seed dictionaries on synthetic worlds: exact sizes under translation
//! misses, and frequency validation tuned on held-out P@1.

use std::collections::HashSet;

use lexalign::alignment::{fit, pair_matrices, project_space, AlignSettings, Method};
use lexalign::dictionary::{
    build_domain_dictionary, split_dictionary, tune_validation_threshold, validate_pairs, Band,
    DomainDictionaryOptions, FileTranslationProvider, SeedDictionary,
};
use lexalign::embedding::EmbeddingSpace;
use lexalign::intrinsic::{precision_at_1, TranslationTestSet};
use lexalign::synthetic::{generate_world, SyntheticWorld, SyntheticWorldConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[test]
fn oversampling_yields_exact_size_despite_misses() {
    let world = generate_world(&SyntheticWorldConfig {
        vocab_size: 3000,
        dim: 10,
        dict_train: 100,
        dict_test: 100,
        seed: 11,
        ..SyntheticWorldConfig::default()
    })
    .unwrap();
    let lexicon = world.lexicon(0.06, 12);
    let missing = world.vocab_size() - lexicon.len();
    assert!(missing > 0, "the seeded lexicon should drop some words");
    let provider = FileTranslationProvider::from_pairs(lexicon);
    let freqs = world.source_space.frequencies().unwrap();
    let dict = build_domain_dictionary(
        freqs,
        &provider,
        &HashSet::new(),
        &DomainDictionaryOptions::new(Band::High, 1000),
    )
    .unwrap();
    assert_eq!(dict.len(), 1000);
    // Frequency order is kept: every pair is a translation of a top-ranked
    // word, and the sequence of source ranks is increasing.
    let ranks: Vec<usize> = dict
        .pairs()
        .iter()
        .map(|(s, _)| world.source_space.index_of(s).unwrap())
        .collect();
    assert!(ranks.windows(2).all(|w| w[0] < w[1]));
    assert!(dict.pairs().iter().all(|(s, t)| s[1..] == t[1..]));
}

/// Target vectors of train words ranked 1001..=3000 replaced by random
/// directions; the top 1000 and every test word stay intact.
fn corrupted_world() -> (SyntheticWorld, EmbeddingSpace) {
    let world = generate_world(&SyntheticWorldConfig {
        vocab_size: 4000,
        dim: 20,
        noise_sigma: 0.15,
        seed: 31,
        dict_train: 3000,
        dict_test: 500,
        ..SyntheticWorldConfig::default()
    })
    .unwrap();
    let d = world.target_space.dim();
    let mut data = world.target_space.data().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for i in 1000..3000 {
        for x in &mut data[i * d..(i + 1) * d] {
            *x = StandardNormal.sample(&mut rng);
        }
    }
    let target = world.target_space.with_vectors(d, data).unwrap();
    (world, target)
}

fn held_out_p1(
    dict: &SeedDictionary,
    world: &SyntheticWorld,
    target: &EmbeddingSpace,
    test: &TranslationTestSet,
) -> f64 {
    let pm = pair_matrices(dict, &world.source_space, target).unwrap();
    let map = fit(Method::Procrustes, &pm, &AlignSettings::default()).unwrap();
    let projected = project_space(&world.source_space, &map).unwrap();
    precision_at_1(&projected, target, test).unwrap().p_at_1
}

#[test]
fn held_out_p1_tuning_prefers_a_positive_threshold() {
    let (world, target) = corrupted_world();
    let freqs = world.target_space.frequencies().unwrap();
    let split = split_dictionary(&world.gold_train, 0.8, 33).unwrap();
    let held_out = TranslationTestSet::from_pairs(split.held_out.pairs().iter().cloned());
    let scores: Vec<f64> = [0, 400, 1000]
        .iter()
        .map(|&t| held_out_p1(&validate_pairs(&split.train, freqs, t).0, &world, &target, &held_out))
        .collect();
    assert!(scores.windows(2).all(|w| w[0] < w[1]), "{scores:?}");
    let (threshold, score) = tune_validation_threshold(&split.train, freqs, &[0, 400, 1000], |d| {
        Ok(held_out_p1(d, &world, &target, &held_out))
    })
    .unwrap();
    // Regression values from the first run of this world.
    assert_eq!(threshold, 1000);
    assert_eq!(score, 0.3);
    // The clean test words confirm the tuned dictionary maps better.
    let tuned = validate_pairs(&world.gold_train, freqs, threshold).0;
    let test = world.test_set();
    assert!(held_out_p1(&tuned, &world, &target, &test) > held_out_p1(&world.gold_train, &world, &target, &test));
}
