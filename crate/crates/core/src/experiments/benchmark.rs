//! Published benchmark worlds. Changing any value here changes the pinned
//! regression numbers.

use super::config::{DocCount, ExperimentConfig, ScalingSettings};
use crate::alignment::{fit, pair_matrices, project_space, AlignSettings, Method};
use crate::error::Result;
use crate::intrinsic::precision_at_1;
use crate::synthetic::{generate_world, CorpusConfig, ExportConfig, MapKind, SyntheticWorldConfig};

pub const BENCHMARK_SEED: u64 = 1729;

pub const NOISE_LEVELS: [f64; 4] = [0.0, 0.05, 0.1, 0.2];

/// Uniform-noise world for the noise sweep.
pub fn noise_world(noise_sigma: f64) -> SyntheticWorldConfig {
    SyntheticWorldConfig {
        vocab_size: 5000,
        dim: 50,
        noise_sigma,
        map_kind: MapKind::Orthogonal,
        seed: BENCHMARK_SEED,
        dict_train: 2000,
        dict_test: 1000,
        ..SyntheticWorldConfig::default()
    }
}

/// Held-out P@1 of `method` fitted on the gold train pairs, per noise level.
pub fn noise_sweep(method: Method) -> Result<Vec<(f64, f64)>> {
    NOISE_LEVELS
        .iter()
        .map(|&sigma| {
            let world = generate_world(&noise_world(sigma))?;
            let pm = pair_matrices(&world.gold_train, &world.source_space, &world.target_space)?;
            let map = fit(method, &pm, &AlignSettings::default())?;
            let projected = project_space(&world.source_space, &map)?;
            let report = precision_at_1(&projected, &world.target_space, &world.test_set())?;
            Ok((sigma, report.p_at_1))
        })
        .collect()
}

/// Large world for the factor grid: noise is flat over the 5000 most frequent
/// words and grows linearly in rank beyond, so rarer seed words align worse.
/// The vocabulary is large enough for a 5k lower-band dictionary.
pub fn factor_world() -> SyntheticWorldConfig {
    SyntheticWorldConfig {
        vocab_size: 120_000,
        dim: 50,
        noise_sigma: 0.1,
        map_kind: MapKind::Orthogonal,
        seed: BENCHMARK_SEED,
        dict_train: 5000,
        dict_test: 1000,
        noise_rank_pivot: Some(5000),
        noise_rank_exponent: 1.0,
        test_pool: Some(20_000),
        ..SyntheticWorldConfig::default()
    }
}

pub fn factor_export() -> ExportConfig {
    ExportConfig {
        corpus: CorpusConfig {
            entity_rank_start: Some(1000),
            entity_rank_stride: 10,
            ..CorpusConfig::default()
        },
        pivot_docs: 1000,
        low_resource_docs: 1000,
        lexicon_miss_rate: 0.05,
        generic_size: 10_000,
        generic_pool: Some(15_000),
        idp_wrong_fraction: 0.2,
    }
}

/// Experiment settings shipped in the factor-world manifest.
pub fn factor_experiment() -> ExperimentConfig {
    ExperimentConfig {
        master_seed: BENCHMARK_SEED,
        scaling: ScalingSettings {
            doc_counts: vec![
                DocCount::Count(0),
                DocCount::Count(200),
                DocCount::Count(500),
                DocCount::Full,
            ],
            ..ScalingSettings::default()
        },
        ..ExperimentConfig::default()
    }
}
