//! End-to-end experiments: the factor grid over dictionary source, size and
//! frequency band, and the low-resource data-scaling table, each written as a
//! TSV report with timing and effective-config sidecars.
//!
//! Every random choice is seeded from the master seed. A grid cell's seed is
//! the first eight bytes (big-endian) of `SHA-256("{master_seed}:cell
//! {key}")`, where `key` is the cell's `Display` form, so any cell can be
//! re-run alone. Corpus splits, the low-resource document order and the
//! pivot tagger use the fixed keys `split pivot`, `split low-resource`,
//! `low-resource order` and `tagger pivot`.

pub mod benchmark;
mod bundle;
mod config;
mod grid;
mod report;
mod run;
mod scaling;
mod split;

pub use bundle::{generate_bundle, MANIFEST_NAME};
pub use config::{
    AlignmentSettings, DictionarySettings, DocCount, EmbeddingSettings, ExperimentConfig, GridSettings, Paths,
    ScalingSettings, SplitFractions, TaggerSettings, ValidationCriterion,
};
pub use grid::{row_count, run_factor_grid, run_grid, GridReport, GridRow, GRID_COLUMNS};
pub use report::{write_report, ExperimentReport, ReportFiles};
pub use run::{derive_seed, CellKey, CellMetrics, DictionarySources, Prepared};
pub use scaling::{run_data_scaling, run_scaling, ScalingMetrics, ScalingReport, ScalingRow, SCALING_COLUMNS};
pub use split::{split_corpus, CorpusSplit};
