use std::path::{Path, PathBuf};

use super::config::{ExperimentConfig, Paths};
use crate::error::Result;
use crate::synthetic::{export_world, generate_world, ExportConfig, SyntheticWorldConfig, WorldFiles};

pub const MANIFEST_NAME: &str = "manifest.toml";

fn file_name(p: &Path) -> PathBuf {
    PathBuf::from(p.file_name().expect("bundle files have names"))
}

/// Generates a world, writes it under `dir`, and writes `manifest.toml`: an
/// experiment config whose paths are relative to `dir`, recording the world
/// and export settings. Returns the manifest path.
pub fn generate_bundle(
    world: &SyntheticWorldConfig,
    export: &ExportConfig,
    template: &ExperimentConfig,
    dir: &Path,
) -> Result<PathBuf> {
    let generated = generate_world(world)?;
    let files: WorldFiles = export_world(&generated, export, dir)?;
    let mut manifest = template.clone();
    manifest.paths = Paths {
        source_embeddings: file_name(&files.source_embeddings),
        target_embeddings: file_name(&files.target_embeddings),
        source_frequencies: Some(file_name(&files.source_frequencies)),
        target_frequencies: Some(file_name(&files.target_frequencies)),
        lexicon: Some(file_name(&files.lexicon)),
        muse_dictionary: Some(file_name(&files.muse_dictionary)),
        idp_dictionary: Some(file_name(&files.idp_dictionary)),
        stopwords: Some(file_name(&files.stopwords)),
        test_set: Some(file_name(&files.test_set)),
        pivot_corpus: file_name(&files.pivot_corpus),
        low_resource_corpus: file_name(&files.low_resource_corpus),
    };
    if manifest.output_dir.as_os_str().is_empty() {
        manifest.output_dir = PathBuf::from("out");
    }
    manifest.world = Some(world.clone());
    manifest.export = Some(export.clone());
    let path = dir.join(MANIFEST_NAME);
    manifest.save(&path)?;
    Ok(path)
}
