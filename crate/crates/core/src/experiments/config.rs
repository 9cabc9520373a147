use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::alignment::{AlignSettings, CcaOptions, Method};
use crate::dictionary::{Band, PairFormat, SourceKind};
use crate::embedding::{read_utf8, write_text};
use crate::error::{Error, Result};
use crate::synthetic::{ExportConfig, SyntheticWorldConfig};
use crate::tagger::{default_entity_types, TrainConfig};

/// Input files. Relative paths resolve against the config file's directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub source_embeddings: PathBuf,
    pub target_embeddings: PathBuf,
    pub source_frequencies: Option<PathBuf>,
    pub target_frequencies: Option<PathBuf>,
    /// Source → target word list backing the translation provider.
    pub lexicon: Option<PathBuf>,
    pub muse_dictionary: Option<PathBuf>,
    pub idp_dictionary: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub test_set: Option<PathBuf>,
    pub pivot_corpus: PathBuf,
    pub low_resource_corpus: PathBuf,
}

impl Paths {
    fn all_mut(&mut self) -> Vec<&mut PathBuf> {
        let mut out = vec![
            &mut self.source_embeddings,
            &mut self.target_embeddings,
            &mut self.pivot_corpus,
            &mut self.low_resource_corpus,
        ];
        for p in [
            &mut self.source_frequencies,
            &mut self.target_frequencies,
            &mut self.lexicon,
            &mut self.muse_dictionary,
            &mut self.idp_dictionary,
            &mut self.stopwords,
            &mut self.test_set,
        ]
        .into_iter()
        .flatten()
        {
            out.push(p);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbeddingSettings {
    /// Files start with an `n d` header line.
    pub header: bool,
    pub lowercase: bool,
}

impl Default for EmbeddingSettings {
    fn default() -> Self {
        Self {
            header: true,
            lowercase: false,
        }
    }
}

/// Score used to pick a validation threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationCriterion {
    /// P@1 on a held-out slice of the dictionary, the map fitted on the rest.
    HeldOutP1,
    /// Zero-shot F1 of the pivot tagger on the low-resource dev split.
    DevF1,
}

str_enum!(ValidationCriterion { HeldOutP1 => "held_out_p1", DevF1 => "dev_f1" });

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DictionarySettings {
    pub min_length: usize,
    pub oversample: f64,
    pub batch_size: usize,
    /// Target-frequency thresholds tried for domain dictionaries; empty
    /// disables validation.
    pub validation_thresholds: Vec<u64>,
    pub validation_criterion: ValidationCriterion,
    /// Share of the dictionary held out when tuning on P@1.
    pub validation_held_out: f64,
    pub muse_format: PairFormat,
    pub idp_format: PairFormat,
}

impl Default for DictionarySettings {
    fn default() -> Self {
        Self {
            min_length: 3,
            oversample: 1.5,
            batch_size: 1000,
            validation_thresholds: Vec::new(),
            validation_criterion: ValidationCriterion::HeldOutP1,
            validation_held_out: 0.2,
            muse_format: PairFormat::SpaceSeparated,
            idp_format: PairFormat::Tsv,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignmentSettings {
    pub method: Method,
    pub cca: CcaOptions,
    pub ridge: f64,
    pub center: bool,
}

impl Default for AlignmentSettings {
    fn default() -> Self {
        let s = AlignSettings::default();
        Self {
            method: Method::Cca,
            cca: s.cca,
            ridge: s.ridge,
            center: s.center,
        }
    }
}

impl AlignmentSettings {
    pub fn settings(&self) -> AlignSettings {
        AlignSettings {
            cca: self.cca,
            ridge: self.ridge,
            center: self.center,
        }
    }
}

/// Tagger hyperparameters; training seeds are derived per run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaggerSettings {
    pub epochs: usize,
    pub radius: usize,
    pub entity_types: Vec<String>,
}

impl Default for TaggerSettings {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            epochs: t.epochs,
            radius: t.radius,
            entity_types: default_entity_types(),
        }
    }
}

impl TaggerSettings {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            seed,
            radius: self.radius,
            entity_types: self.entity_types.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitFractions {
    pub train: f64,
    pub dev: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.70,
            dev: 0.15,
            test: 0.15,
        }
    }
}

impl SplitFractions {
    pub fn as_array(&self) -> [f64; 3] {
        [self.train, self.dev, self.test]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSettings {
    /// One factor at a time, keeping the best zero-shot setting of each
    /// block; otherwise the full Cartesian product.
    pub sequential: bool,
    pub sources: Vec<SourceKind>,
    pub sizes: Vec<usize>,
    pub bands: Vec<Band>,
    pub base_size: usize,
    pub base_band: Band,
    /// Low-resource training documents added for joint training.
    pub joint_docs: usize,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            sequential: true,
            sources: vec![SourceKind::Idp, SourceKind::Muse, SourceKind::Domain],
            sizes: vec![10000, 5000, 1000],
            bands: vec![Band::High, Band::Lower],
            base_size: 5000,
            base_band: Band::High,
            joint_docs: 200,
        }
    }
}

/// A number of low-resource training documents, or all of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DocCount {
    Count(usize),
    Full,
}

impl DocCount {
    pub fn resolve(self, available: usize) -> usize {
        match self {
            DocCount::Count(n) => n,
            DocCount::Full => available,
        }
    }
}

impl fmt::Display for DocCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DocCount::Count(n) => write!(f, "{n}"),
            DocCount::Full => f.write_str("full"),
        }
    }
}

impl std::str::FromStr for DocCount {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" | "all" => Ok(DocCount::Full),
            n => n
                .parse()
                .map(DocCount::Count)
                .map_err(|_| Error::Invalid(format!("doc count must be an integer or \"full\", got {s:?}"))),
        }
    }
}

impl Serialize for DocCount {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DocCount::Count(n) => s.serialize_u64(*n as u64),
            DocCount::Full => s.serialize_str("full"),
        }
    }
}

impl<'de> Deserialize<'de> for DocCount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = DocCount;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a non-negative integer or \"full\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<DocCount, E> {
                Ok(DocCount::Count(v as usize))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<DocCount, E> {
                usize::try_from(v)
                    .map(DocCount::Count)
                    .map_err(|_| E::custom(format!("doc count must be non-negative, got {v}")))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<DocCount, E> {
                v.parse().map_err(|e: Error| E::custom(e.to_string()))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingSettings {
    pub source: SourceKind,
    pub size: usize,
    pub band: Band,
    pub doc_counts: Vec<DocCount>,
}

impl Default for ScalingSettings {
    fn default() -> Self {
        Self {
            source: SourceKind::Domain,
            size: 5000,
            band: Band::High,
            doc_counts: vec![
                DocCount::Count(0),
                DocCount::Count(200),
                DocCount::Count(500),
                DocCount::Full,
            ],
        }
    }
}

/// Everything a grid or scaling run depends on besides the input files.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub paths: Paths,
    pub embeddings: EmbeddingSettings,
    pub dictionary: DictionarySettings,
    pub alignment: AlignmentSettings,
    pub tagger: TaggerSettings,
    pub split: SplitFractions,
    pub grid: GridSettings,
    pub scaling: ScalingSettings,
    /// Generator settings recorded by synthetic bundles; informational.
    pub world: Option<SyntheticWorldConfig>,
    pub export: Option<ExportConfig>,
}

impl ExperimentConfig {
    /// Parses TOML; relative paths are resolved against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.resolve_paths(base_dir);
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = read_utf8(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn resolve_paths(&mut self, base_dir: &Path) {
        let mut targets = self.paths.all_mut();
        targets.push(&mut self.output_dir);
        for p in targets {
            if p.is_relative() && !p.as_os_str().is_empty() {
                *p = base_dir.join(&*p);
            }
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path.as_ref(), &self.to_toml()?)
    }

    /// Checks everything that can be checked without reading data files.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let f = self.split.as_array();
        if f.iter().any(|x| !(*x >= 0.0)) || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad(format!("split fractions {f:?} must be non-negative and sum to 1"));
        }
        if self.split.train <= 0.0 || self.split.test <= 0.0 {
            return bad("train and test fractions must be positive".into());
        }
        if self.master_seed > i64::MAX as u64 {
            return bad(format!("master_seed must be at most {}", i64::MAX));
        }
        let required = [
            ("source_embeddings", &self.paths.source_embeddings),
            ("target_embeddings", &self.paths.target_embeddings),
            ("pivot_corpus", &self.paths.pivot_corpus),
            ("low_resource_corpus", &self.paths.low_resource_corpus),
        ];
        for (name, p) in required {
            if p.as_os_str().is_empty() {
                return bad(format!("paths.{name} is required"));
            }
        }
        let mut all = self.paths.clone();
        for p in all.all_mut() {
            if !p.exists() {
                return bad(format!("path does not exist: {}", p.display()));
            }
        }
        if self.output_dir.as_os_str().is_empty() {
            return bad("output_dir is required".into());
        }
        let g = &self.grid;
        if g.sources.is_empty() || g.sizes.is_empty() || g.bands.is_empty() {
            return bad("grid axes must be non-empty".into());
        }
        if g.sizes.contains(&0) || g.base_size == 0 || self.scaling.size == 0 {
            return bad("dictionary sizes must be positive".into());
        }
        if g.sources.contains(&SourceKind::Synthetic) || self.scaling.source == SourceKind::Synthetic {
            return bad("dictionary source must be domain, muse or idp".into());
        }
        if self.scaling.doc_counts.is_empty() {
            return bad("scaling.doc_counts must be non-empty".into());
        }
        if self.tagger.epochs == 0 {
            return bad("tagger.epochs must be >= 1".into());
        }
        if self.dictionary.min_length == 0 || self.dictionary.batch_size == 0 {
            return bad("dictionary.min_length and batch_size must be positive".into());
        }
        let h = self.dictionary.validation_held_out;
        if !(h > 0.0 && h < 1.0) {
            return bad(format!("dictionary.validation_held_out {h} outside (0, 1)"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let mut c = ExperimentConfig::default();
        c.output_dir = "/tmp/out".into();
        c.paths.source_embeddings = "/x/de.vec".into();
        let text = c.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&text, Path::new("/")).unwrap(), c);
    }

    #[test]
    fn relative_paths_resolve_against_base() {
        let c = ExperimentConfig::from_toml(
            "output_dir = \"out\"\n[paths]\nsource_embeddings = \"de.vec\"\ntest_set = \"/abs/t.txt\"\n",
            Path::new("/data"),
        )
        .unwrap();
        assert_eq!(c.paths.source_embeddings, Path::new("/data/de.vec"));
        assert_eq!(c.paths.test_set.as_deref(), Some(Path::new("/abs/t.txt")));
        assert_eq!(c.output_dir, Path::new("/data/out"));
    }

    #[test]
    fn doc_counts_accept_integers_and_full() {
        let c = ExperimentConfig::from_toml("[scaling]\ndoc_counts = [0, 200, \"full\"]\n", Path::new("/")).unwrap();
        assert_eq!(
            c.scaling.doc_counts,
            vec![DocCount::Count(0), DocCount::Count(200), DocCount::Full]
        );
        assert!(ExperimentConfig::from_toml("[scaling]\ndoc_counts = [-1]\n", Path::new("/")).is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::from_toml("[grid]\nsequentail = true\n", Path::new("/")).is_err());
    }

    #[test]
    fn fractions_must_sum_to_one() {
        let mut c = ExperimentConfig::default();
        c.split = SplitFractions {
            train: 0.5,
            dev: 0.5,
            test: 0.1,
        };
        assert!(matches!(c.validate(), Err(Error::Config(m)) if m.contains("sum to 1")));
    }
}
