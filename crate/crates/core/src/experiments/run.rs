use std::collections::{HashMap, HashSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::config::{DictionarySettings, ExperimentConfig, ValidationCriterion};
use super::split::{split_corpus, CorpusSplit};
use crate::alignment::{fit, pair_matrices, project_space, Method};
use crate::dictionary::{
    build_domain_dictionary, load_pair_dictionary, load_stopwords, seed_candidates, split_dictionary,
    tune_validation_threshold, validate_pairs, Band, DomainDictionaryOptions, FileTranslationProvider, SeedDictionary,
    Selection, SourceKind,
};
use crate::embedding::{load_embeddings_with, EmbeddingSpace, FrequencyTable, LoadOptions};
use crate::error::{Error, Result};
use crate::intrinsic::{load_test_set, precision_at_1, TranslationTestSet};
use crate::tagger::{evaluate_f1, load_conll, train_tagger, TaggedCorpus, TaggerModel};

/// First eight bytes, big-endian, of `SHA-256("{master_seed}:{key}")`.
pub fn derive_seed(master_seed: u64, key: &str) -> u64 {
    let digest = Sha256::digest(format!("{master_seed}:{key}").as_bytes());
    u64::from_be_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// One dictionary/map configuration. `band` is `None` for a generic
/// dictionary used in file order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CellKey {
    pub source: SourceKind,
    pub size: usize,
    pub band: Option<Band>,
    pub method: Method,
}

impl fmt::Display for CellKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let band = self.band.map_or("file_order".to_string(), |b| b.to_string());
        write!(
            f,
            "source={} size={} band={band} method={}",
            self.source, self.size, self.method
        )
    }
}

fn size_label(size: usize) -> String {
    if size % 1000 == 0 {
        format!("{}k", size / 1000)
    } else {
        size.to_string()
    }
}

impl CellKey {
    pub fn seed(&self, master_seed: u64) -> u64 {
        derive_seed(master_seed, &format!("cell {self}"))
    }

    /// Row label in the style of "domain + 5k + high freq".
    pub fn label(&self) -> String {
        let source = match self.source {
            SourceKind::Domain => "domain",
            SourceKind::Muse => "MUSE",
            SourceKind::Idp => "IDP",
            SourceKind::Synthetic => "synthetic",
        };
        let mut out = format!("{source} + {}", size_label(self.size));
        if let Some(b) = self.band {
            out.push_str(match b {
                Band::High => " + high freq",
                Band::Lower => " + lower freq",
            });
        }
        out
    }
}

/// Measurements of one successful cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellMetrics {
    pub dict_pairs: usize,
    pub threshold: Option<u64>,
    pub map_pairs: usize,
    pub p_at_1: Option<f64>,
    pub p1_skipped_oov: usize,
    pub zero_shot_f1: f64,
    pub joint_f1: f64,
    pub joint_docs: usize,
}

/// Everything needed to build the seed dictionary of any cell.
pub struct DictionarySources {
    settings: DictionarySettings,
    pub source_freqs: Option<FrequencyTable>,
    provider: Option<FileTranslationProvider>,
    muse: Option<SeedDictionary>,
    idp: Option<SeedDictionary>,
    stopwords: HashSet<String>,
}

impl DictionarySources {
    /// Loads the configured frequency table, lexicon, generic dictionaries
    /// and stopwords; unset paths stay empty.
    pub fn load(config: &ExperimentConfig) -> Result<Self> {
        let p = &config.paths;
        let settings = config.dictionary.clone();
        Ok(Self {
            source_freqs: p.source_frequencies.as_ref().map(FrequencyTable::load).transpose()?,
            provider: p.lexicon.as_ref().map(FileTranslationProvider::load).transpose()?,
            muse: p
                .muse_dictionary
                .as_ref()
                .map(|path| load_pair_dictionary(path, settings.muse_format, SourceKind::Muse))
                .transpose()?,
            idp: p
                .idp_dictionary
                .as_ref()
                .map(|path| load_pair_dictionary(path, settings.idp_format, SourceKind::Idp))
                .transpose()?,
            stopwords: p
                .stopwords
                .as_ref()
                .map(load_stopwords)
                .transpose()?
                .unwrap_or_default(),
            settings,
        })
    }

    fn source_freqs(&self) -> Result<&FrequencyTable> {
        self.source_freqs
            .as_ref()
            .ok_or_else(|| Error::Config("paths.source_frequencies is required for this dictionary".into()))
    }

    /// Builds the seed dictionary of `key`, before validation.
    pub fn build(&self, key: &CellKey) -> Result<SeedDictionary> {
        let d = &self.settings;
        let generic = match key.source {
            SourceKind::Domain => {
                let provider = self
                    .provider
                    .as_ref()
                    .ok_or_else(|| Error::Config("paths.lexicon is required for domain dictionaries".into()))?;
                let opts = DomainDictionaryOptions {
                    band: key.band.unwrap_or(Band::High),
                    size: key.size,
                    min_length: d.min_length,
                    oversample: d.oversample,
                    batch_size: d.batch_size,
                };
                return build_domain_dictionary(self.source_freqs()?, provider, &self.stopwords, &opts);
            }
            SourceKind::Muse => self.muse.as_ref().ok_or("paths.muse_dictionary"),
            SourceKind::Idp => self.idp.as_ref().ok_or("paths.idp_dictionary"),
            SourceKind::Synthetic => return Err(Error::Config("synthetic is not a grid dictionary source".into())),
        }
        .map_err(|field| Error::Config(format!("{field} is required for {} dictionaries", key.source)))?;
        self.select_generic(generic, key)
    }

    /// File order without a band; otherwise pairs whose source word lies in
    /// the band, ordered by source frequency rank.
    fn select_generic(&self, dict: &SeedDictionary, key: &CellKey) -> Result<SeedDictionary> {
        let chosen = match key.band {
            None => dict.pairs().to_vec(),
            Some(band) => {
                let candidates = seed_candidates(self.source_freqs()?, band, &self.stopwords, 1);
                let rank: HashMap<&str, usize> = candidates.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
                let mut ranked: Vec<(usize, &(String, String))> = dict
                    .pairs()
                    .iter()
                    .filter_map(|p| rank.get(p.0.as_str()).map(|&r| (r, p)))
                    .collect();
                ranked.sort_by_key(|(r, _)| *r);
                ranked.into_iter().map(|(_, p)| p.clone()).collect()
            }
        };
        if chosen.len() < key.size {
            return Err(Error::Insufficient {
                requested: key.size,
                available: chosen.len(),
            });
        }
        let selection = key.band.map_or(Selection::Explicit, Band::selection);
        Ok(SeedDictionary::new(chosen, dict.source_kind, selection)?
            .truncated(key.size)
            .with_notes(dict.provenance_notes.clone()))
    }
}

/// Loaded inputs, splits and the pivot-only tagger shared by every cell.
pub struct Prepared {
    pub config: ExperimentConfig,
    pub source: EmbeddingSpace,
    pub target: EmbeddingSpace,
    pub dictionaries: DictionarySources,
    pub target_freqs: Option<FrequencyTable>,
    pub test_set: Option<TranslationTestSet>,
    pub pivot: CorpusSplit,
    pub low: CorpusSplit,
    /// Seeded order of the low-resource train documents; subsets are prefixes.
    low_order: Vec<usize>,
    pub pivot_model: TaggerModel,
}

impl Prepared {
    /// Validates the config and loads every input. Fails before any cell
    /// runs.
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let p = &config.paths;
        let opts = LoadOptions {
            expect_header: config.embeddings.header,
            lowercase: config.embeddings.lowercase,
            language: None,
        };
        let source = load_embeddings_with(&p.source_embeddings, &opts)?;
        let target = load_embeddings_with(&p.target_embeddings, &opts)?;
        if source.language() == target.language() {
            return Err(Error::Config(format!(
                "source and target embeddings share the language tag {:?}; name the files by language",
                source.language()
            )));
        }
        let dictionaries = DictionarySources::load(config)?;
        let target_freqs = p.target_frequencies.as_ref().map(FrequencyTable::load).transpose()?;
        if !config.dictionary.validation_thresholds.is_empty() && target_freqs.is_none() {
            return Err(Error::Config(
                "validation_thresholds need paths.target_frequencies".into(),
            ));
        }
        let test_set = p.test_set.as_ref().map(load_test_set).transpose()?;

        let mut pivot_corpus = load_conll(&p.pivot_corpus)?;
        pivot_corpus.language = target.language().to_string();
        let mut low_corpus = load_conll(&p.low_resource_corpus)?;
        low_corpus.language = source.language().to_string();
        let fractions = config.split.as_array();
        let seed = config.master_seed;
        let pivot = split_corpus(&pivot_corpus, fractions, derive_seed(seed, "split pivot"))?;
        let low = split_corpus(&low_corpus, fractions, derive_seed(seed, "split low-resource"))?;
        if pivot.train.is_empty() || low.test.is_empty() {
            return Err(Error::Config(
                "pivot train split and low-resource test split must be non-empty".into(),
            ));
        }
        let available = low.train.len();
        let too_many = |n: usize, what: &str| {
            Err(Error::Config(format!(
                "{what} asks for {n} documents but the low-resource train split has {available}"
            )))
        };
        if config.grid.joint_docs > available {
            return too_many(config.grid.joint_docs, "grid.joint_docs");
        }
        for c in &config.scaling.doc_counts {
            if c.resolve(available) > available {
                return too_many(c.resolve(available), "scaling.doc_counts");
            }
        }
        let mut low_order: Vec<usize> = (0..available).collect();
        low_order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, "low-resource order")));

        let spaces = HashMap::from([(target.language().to_string(), &target)]);
        let pivot_model = train_tagger(
            &[&pivot.train],
            &spaces,
            &config.tagger.train_config(derive_seed(seed, "tagger pivot")),
        )?;
        Ok(Self {
            config: config.clone(),
            source,
            target,
            dictionaries,
            target_freqs,
            test_set,
            pivot,
            low,
            low_order,
            pivot_model,
        })
    }

    /// The first `n` low-resource train documents in the seeded order.
    pub fn low_subset(&self, n: usize) -> TaggedCorpus {
        self.low.train.select(&self.low_order[..n])
    }

    pub fn dictionary(&self, key: &CellKey) -> Result<SeedDictionary> {
        self.dictionaries.build(key)
    }

    /// Fits the configured map on `dict` and projects the whole source space.
    pub fn project(&self, dict: &SeedDictionary) -> Result<(EmbeddingSpace, usize)> {
        let pm = pair_matrices(dict, &self.source, &self.target)?;
        let map = fit(self.config.alignment.method, &pm, &self.config.alignment.settings())?;
        Ok((project_space(&self.source, &map)?, pm.n()))
    }

    /// Zero-shot macro F1 of the pivot tagger on low-resource documents.
    pub fn zero_shot(&self, projected: &EmbeddingSpace, docs: &TaggedCorpus) -> Result<f64> {
        Ok(evaluate_f1(&self.pivot_model, docs, projected)?.macro_f1)
    }

    /// Tunes and applies frequency validation when thresholds are configured
    /// and the dictionary is a domain one.
    pub fn validated(&self, dict: SeedDictionary, seed: u64) -> Result<(SeedDictionary, Option<u64>)> {
        let settings = &self.config.dictionary;
        if settings.validation_thresholds.is_empty() || dict.source_kind != SourceKind::Domain {
            return Ok((dict, None));
        }
        let freqs = self.target_freqs.as_ref().expect("checked in Prepared::new");
        let (threshold, score) = match settings.validation_criterion {
            ValidationCriterion::HeldOutP1 => {
                let split = split_dictionary(
                    &dict,
                    1.0 - settings.validation_held_out,
                    derive_seed(seed, "validation split"),
                )?;
                let held_out = TranslationTestSet::from_pairs(split.held_out.pairs().iter().cloned());
                tune_validation_threshold(&split.train, freqs, &settings.validation_thresholds, |d| {
                    // A threshold that leaves too few pairs to fit never wins.
                    if d.len() <= self.source.dim() {
                        return Ok(f64::NEG_INFINITY);
                    }
                    let (projected, _) = self.project(d)?;
                    Ok(precision_at_1(&projected, &self.target, &held_out)?.p_at_1)
                })?
            }
            ValidationCriterion::DevF1 => {
                let dev = if self.low.dev.is_empty() {
                    &self.low.test
                } else {
                    &self.low.dev
                };
                tune_validation_threshold(&dict, freqs, &settings.validation_thresholds, |d| {
                    if d.len() <= self.source.dim() {
                        return Ok(f64::NEG_INFINITY);
                    }
                    let (projected, _) = self.project(d)?;
                    self.zero_shot(&projected, dev)
                })?
            }
        };
        log::info!(
            "validation threshold {threshold} ({} {score})",
            settings.validation_criterion
        );
        Ok((validate_pairs(&dict, freqs, threshold).0, Some(threshold)))
    }

    /// Dictionary → validation → map → projection → P@1 → zero-shot F1 →
    /// joint F1.
    pub fn run_cell(&self, key: &CellKey) -> Result<CellMetrics> {
        let dict = self.dictionary(key)?;
        let dict_pairs = dict.len();
        let (dict, threshold) = self.validated(dict, key.seed(self.config.master_seed))?;
        let (projected, map_pairs) = self.project(&dict)?;
        let (p_at_1, p1_skipped_oov) = match &self.test_set {
            Some(test) => {
                let r = precision_at_1(&projected, &self.target, test)?;
                ((!r.no_evaluable).then_some(r.p_at_1), r.skipped_oov)
            }
            None => (None, 0),
        };
        let zero_shot_f1 = self.zero_shot(&projected, &self.low.test)?;

        let joint_docs = self.config.grid.joint_docs;
        let subset = self.low_subset(joint_docs);
        let spaces = HashMap::from([
            (self.target.language().to_string(), &self.target),
            (self.source.language().to_string(), &projected),
        ]);
        let joint = train_tagger(
            &[&self.pivot.train, &subset],
            &spaces,
            &self.config.tagger.train_config(key.seed(self.config.master_seed)),
        )?;
        let joint_f1 = evaluate_f1(&joint, &self.low.test, &projected)?.macro_f1;
        Ok(CellMetrics {
            dict_pairs,
            threshold,
            map_pairs,
            p_at_1,
            p1_skipped_oov,
            zero_shot_f1,
            joint_f1,
            joint_docs,
        })
    }
}
