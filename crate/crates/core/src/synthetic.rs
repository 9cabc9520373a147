//! Seeded bilingual worlds with known ground truth.
//!
//! The pivot ("e") space holds unit-normalized Gaussian rows; the other ("g")
//! space is `target · true_map + noise`, word `g_i` translating `e_i`. Word
//! index doubles as frequency rank, and counts follow a Zipf law. Templated
//! BIO corpora draw context, entity and filler words from fixed rank strata,
//! with the most frequent words acting as section headers and entity
//! contexts.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dictionary::{PairFormat, SeedDictionary, Selection, SourceKind};
use crate::embedding::{save_embeddings, EmbeddingSpace, FrequencyTable};
use crate::error::{Error, Result};
use crate::intrinsic::TranslationTestSet;
use crate::linalg;
use crate::tagger::{Sequence, TaggedCorpus, JOB_TITLE, ORG_NAME};

pub const PIVOT_LANGUAGE: &str = "en";
pub const SOURCE_LANGUAGE: &str = "de";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Orthogonal,
    GeneralLinear,
}

str_enum!(MapKind { Orthogonal => "orthogonal", GeneralLinear => "general_linear" });

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticWorldConfig {
    pub vocab_size: usize,
    pub dim: usize,
    /// Per-component Gaussian noise added to source vectors.
    pub noise_sigma: f64,
    pub map_kind: MapKind,
    pub zipf_exponent: f64,
    pub seed: u64,
    pub dict_train: usize,
    pub dict_test: usize,
    /// Count of the rank-1 word.
    pub max_count: u64,
    /// Ranks above this get noise `sigma · (rank / pivot)^exponent`; unset
    /// means uniform noise.
    pub noise_rank_pivot: Option<usize>,
    pub noise_rank_exponent: f64,
    /// Test words are sampled from this many ranks following the train
    /// ranks; unset means all remaining ranks.
    pub test_pool: Option<usize>,
}

impl Default for SyntheticWorldConfig {
    fn default() -> Self {
        Self {
            vocab_size: 5000,
            dim: 50,
            noise_sigma: 0.0,
            map_kind: MapKind::Orthogonal,
            zipf_exponent: 1.0,
            seed: 0,
            dict_train: 2000,
            dict_test: 1000,
            max_count: 1_000_000,
            noise_rank_pivot: None,
            noise_rank_exponent: 0.0,
            test_pool: None,
        }
    }
}

impl SyntheticWorldConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.vocab_size == 0 || self.dim == 0 {
            return bad("vocab_size and dim must be positive".into());
        }
        if self.dim > self.vocab_size {
            return bad(format!("dim {} exceeds vocab_size {}", self.dim, self.vocab_size));
        }
        if self.dict_train == 0 || self.dict_test == 0 {
            return bad("dict_train and dict_test must be positive".into());
        }
        if self.dict_train + self.dict_test > self.vocab_size {
            return bad(format!(
                "dict_train + dict_test = {} exceeds vocab_size {}",
                self.dict_train + self.dict_test,
                self.vocab_size
            ));
        }
        if let Some(pool) = self.test_pool {
            if pool < self.dict_test || self.dict_train + pool > self.vocab_size {
                return bad(format!("test_pool {pool} cannot hold {} test words", self.dict_test));
            }
        }
        if !(self.noise_sigma >= 0.0) || !(self.zipf_exponent > 0.0) || self.max_count == 0 {
            return bad("noise_sigma must be >= 0, zipf_exponent > 0, max_count >= 1".into());
        }
        if self.noise_rank_pivot == Some(0) {
            return bad("noise_rank_pivot must be positive".into());
        }
        Ok(())
    }

    /// Noise scale for the word at 1-based `rank`.
    pub fn noise_at_rank(&self, rank: usize) -> f64 {
        match self.noise_rank_pivot {
            Some(pivot) if rank > pivot => {
                self.noise_sigma * (rank as f64 / pivot as f64).powf(self.noise_rank_exponent)
            }
            _ => self.noise_sigma,
        }
    }
}

pub struct SyntheticWorld {
    pub config: SyntheticWorldConfig,
    pub target_space: EmbeddingSpace,
    pub source_space: EmbeddingSpace,
    /// `source_i = target_i · true_map + noise_i`.
    pub true_map: DMatrix<f64>,
    pub gold_train: SeedDictionary,
    pub gold_test: SeedDictionary,
}

fn word_form(prefix: char, index: usize, vocab: usize) -> String {
    let width = vocab.to_string().len().max(4);
    format!("{prefix}{:0width$}", index + 1)
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    // Filled row by row so the draw order is independent of storage layout.
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        data.push(StandardNormal.sample(rng));
    }
    DMatrix::from_row_slice(rows, cols, &data)
}

/// Orthonormalizes a Gaussian matrix; QR signs are fixed so `R` has a
/// positive diagonal.
fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let g = gaussian_matrix(rng, d, d);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            let neg = -q.column(j);
            q.set_column(j, &neg);
        }
    }
    q
}

impl SyntheticWorld {
    pub fn generate(config: &SyntheticWorldConfig) -> Result<Self> {
        config.validate()?;
        let (v, d) = (config.vocab_size, config.dim);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

        let mut target = gaussian_matrix(&mut rng, v, d);
        for mut row in target.row_iter_mut() {
            let n = row.norm();
            row /= n;
        }
        let true_map = match config.map_kind {
            MapKind::Orthogonal => random_orthogonal(&mut rng, d),
            // Identity plus a scaled Gaussian keeps the map well conditioned.
            MapKind::GeneralLinear => {
                DMatrix::<f64>::identity(d, d) + gaussian_matrix(&mut rng, d, d) * (0.5 / (d as f64).sqrt())
            }
        };
        let mut source = &target * &true_map;
        if config.noise_sigma > 0.0 {
            for i in 0..v {
                let sigma = config.noise_at_rank(i + 1);
                for j in 0..d {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    source[(i, j)] += sigma * z;
                }
            }
        }

        let counts: Vec<u64> = (1..=v)
            .map(|r| {
                let c = (config.max_count as f64 * (r as f64).powf(-config.zipf_exponent)).round();
                (c as u64).max(1)
            })
            .collect();
        let target_words: Vec<String> = (0..v).map(|i| word_form('e', i, v)).collect();
        let source_words: Vec<String> = (0..v).map(|i| word_form('g', i, v)).collect();
        let freq = |words: &[String]| FrequencyTable::from_counts(words.iter().cloned().zip(counts.iter().copied()));
        let target_space = EmbeddingSpace::new(PIVOT_LANGUAGE, target_words.clone(), d, linalg::to_rows(&target))?
            .with_frequencies(freq(&target_words)?)?;
        let source_space = EmbeddingSpace::new(SOURCE_LANGUAGE, source_words.clone(), d, linalg::to_rows(&source))?
            .with_frequencies(freq(&source_words)?)?;

        let pair = |i: usize| (source_words[i].clone(), target_words[i].clone());
        let gold_train = SeedDictionary::new(
            (0..config.dict_train).map(pair).collect(),
            SourceKind::Synthetic,
            Selection::HighFreq,
        )?
        .with_notes(format!("synthetic gold train, seed {}", config.seed));
        let pool = config.test_pool.unwrap_or(v - config.dict_train);
        let mut picked: Vec<usize> = index::sample(&mut rng, pool, config.dict_test)
            .into_iter()
            .map(|i| config.dict_train + i)
            .collect();
        picked.sort_unstable();
        let gold_test = SeedDictionary::new(
            picked.into_iter().map(pair).collect(),
            SourceKind::Synthetic,
            Selection::Explicit,
        )?
        .with_notes(format!("synthetic gold test, seed {}", config.seed));

        Ok(Self {
            config: config.clone(),
            target_space,
            source_space,
            true_map,
            gold_train,
            gold_test,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.config.vocab_size
    }

    pub fn source_word(&self, index: usize) -> String {
        word_form('g', index, self.vocab_size())
    }

    pub fn target_word(&self, index: usize) -> String {
        word_form('e', index, self.vocab_size())
    }

    /// The exact source → target map, `true_map⁻¹`.
    pub fn source_to_target_map(&self) -> Result<DMatrix<f64>> {
        match self.config.map_kind {
            MapKind::Orthogonal => Ok(self.true_map.transpose()),
            MapKind::GeneralLinear => self
                .true_map
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::Numerical("generating map is singular".into())),
        }
    }

    pub fn test_set(&self) -> TranslationTestSet {
        TranslationTestSet::from_pairs(self.gold_test.pairs().iter().cloned())
    }

    /// Source → target lexicon for every word, with `miss_rate` of the
    /// entries left out (seeded).
    pub fn lexicon(&self, miss_rate: f64, seed: u64) -> Vec<(String, String)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..self.vocab_size())
            .filter(|_| !(rng.random::<f64>() < miss_rate))
            .map(|i| (self.source_word(i), self.target_word(i)))
            .collect()
    }

    /// A frequency-agnostic dictionary: `size` words sampled uniformly from
    /// the `pool` most frequent words (all words when unset; test words
    /// excluded), in random order, with `wrong_fraction` of the targets
    /// replaced by a random other word.
    pub fn generic_dictionary(
        &self,
        size: usize,
        pool: Option<usize>,
        wrong_fraction: f64,
        kind: SourceKind,
        seed: u64,
    ) -> Result<SeedDictionary> {
        let test: BTreeSet<&str> = self.gold_test.pairs().iter().map(|p| p.0.as_str()).collect();
        let pool = pool.unwrap_or(self.vocab_size()).min(self.vocab_size());
        let mut candidates: Vec<usize> = (0..pool)
            .filter(|&i| !test.contains(self.source_word(i).as_str()))
            .collect();
        if candidates.len() < size {
            return Err(Error::Insufficient {
                requested: size,
                available: candidates.len(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        candidates.shuffle(&mut rng);
        candidates.truncate(size);
        let v = self.vocab_size();
        let pairs = candidates
            .into_iter()
            .map(|i| {
                let t = if rng.random::<f64>() < wrong_fraction {
                    (i + rng.random_range(1..v)) % v
                } else {
                    i
                };
                (self.source_word(i), self.target_word(t))
            })
            .collect();
        Ok(
            SeedDictionary::new(pairs, kind, Selection::Explicit)?.with_notes(format!(
                "synthetic generic dictionary, wrong fraction {wrong_fraction}, seed {seed}"
            )),
        )
    }
}

pub fn generate_world(config: &SyntheticWorldConfig) -> Result<SyntheticWorld> {
    SyntheticWorld::generate(config)
}

/// Sizes and placement of the rank strata used by the corpus templates.
/// Header, context, separator and filler words take the top ranks in that
/// order; entity words follow, or start at `entity_rank_start` when set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub header_words: usize,
    pub job_context_words: usize,
    pub org_context_words: usize,
    pub separator_words: usize,
    pub filler_words: usize,
    pub job_words: usize,
    pub org_words: usize,
    /// 0-based rank of the first entity word.
    pub entity_rank_start: Option<usize>,
    /// Rank step between consecutive entity words; job words come first.
    pub entity_rank_stride: usize,
    /// Mean entity mentions per document.
    pub entities_per_doc: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            header_words: 4,
            job_context_words: 6,
            org_context_words: 6,
            separator_words: 6,
            filler_words: 500,
            job_words: 150,
            org_words: 150,
            entity_rank_start: None,
            entity_rank_stride: 1,
            entities_per_doc: 11,
        }
    }
}

/// Word indices of each stratum, ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strata {
    pub header: Vec<usize>,
    pub job_context: Vec<usize>,
    pub org_context: Vec<usize>,
    pub separator: Vec<usize>,
    pub filler: Vec<usize>,
    pub job: Vec<usize>,
    pub org: Vec<usize>,
}

impl CorpusConfig {
    pub fn strata(&self, vocab_size: usize) -> Result<Strata> {
        let sizes = [
            self.header_words,
            self.job_context_words,
            self.org_context_words,
            self.separator_words,
            self.filler_words,
            self.job_words,
            self.org_words,
        ];
        if sizes.contains(&0) || self.entity_rank_stride == 0 {
            return Err(Error::Config(
                "every corpus stratum needs at least one word and the stride must be positive".into(),
            ));
        }
        let mut start = 0;
        let mut next = |n: usize| {
            let r: Vec<usize> = (start..start + n).collect();
            start += n;
            r
        };
        let header = next(self.header_words);
        let job_context = next(self.job_context_words);
        let org_context = next(self.org_context_words);
        let separator = next(self.separator_words);
        let filler = next(self.filler_words);
        let first = self.entity_rank_start.unwrap_or(start);
        if first < start {
            return Err(Error::Config(format!(
                "entity_rank_start {first} overlaps the {start} context and filler words"
            )));
        }
        let n_entities = self.job_words + self.org_words;
        let needed = first + (n_entities - 1) * self.entity_rank_stride + 1;
        if needed > vocab_size {
            return Err(Error::Insufficient {
                requested: needed,
                available: vocab_size,
            });
        }
        let rank = |i: usize| first + i * self.entity_rank_stride;
        Ok(Strata {
            header,
            job_context,
            org_context,
            separator,
            filler,
            job: (0..self.job_words).map(rank).collect(),
            org: (self.job_words..n_entities).map(rank).collect(),
        })
    }
}

/// Token-aligned corpora in both languages.
#[derive(Clone, Debug)]
pub struct ParallelCorpora {
    pub source: TaggedCorpus,
    pub target: TaggedCorpus,
    pub span_counts: HashMap<String, usize>,
}

fn pick(rng: &mut ChaCha8Rng, stratum: &[usize]) -> usize {
    stratum[rng.random_range(0..stratum.len())]
}

/// `n_sequences` documents, each a header word followed by clauses of the
/// form `context ENTITY+` with a separator and optional filler between
/// clauses. The source corpus is the word-by-word translation of the target
/// corpus.
pub fn generate_tagged_corpora(
    world: &SyntheticWorld,
    corpus: &CorpusConfig,
    n_sequences: usize,
    seed: u64,
) -> Result<ParallelCorpora> {
    if n_sequences == 0 {
        return Err(Error::Invalid("n_sequences must be >= 1".into()));
    }
    let strata = corpus.strata(world.vocab_size())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = corpus.entities_per_doc.max(1);
    let mut docs: Vec<(Vec<usize>, Vec<String>)> = Vec::with_capacity(n_sequences);
    let mut span_counts: HashMap<String, usize> =
        HashMap::from([(JOB_TITLE.to_string(), 0), (ORG_NAME.to_string(), 0)]);

    for _ in 0..n_sequences {
        let target_entities = rng.random_range((mean / 2).max(1)..=mean + mean / 2);
        let mut words = vec![pick(&mut rng, &strata.header)];
        let mut labels = vec!["O".to_string()];
        let mut entities = 0;
        while entities < target_entities {
            let order: &[bool] = match rng.random_range(0..4) {
                0 => &[true, false],
                1 => &[false, true],
                2 => &[true],
                _ => &[false],
            };
            for &job in order {
                let (context, stratum, max_len, ty) = if job {
                    (&strata.job_context, &strata.job, 3, JOB_TITLE)
                } else {
                    (&strata.org_context, &strata.org, 2, ORG_NAME)
                };
                words.push(pick(&mut rng, context));
                labels.push("O".into());
                let len = rng.random_range(1..=max_len);
                for k in 0..len {
                    words.push(pick(&mut rng, stratum));
                    labels.push(format!("{}-{ty}", if k == 0 { 'B' } else { 'I' }));
                }
                *span_counts.get_mut(ty).expect("known type") += 1;
                entities += 1;
            }
            words.push(pick(&mut rng, &strata.separator));
            labels.push("O".into());
            for _ in 0..rng.random_range(0..=3) {
                words.push(pick(&mut rng, &strata.filler));
                labels.push("O".into());
            }
        }
        docs.push((words, labels));
    }

    let build = |lang: &str, form: &dyn Fn(usize) -> String| -> TaggedCorpus {
        let sequences = docs
            .iter()
            .map(|(w, l)| Sequence {
                tokens: w.iter().map(|&i| form(i)).collect(),
                labels: l.clone(),
            })
            .collect();
        TaggedCorpus::new(lang, sequences)
    };
    Ok(ParallelCorpora {
        source: build(SOURCE_LANGUAGE, &|i| world.source_word(i)),
        target: build(PIVOT_LANGUAGE, &|i| world.target_word(i)),
        span_counts,
    })
}

/// File names used when a world is written to disk.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldFiles {
    pub source_embeddings: PathBuf,
    pub target_embeddings: PathBuf,
    pub source_frequencies: PathBuf,
    pub target_frequencies: PathBuf,
    pub lexicon: PathBuf,
    pub train_dictionary: PathBuf,
    pub test_set: PathBuf,
    pub muse_dictionary: PathBuf,
    pub idp_dictionary: PathBuf,
    pub stopwords: PathBuf,
    pub pivot_corpus: PathBuf,
    pub low_resource_corpus: PathBuf,
}

impl WorldFiles {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            source_embeddings: dir.join("de.vec"),
            target_embeddings: dir.join("en.vec"),
            source_frequencies: dir.join("de.freq.tsv"),
            target_frequencies: dir.join("en.freq.tsv"),
            lexicon: dir.join("lexicon.tsv"),
            train_dictionary: dir.join("train.dict.txt"),
            test_set: dir.join("test.dict.txt"),
            muse_dictionary: dir.join("muse.dict.txt"),
            idp_dictionary: dir.join("idp.dict.tsv"),
            stopwords: dir.join("stopwords.txt"),
            pivot_corpus: dir.join("en.conll"),
            low_resource_corpus: dir.join("de.conll"),
        }
    }
}

/// What to write next to the embeddings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExportConfig {
    pub corpus: CorpusConfig,
    pub pivot_docs: usize,
    pub low_resource_docs: usize,
    pub lexicon_miss_rate: f64,
    pub generic_size: usize,
    /// Generic dictionaries sample from this many top ranks; unset means the
    /// whole vocabulary.
    pub generic_pool: Option<usize>,
    pub idp_wrong_fraction: f64,
}

impl Default for ExportConfig {
    fn default() -> Self {
        Self {
            corpus: CorpusConfig::default(),
            pivot_docs: 400,
            low_resource_docs: 400,
            lexicon_miss_rate: 0.05,
            generic_size: 2000,
            generic_pool: None,
            idp_wrong_fraction: 0.2,
        }
    }
}

/// Writes every artifact of `world` under `dir` in the standard formats.
/// Sub-seeds are derived from the world seed.
pub fn export_world(world: &SyntheticWorld, export: &ExportConfig, dir: &Path) -> Result<WorldFiles> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = WorldFiles::in_dir(dir);
    let seed = world.config.seed;
    save_embeddings(&world.source_space, &files.source_embeddings)?;
    save_embeddings(&world.target_space, &files.target_embeddings)?;
    world
        .source_space
        .frequencies()
        .expect("generated")
        .save(&files.source_frequencies)?;
    world
        .target_space
        .frequencies()
        .expect("generated")
        .save(&files.target_frequencies)?;

    let lexicon = world.lexicon(export.lexicon_miss_rate, seed.wrapping_add(1));
    let lex = SeedDictionary::new(lexicon, SourceKind::Synthetic, Selection::Explicit)?;
    lex.save(&files.lexicon, PairFormat::Tsv)?;
    world
        .gold_train
        .save(&files.train_dictionary, PairFormat::SpaceSeparated)?;
    world.gold_test.save(&files.test_set, PairFormat::SpaceSeparated)?;
    world
        .generic_dictionary(
            export.generic_size,
            export.generic_pool,
            0.0,
            SourceKind::Muse,
            seed.wrapping_add(2),
        )?
        .save(&files.muse_dictionary, PairFormat::SpaceSeparated)?;
    world
        .generic_dictionary(
            export.generic_size,
            export.generic_pool,
            export.idp_wrong_fraction,
            SourceKind::Idp,
            seed.wrapping_add(3),
        )?
        .save(&files.idp_dictionary, PairFormat::Tsv)?;
    fs::write(&files.stopwords, "").map_err(|e| Error::io(&files.stopwords, e))?;

    let pivot = generate_tagged_corpora(world, &export.corpus, export.pivot_docs, seed.wrapping_add(4))?;
    pivot.target.save(&files.pivot_corpus)?;
    let low = generate_tagged_corpora(world, &export.corpus, export.low_resource_docs, seed.wrapping_add(5))?;
    low.source.save(&files.low_resource_corpus)?;
    Ok(files)
}
