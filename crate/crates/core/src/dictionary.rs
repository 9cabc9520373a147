//! Bilingual seed dictionaries: frequency-based domain construction through a
//! translation provider, generic pair-file loading, frequency-threshold
//! validation and held-out splitting.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{read_utf8, write_text, FrequencyTable};
use crate::error::{Error, Result};

/// Where the dictionary pairs came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Domain,
    Muse,
    Idp,
    Synthetic,
}

/// How the source words were chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    HighFreq,
    LowerBand,
    Explicit,
}

/// Frequency band for seed word selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    /// The most frequent words.
    High,
    /// Ranks in (5%, 10%] of the filtered vocabulary.
    Lower,
}

impl Band {
    pub fn selection(self) -> Selection {
        match self {
            Band::High => Selection::HighFreq,
            Band::Lower => Selection::LowerBand,
        }
    }
}

/// On-disk pair format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairFormat {
    /// `source target`, the MUSE convention.
    SpaceSeparated,
    /// `source<TAB>target`, the IDP convention.
    Tsv,
}

str_enum!(SourceKind { Domain => "domain", Muse => "muse", Idp => "idp", Synthetic => "synthetic" });
str_enum!(Selection { HighFreq => "high_freq", LowerBand => "lower_band", Explicit => "explicit" });
str_enum!(Band { High => "high", Lower => "lower" });
str_enum!(PairFormat { SpaceSeparated => "space_separated", Tsv => "tsv" });

/// An ordered list of unique (source, target) translation pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedDictionary {
    pairs: Vec<(String, String)>,
    pub source_kind: SourceKind,
    pub selection: Selection,
    requested_size: usize,
    pub provenance_notes: String,
}

fn valid_word(w: &str) -> bool {
    !w.is_empty() && !w.chars().any(char::is_whitespace)
}

impl SeedDictionary {
    /// Validates pairs: no duplicates, no empty or whitespace-containing words.
    /// `requested_size` starts at the pair count.
    pub fn new(pairs: Vec<(String, String)>, source_kind: SourceKind, selection: Selection) -> Result<Self> {
        let mut seen = HashSet::with_capacity(pairs.len());
        for (s, t) in &pairs {
            if !valid_word(s) || !valid_word(t) {
                return Err(Error::Invalid(format!("invalid dictionary pair ({s:?}, {t:?})")));
            }
            if !seen.insert((s.as_str(), t.as_str())) {
                return Err(Error::Invalid(format!("duplicate dictionary pair ({s}, {t})")));
            }
        }
        let requested_size = pairs.len();
        Ok(Self {
            pairs,
            source_kind,
            selection,
            requested_size,
            provenance_notes: String::new(),
        })
    }

    pub fn with_requested_size(mut self, requested_size: usize) -> Result<Self> {
        if requested_size < self.pairs.len() {
            return Err(Error::Invalid(format!(
                "requested size {requested_size} below pair count {}",
                self.pairs.len()
            )));
        }
        self.requested_size = requested_size;
        Ok(self)
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.provenance_notes = notes.into();
        self
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn requested_size(&self) -> usize {
        self.requested_size
    }

    /// Keeps the pairs for which `keep` holds, preserving order and metadata.
    fn filtered(&self, mut keep: impl FnMut(&(String, String)) -> bool) -> Self {
        Self {
            pairs: self.pairs.iter().filter(|p| keep(p)).cloned().collect(),
            source_kind: self.source_kind,
            selection: self.selection,
            requested_size: self.requested_size,
            provenance_notes: self.provenance_notes.clone(),
        }
    }

    /// First `size` pairs; `requested_size` becomes `size`.
    pub fn truncated(&self, size: usize) -> Self {
        let mut d = self.filtered(|_| true);
        d.pairs.truncate(size);
        d.requested_size = size;
        d
    }

    pub fn save(&self, path: impl AsRef<Path>, format: PairFormat) -> Result<()> {
        let sep = match format {
            PairFormat::SpaceSeparated => ' ',
            PairFormat::Tsv => '\t',
        };
        let mut out = String::new();
        for (s, t) in &self.pairs {
            let _ = writeln!(out, "{s}{sep}{t}");
        }
        write_text(path.as_ref(), &out)
    }
}

/// Supplies translations for batches of source words.
pub trait TranslationProvider {
    /// Translations for `words`; words without a translation are simply absent.
    fn translate_batch(&self, words: &[String]) -> std::result::Result<HashMap<String, String>, String>;
}

/// A lexicon file (`source<TAB>target` per line) standing in for a machine
/// translation service.
#[derive(Clone, Debug, Default)]
pub struct FileTranslationProvider {
    lexicon: HashMap<String, String>,
}

impl FileTranslationProvider {
    /// Repeated source words keep their first translation.
    pub fn from_pairs<I, S, T>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let mut lexicon = HashMap::new();
        for (s, t) in pairs {
            lexicon.entry(s.into()).or_insert_with(|| t.into());
        }
        Self { lexicon }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let pairs = read_pairs(path, PairFormat::Tsv)?;
        Ok(Self::from_pairs(pairs))
    }

    pub fn len(&self) -> usize {
        self.lexicon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lexicon.is_empty()
    }
}

impl TranslationProvider for FileTranslationProvider {
    fn translate_batch(&self, words: &[String]) -> std::result::Result<HashMap<String, String>, String> {
        Ok(words
            .iter()
            .filter_map(|w| self.lexicon.get(w).map(|t| (w.clone(), t.clone())))
            .collect())
    }
}

/// One line per word; blank lines ignored.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    let text = read_utf8(path.as_ref())?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

/// The full candidate list for `band`, before truncation to a size.
pub fn seed_candidates(
    freqs: &FrequencyTable,
    band: Band,
    stopwords: &HashSet<String>,
    min_length: usize,
) -> Vec<String> {
    let filtered: Vec<&str> = freqs
        .ranked()
        .into_iter()
        .map(|(w, _)| w)
        .filter(|w| !stopwords.contains(*w) && w.chars().count() >= min_length)
        .collect();
    let slice = match band {
        Band::High => &filtered[..],
        Band::Lower => {
            let v = filtered.len();
            // Ranks strictly above floor(5% V) and at most floor(10% V).
            let lo = v * 5 / 100;
            let hi = v * 10 / 100;
            &filtered[lo..hi]
        }
    };
    slice.iter().map(|w| w.to_string()).collect()
}

/// Picks `size` seed words from the frequency ranking (count desc, word asc)
/// after removing stopwords and words shorter than `min_length` characters.
pub fn select_seed_words(
    freqs: &FrequencyTable,
    band: Band,
    size: usize,
    stopwords: &HashSet<String>,
    min_length: usize,
) -> Result<Vec<String>> {
    if size == 0 {
        return Err(Error::Invalid("seed size must be >= 1".into()));
    }
    let mut candidates = seed_candidates(freqs, band, stopwords, min_length);
    if candidates.len() < size {
        return Err(Error::Insufficient {
            requested: size,
            available: candidates.len(),
        });
    }
    candidates.truncate(size);
    Ok(candidates)
}

/// Parameters for [`build_domain_dictionary`].
#[derive(Clone, Debug)]
pub struct DomainDictionaryOptions {
    pub band: Band,
    pub size: usize,
    pub min_length: usize,
    /// Candidates drawn before translation, as a multiple of `size`.
    pub oversample: f64,
    pub batch_size: usize,
}

impl DomainDictionaryOptions {
    pub fn new(band: Band, size: usize) -> Self {
        Self {
            band,
            size,
            min_length: 3,
            oversample: 1.5,
            batch_size: 1000,
        }
    }
}

/// Selects frequent domain words, translates them and keeps the first
/// `size` translated pairs in frequency order.
pub fn build_domain_dictionary(
    freqs: &FrequencyTable,
    provider: &dyn TranslationProvider,
    stopwords: &HashSet<String>,
    opts: &DomainDictionaryOptions,
) -> Result<SeedDictionary> {
    if opts.size == 0 {
        return Err(Error::Invalid("dictionary size must be >= 1".into()));
    }
    let candidates = seed_candidates(freqs, opts.band, stopwords, opts.min_length);
    if candidates.len() < opts.size {
        return Err(Error::Insufficient {
            requested: opts.size,
            available: candidates.len(),
        });
    }
    let wanted = ((opts.size as f64) * opts.oversample.max(1.0)).ceil() as usize;
    let selected = &candidates[..wanted.min(candidates.len())];

    let mut pairs = Vec::with_capacity(opts.size);
    let mut untranslated = 0usize;
    let mut rejected = 0usize;
    'outer: for batch in selected.chunks(opts.batch_size.max(1)) {
        let translated = provider.translate_batch(batch).map_err(|message| Error::Provider {
            batch: batch.to_vec(),
            message,
        })?;
        for word in batch {
            match translated.get(word).map(|t| t.trim()) {
                None => untranslated += 1,
                Some(t) if !valid_word(t) => rejected += 1,
                Some(t) => {
                    pairs.push((word.clone(), t.to_string()));
                    if pairs.len() == opts.size {
                        break 'outer;
                    }
                }
            }
        }
    }
    if pairs.len() < opts.size {
        return Err(Error::Insufficient {
            requested: opts.size,
            available: pairs.len(),
        });
    }
    let notes = format!(
        "band={} candidates={} selected={} untranslated={untranslated} rejected={rejected}",
        opts.band,
        candidates.len(),
        selected.len()
    );
    Ok(SeedDictionary::new(pairs, SourceKind::Domain, opts.band.selection())?
        .with_requested_size(opts.size)?
        .with_notes(notes))
}

fn read_pairs(path: &Path, format: PairFormat) -> Result<Vec<(String, String)>> {
    let text = read_utf8(path)?;
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = match format {
            PairFormat::SpaceSeparated => line.split_whitespace().collect(),
            PairFormat::Tsv => line.split('\t').map(str::trim).collect(),
        };
        match fields.as_slice() {
            [s, t] if valid_word(s) && valid_word(t) => pairs.push((s.to_string(), t.to_string())),
            _ => {
                return Err(Error::parse(
                    path,
                    idx + 1,
                    format!("expected two columns ({format}), found {line:?}"),
                ))
            }
        }
    }
    Ok(pairs)
}

/// Loads a generic dictionary. Exact duplicate pairs keep their first
/// occurrence; one source word may have several targets.
pub fn load_pair_dictionary(path: impl AsRef<Path>, format: PairFormat, kind: SourceKind) -> Result<SeedDictionary> {
    let path = path.as_ref();
    let raw = read_pairs(path, format)?;
    if raw.is_empty() {
        return Err(Error::parse(path, 1, "dictionary file has no pairs"));
    }
    let mut seen = HashSet::with_capacity(raw.len());
    let total = raw.len();
    let pairs: Vec<_> = raw.into_iter().filter(|p| seen.insert(p.clone())).collect();
    let notes = format!("file={} lines={total} unique={}", path.display(), pairs.len());
    Ok(SeedDictionary::new(pairs, kind, Selection::Explicit)?.with_notes(notes))
}

/// A pair removed by [`validate_pairs`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DropRecord {
    pub word: String,
    pub reason: String,
}

pub fn write_drop_report(drops: &[DropRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::from("word\treason\n");
    for d in drops {
        let _ = writeln!(out, "{}\t{}", d.word, d.reason);
    }
    write_text(path.as_ref(), &out)
}

/// Keeps pairs whose target word occurs at least `threshold` times in the
/// target corpus; absent words count 0.
pub fn validate_pairs(
    dict: &SeedDictionary,
    target_freqs: &FrequencyTable,
    threshold: u64,
) -> (SeedDictionary, Vec<DropRecord>) {
    let mut drops = Vec::new();
    let kept = dict.filtered(|(s, t)| {
        let count = target_freqs.count(t);
        if count >= threshold {
            true
        } else {
            drops.push(DropRecord {
                word: s.clone(),
                reason: format!("target {t} count {count} below threshold {threshold}"),
            });
            false
        }
    });
    (kept, drops)
}

/// Picks the threshold whose validated dictionary scores best under
/// `evaluator`. Ties go to the smallest threshold.
pub fn tune_validation_threshold<F>(
    dict: &SeedDictionary,
    target_freqs: &FrequencyTable,
    candidates: &[u64],
    mut evaluator: F,
) -> Result<(u64, f64)>
where
    F: FnMut(&SeedDictionary) -> Result<f64>,
{
    let sorted: BTreeSet<u64> = candidates.iter().copied().collect();
    let mut best: Option<(u64, f64)> = None;
    for threshold in sorted {
        let (validated, _) = validate_pairs(dict, target_freqs, threshold);
        let score = evaluator(&validated)?;
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((threshold, score));
        }
    }
    best.ok_or_else(|| Error::Invalid("no candidate thresholds".into()))
}

/// Train/held-out halves of a dictionary.
#[derive(Clone, Debug)]
pub struct DictionarySplit {
    pub train: SeedDictionary,
    pub held_out: SeedDictionary,
    /// Held-out pairs moved to train because their source word was already there.
    pub relocated: usize,
}

/// Seeded shuffle, then `floor(train_fraction · n)` pairs to train. Held-out
/// pairs whose source word also appears in train are moved to train.
pub fn split_dictionary(dict: &SeedDictionary, train_fraction: f64, seed: u64) -> Result<DictionarySplit> {
    let n = dict.len();
    if n < 2 {
        return Err(Error::Invalid("splitting needs at least 2 pairs".into()));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Invalid(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let n_train = (train_fraction * n as f64 + 1e-9).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::Invalid(format!(
            "train fraction {train_fraction} leaves an empty side for {n} pairs"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut in_train = vec![false; n];
    for &i in &order[..n_train] {
        in_train[i] = true;
    }
    let train_sources: HashSet<&str> = (0..n)
        .filter(|&i| in_train[i])
        .map(|i| dict.pairs[i].0.as_str())
        .collect();
    let mut relocated = 0;
    for &i in &order[n_train..] {
        if train_sources.contains(dict.pairs[i].0.as_str()) {
            in_train[i] = true;
            relocated += 1;
        }
    }
    if in_train.iter().all(|&b| b) {
        return Err(Error::Invalid(
            "every held-out pair shares a source word with train".into(),
        ));
    }
    let pick = |want: bool| {
        let pairs: Vec<_> = (0..n)
            .filter(|&i| in_train[i] == want)
            .map(|i| dict.pairs[i].clone())
            .collect();
        let mut d = SeedDictionary::new(pairs, dict.source_kind, dict.selection).expect("subset of a valid dictionary");
        d.provenance_notes = dict.provenance_notes.clone();
        d
    };
    if relocated > 0 {
        log::info!("dictionary split: relocated {relocated} held-out pairs to avoid source-word leakage");
    }
    Ok(DictionarySplit {
        train: pick(true),
        held_out: pick(false),
        relocated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_stop() -> HashSet<String> {
        HashSet::new()
    }

    fn dict(pairs: &[(&str, &str)]) -> SeedDictionary {
        SeedDictionary::new(
            pairs.iter().map(|(s, t)| (s.to_string(), t.to_string())).collect(),
            SourceKind::Synthetic,
            Selection::Explicit,
        )
        .unwrap()
    }

    #[test]
    fn high_band_drops_stopwords() {
        let f = FrequencyTable::from_counts([("alpha", 10), ("beta", 5), ("und", 90)]).unwrap();
        let stop: HashSet<String> = ["und".to_string()].into();
        let got = select_seed_words(&f, Band::High, 2, &stop, 3).unwrap();
        assert_eq!(got, ["alpha", "beta"]);
    }

    #[test]
    fn short_words_filtered() {
        let f = FrequencyTable::from_counts([("zu", 50), ("und", 40), ("persoenliche", 3)]).unwrap();
        let stop: HashSet<String> = ["und".to_string()].into();
        assert_eq!(seed_candidates(&f, Band::High, &stop, 3), ["persoenliche"]);
        let err = select_seed_words(&f, Band::High, 2, &stop, 3).unwrap_err();
        assert!(matches!(
            err,
            Error::Insufficient {
                requested: 2,
                available: 1
            }
        ));
    }

    #[test]
    fn lower_band_ranks() {
        // 200 words with distinct counts; rank r has count 1000 - r.
        let f = FrequencyTable::from_counts((1..=200).map(|r| (format!("w{r:03}"), 1000 - r as u64))).unwrap();
        let band = seed_candidates(&f, Band::Lower, &no_stop(), 3);
        let expected: Vec<String> = (11..=20).map(|r| format!("w{r:03}")).collect();
        assert_eq!(band, expected);
        let got = select_seed_words(&f, Band::Lower, 5, &no_stop(), 3).unwrap();
        assert_eq!(got, expected[..5]);
        assert!(select_seed_words(&f, Band::Lower, 11, &no_stop(), 3).is_err());
    }

    #[test]
    fn ties_broken_lexicographically() {
        let f = FrequencyTable::from_counts([("ccc", 5), ("aaa", 5), ("bbb", 5)]).unwrap();
        assert_eq!(
            select_seed_words(&f, Band::High, 3, &no_stop(), 3).unwrap(),
            ["aaa", "bbb", "ccc"]
        );
    }

    #[test]
    fn domain_dictionary_absence_handling() {
        let f = FrequencyTable::from_counts([("erfahrung", 30), ("kenntnisse", 20), ("sonstiges", 10)]).unwrap();
        let provider = FileTranslationProvider::from_pairs([("erfahrung", "experience"), ("kenntnisse", "skills")]);
        let three = build_domain_dictionary(&f, &provider, &no_stop(), &DomainDictionaryOptions::new(Band::High, 3));
        assert!(matches!(
            three,
            Err(Error::Insufficient {
                requested: 3,
                available: 2
            })
        ));
        let two =
            build_domain_dictionary(&f, &provider, &no_stop(), &DomainDictionaryOptions::new(Band::High, 2)).unwrap();
        assert_eq!(
            two.pairs(),
            [
                ("erfahrung".to_string(), "experience".to_string()),
                ("kenntnisse".into(), "skills".into())
            ]
        );
        assert_eq!(two.source_kind, SourceKind::Domain);
        assert_eq!(two.selection, Selection::HighFreq);
    }

    #[test]
    fn provider_failure_carries_batch() {
        struct Broken;
        impl TranslationProvider for Broken {
            fn translate_batch(&self, _: &[String]) -> std::result::Result<HashMap<String, String>, String> {
                Err("quota exceeded".into())
            }
        }
        let f = FrequencyTable::from_counts([("erfahrung", 30)]).unwrap();
        match build_domain_dictionary(&f, &Broken, &no_stop(), &DomainDictionaryOptions::new(Band::High, 1)) {
            Err(Error::Provider { batch, message }) => {
                assert_eq!(batch, ["erfahrung"]);
                assert_eq!(message, "quota exceeded");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn multiword_translations_rejected() {
        let f = FrequencyTable::from_counts([("angaben", 30), ("beruf", 20)]).unwrap();
        let provider = FileTranslationProvider::from_pairs([("angaben", "personal information"), ("beruf", "job")]);
        let d =
            build_domain_dictionary(&f, &provider, &no_stop(), &DomainDictionaryOptions::new(Band::High, 1)).unwrap();
        assert_eq!(d.pairs()[0].1, "job");
    }

    #[test]
    fn pair_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("muse.txt");
        std::fs::write(&p, "hund dog\nhund hound\n").unwrap();
        let d = load_pair_dictionary(&p, PairFormat::SpaceSeparated, SourceKind::Muse).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.source_kind, SourceKind::Muse);

        let p = dir.path().join("idp.tsv");
        std::fs::write(&p, "hund\tdog\nhund\tdog\n").unwrap();
        let d = load_pair_dictionary(&p, PairFormat::Tsv, SourceKind::Idp).unwrap();
        assert_eq!(d.len(), 1);

        std::fs::write(&p, "hund dog\nhund\n").unwrap();
        let err = load_pair_dictionary(&p, PairFormat::SpaceSeparated, SourceKind::Muse).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
    }

    #[test]
    fn validation_threshold_cases() {
        let d = dict(&[("a", "x"), ("b", "y")]);
        let f = FrequencyTable::from_counts([("x", 5)]).unwrap();
        assert_eq!(validate_pairs(&d, &f, 0).0, d);
        let (kept, drops) = validate_pairs(&d, &f, 3);
        assert_eq!(kept.pairs(), [("a".to_string(), "x".to_string())]);
        assert_eq!(drops.len(), 1);
        assert_eq!(drops[0].word, "b");
        assert_eq!(validate_pairs(&d, &f, 5).0.len(), 1);
        assert_eq!(validate_pairs(&d, &f, 6).0.len(), 0);
    }

    #[test]
    fn tuning_tie_break_and_monotone() {
        let d = dict(&[("a", "x"), ("b", "y")]);
        let f = FrequencyTable::from_counts([("x", 7), ("y", 12)]).unwrap();
        let (t, s) = tune_validation_threshold(&d, &f, &[10, 5, 0], |_| Ok(1.0)).unwrap();
        assert_eq!((t, s), (0, 1.0));
        let (t, s) = tune_validation_threshold(&d, &f, &[0, 10], |d| Ok(d.len() as f64)).unwrap();
        assert_eq!((t, s), (0, 2.0));
        let failing = tune_validation_threshold(&d, &f, &[0], |_| Err(Error::Numerical("boom".into())));
        assert!(failing.is_err());
        assert!(tune_validation_threshold(&d, &f, &[], |_| Ok(0.0)).is_err());
    }

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let pairs: Vec<(String, String)> = (0..10).map(|i| (format!("s{i}"), format!("t{i}"))).collect();
        let d = SeedDictionary::new(pairs, SourceKind::Synthetic, Selection::Explicit).unwrap();
        let a = split_dictionary(&d, 0.8, 7).unwrap();
        let b = split_dictionary(&d, 0.8, 7).unwrap();
        assert_eq!((a.train.len(), a.held_out.len()), (8, 2));
        assert_eq!(a.train, b.train);
        let train: HashSet<_> = a.train.pairs().iter().map(|p| &p.0).collect();
        assert!(a.held_out.pairs().iter().all(|p| !train.contains(&p.0)));
        assert!(split_dictionary(&d, 0.05, 7).is_err());
        assert!(split_dictionary(&d, 1.0, 7).is_err());
    }

    #[test]
    fn split_relocates_shared_sources() {
        // Source "s" has many targets so some copies always straddle the cut.
        let mut pairs: Vec<(String, String)> = (0..6).map(|i| ("s".to_string(), format!("t{i}"))).collect();
        pairs.extend((0..6).map(|i| (format!("u{i}"), format!("v{i}"))));
        let d = SeedDictionary::new(pairs.clone(), SourceKind::Synthetic, Selection::Explicit).unwrap();
        for seed in 0..20 {
            let Ok(split) = split_dictionary(&d, 0.5, seed) else {
                continue;
            };
            let train: HashSet<_> = split.train.pairs().iter().map(|p| p.0.clone()).collect();
            assert!(split.held_out.pairs().iter().all(|p| !train.contains(&p.0)));
            let mut union: Vec<_> = split
                .train
                .pairs()
                .iter()
                .chain(split.held_out.pairs())
                .cloned()
                .collect();
            union.sort();
            let mut all = pairs.clone();
            all.sort();
            assert_eq!(union, all);
            assert_eq!(split.train.len(), 6 + split.relocated);
        }
    }

    #[test]
    fn rejects_bad_pairs() {
        let bad = SeedDictionary::new(vec![("a b".into(), "x".into())], SourceKind::Idp, Selection::Explicit);
        assert!(bad.is_err());
        let dup = SeedDictionary::new(
            vec![("a".into(), "x".into()), ("a".into(), "x".into())],
            SourceKind::Idp,
            Selection::Explicit,
        );
        assert!(dup.is_err());
    }
}
