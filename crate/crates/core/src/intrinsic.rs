//! Word translation retrieval: exhaustive cosine nearest neighbour and P@1
//! against a gold test dictionary.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::embedding::{l2_norm, read_utf8, write_text, EmbeddingSpace};
use crate::error::{Error, Result};

/// Gold translations keyed by source word.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TranslationTestSet {
    gold: BTreeMap<String, BTreeSet<String>>,
    pair_count: usize,
}

impl TranslationTestSet {
    pub fn from_pairs<I, S, T>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let mut set = Self::default();
        for (s, t) in pairs {
            if set.gold.entry(s.into()).or_default().insert(t.into()) {
                set.pair_count += 1;
            }
        }
        set
    }

    pub fn gold(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.gold
    }

    pub fn pair_count(&self) -> usize {
        self.pair_count
    }

    pub fn len(&self) -> usize {
        self.gold.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gold.is_empty()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = String::new();
        for (s, targets) in &self.gold {
            for t in targets {
                let _ = writeln!(out, "{s} {t}");
            }
        }
        write_text(path.as_ref(), &out)
    }
}

/// Reads `source target` lines; repeated source words accumulate.
pub fn load_test_set(path: impl AsRef<Path>) -> Result<TranslationTestSet> {
    let path = path.as_ref();
    let text = read_utf8(path)?;
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            [s, t] => pairs.push((s.to_string(), t.to_string())),
            _ => {
                return Err(Error::parse(
                    path,
                    idx + 1,
                    format!("expected two columns, found {line:?}"),
                ))
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::parse(path, 1, "test set is empty"));
    }
    Ok(TranslationTestSet::from_pairs(pairs))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Neighbor {
    pub word: String,
    pub cosine: f64,
}

/// Precomputed row norms for repeated cosine queries against one space.
pub struct CosineIndex<'a> {
    space: &'a EmbeddingSpace,
    norms: Vec<f64>,
}

impl<'a> CosineIndex<'a> {
    pub fn new(space: &'a EmbeddingSpace) -> Self {
        let norms = (0..space.len()).map(|i| l2_norm(space.row(i))).collect();
        Self { space, norms }
    }

    /// Exhaustive cosine argmax. Zero query or zero rows never win; equal
    /// scores go to the lexicographically smaller word. `Ok(None)` when no
    /// candidate has a defined cosine.
    pub fn nearest(&self, query: &[f64], exclude: &HashSet<String>) -> Result<Option<Neighbor>> {
        if query.len() != self.space.dim() {
            return Err(Error::Dimension(format!(
                "query dimension {} vs space dimension {}",
                query.len(),
                self.space.dim()
            )));
        }
        let words = self.space.words();
        let no_candidates = if exclude.is_empty() {
            words.is_empty()
        } else {
            words.iter().all(|w| exclude.contains(w))
        };
        if no_candidates {
            return Err(Error::Invalid("no candidate words to retrieve from".into()));
        }
        let qn = l2_norm(query);
        if qn == 0.0 {
            return Ok(None);
        }
        let mut best: Option<(usize, f64)> = None;
        for (i, word) in words.iter().enumerate() {
            let n = self.norms[i];
            if n == 0.0 || (!exclude.is_empty() && exclude.contains(word)) {
                continue;
            }
            let dot: f64 = query.iter().zip(self.space.row(i)).map(|(a, b)| a * b).sum();
            let cos = dot / (qn * n);
            let better = match best {
                None => true,
                Some((j, s)) => cos > s || (cos == s && word < &words[j]),
            };
            if better {
                best = Some((i, cos));
            }
        }
        Ok(best.map(|(i, cosine)| Neighbor {
            word: words[i].clone(),
            cosine,
        }))
    }
}

pub fn nearest_neighbor(query: &[f64], space: &EmbeddingSpace, exclude: &HashSet<String>) -> Result<Option<Neighbor>> {
    CosineIndex::new(space).nearest(query, exclude)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WordResult {
    pub source: String,
    pub retrieved: Option<String>,
    pub hit: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct P1Report {
    pub p_at_1: f64,
    pub evaluated: usize,
    pub skipped_oov: usize,
    pub per_word: Vec<WordResult>,
    /// Set when nothing could be evaluated.
    pub no_evaluable: bool,
}

impl P1Report {
    pub fn hits(&self) -> usize {
        self.per_word.iter().filter(|w| w.hit).count()
    }

    pub fn summary(&self) -> String {
        format!(
            "P@1 {} evaluated {} skipped {}",
            self.p_at_1, self.evaluated, self.skipped_oov
        )
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("source\tretrieved\thit\n");
        for w in &self.per_word {
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                w.source,
                w.retrieved.as_deref().unwrap_or("-"),
                u8::from(w.hit)
            );
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path.as_ref(), &self.to_tsv())
    }
}

/// P@1 of plain cosine retrieval from the projected source space into the
/// target space. Source words missing from the projected space, or whose gold
/// targets are all missing from the target space, are skipped.
pub fn precision_at_1(
    projected_source: &EmbeddingSpace,
    target: &EmbeddingSpace,
    test: &TranslationTestSet,
) -> Result<P1Report> {
    if projected_source.dim() != target.dim() {
        return Err(Error::Dimension(format!(
            "projected source dimension {} vs target dimension {}",
            projected_source.dim(),
            target.dim()
        )));
    }
    let index = CosineIndex::new(target);
    let exclude = HashSet::new();
    let mut per_word = Vec::new();
    let mut skipped_oov = 0;
    for (source, gold) in test.gold() {
        let Some(query) = projected_source.vector(source) else {
            skipped_oov += 1;
            continue;
        };
        if !gold.iter().any(|t| target.contains(t)) {
            skipped_oov += 1;
            continue;
        }
        let retrieved = index.nearest(query, &exclude)?.map(|n| n.word);
        let hit = retrieved.as_ref().is_some_and(|w| gold.contains(w));
        per_word.push(WordResult {
            source: source.clone(),
            retrieved,
            hit,
        });
    }
    let evaluated = per_word.len();
    let hits = per_word.iter().filter(|w| w.hit).count();
    let no_evaluable = evaluated == 0;
    if no_evaluable {
        log::warn!("P@1: every test word was out of vocabulary");
    }
    Ok(P1Report {
        p_at_1: if no_evaluable {
            0.0
        } else {
            hits as f64 / evaluated as f64
        },
        evaluated,
        skipped_oov,
        per_word,
        no_evaluable,
    })
}
