//! Monolingual embedding spaces in the word2vec text format, plus the corpus
//! frequency tables that rank their vocabularies.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Word → corpus count. Counts are at least 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    entries: BTreeMap<String, u64>,
    total_tokens: u64,
}

impl FrequencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_counts<I, S>(counts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut table = Self::new();
        for (word, count) in counts {
            table.insert(word.into(), count)?;
        }
        Ok(table)
    }

    /// Adds a new word. Re-inserting an existing word or a zero count is an error.
    pub fn insert(&mut self, word: String, count: u64) -> Result<()> {
        if count < 1 {
            return Err(Error::Invalid(format!("count for {word:?} must be >= 1")));
        }
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return Err(Error::Invalid(format!("bad frequency word {word:?}")));
        }
        if self.entries.contains_key(&word) {
            return Err(Error::Invalid(format!("duplicate frequency entry {word:?}")));
        }
        self.entries.insert(word, count);
        self.total_tokens += count;
        Ok(())
    }

    /// Count for `word`, 0 when absent.
    pub fn count(&self, word: &str) -> u64 {
        self.entries.get(word).copied().unwrap_or(0)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(w, &c)| (w.as_str(), c))
    }

    /// All words ordered by count descending, then word ascending.
    pub fn ranked(&self) -> Vec<(&str, u64)> {
        let mut ranked: Vec<(&str, u64)> = self.iter().collect();
        // BTreeMap iteration is already word-ascending, so a stable sort on
        // count alone gives the lexicographic tie order.
        ranked.sort_by(|a, b| b.1.cmp(&a.1));
        ranked
    }

    /// Reads `word<TAB>count` lines.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = read_utf8(path)?;
        let mut table = Self::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 2 {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("expected 2 tab-separated fields, found {}", fields.len()),
                ));
            }
            let word = fields[0].trim();
            let count: u64 = fields[1]
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("non-integer count {:?}", fields[1])))?;
            if count < 1 {
                return Err(Error::parse(path, line_no, "count must be >= 1"));
            }
            if table.contains(word) {
                return Err(Error::parse(path, line_no, format!("duplicate word {word:?}")));
            }
            table
                .insert(word.to_string(), count)
                .map_err(|e| Error::parse(path, line_no, e.to_string()))?;
        }
        Ok(table)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = String::new();
        for (word, count) in self.ranked() {
            let _ = writeln!(out, "{word}\t{count}");
        }
        write_text(path.as_ref(), &out)
    }
}

/// Options for [`load_embeddings_with`].
#[derive(Clone, Debug, Default)]
pub struct LoadOptions {
    /// First line is a `vocab_size dim` header.
    pub expect_header: bool,
    /// Lowercase every word while reading.
    pub lowercase: bool,
    /// Language tag; defaults to the file stem.
    pub language: Option<String>,
}

/// A vocabulary with one dense row vector per word.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSpace {
    language: String,
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f64>,
    frequencies: Option<FrequencyTable>,
}

impl EmbeddingSpace {
    /// Builds a space from row-major `data` of shape `words.len() × dim`.
    pub fn new(language: impl Into<String>, words: Vec<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invalid("embedding dimension must be >= 1".into()));
        }
        if data.len() != words.len() * dim {
            return Err(Error::Dimension(format!(
                "{} values for {} words of dimension {dim}",
                data.len(),
                words.len()
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if w.is_empty() || w.chars().any(char::is_whitespace) {
                return Err(Error::Invalid(format!("bad vocabulary word {w:?}")));
            }
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::Invalid(format!("duplicate word {w:?}")));
            }
        }
        Ok(Self {
            language: language.into(),
            words,
            index,
            dim,
            data,
            frequencies: None,
        })
    }

    /// Attaches a frequency table; every table word must be in the vocabulary.
    pub fn with_frequencies(mut self, table: FrequencyTable) -> Result<Self> {
        if let Some((w, _)) = table.iter().find(|(w, _)| !self.index.contains_key(*w)) {
            return Err(Error::Invalid(format!(
                "frequency word {w:?} not in the {} vocabulary",
                self.language
            )));
        }
        self.frequencies = Some(table);
        Ok(self)
    }

    /// Attaches the in-vocabulary part of `table`, returning how many entries were left out.
    pub fn merge_frequencies(mut self, table: &FrequencyTable) -> (Self, usize) {
        let mut kept = FrequencyTable::new();
        let mut dropped = 0;
        for (w, c) in table.iter() {
            if self.index.contains_key(w) {
                kept.insert(w.to_string(), c).expect("source table is valid");
            } else {
                dropped += 1;
            }
        }
        self.frequencies = Some(kept);
        (self, dropped)
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn set_language(&mut self, language: impl Into<String>) {
        self.language = language.into();
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frequencies(&self) -> Option<&FrequencyTable> {
        self.frequencies.as_ref()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vector(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.row(i))
    }

    /// Row-major matrix of all vectors.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Same vocabulary and metadata, new row-major vectors of dimension `dim`.
    pub fn with_vectors(&self, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() != self.words.len() * dim {
            return Err(Error::Dimension(format!(
                "{} values do not fill {} rows of dimension {dim}",
                data.len(),
                self.words.len()
            )));
        }
        Ok(Self {
            language: self.language.clone(),
            words: self.words.clone(),
            index: self.index.clone(),
            dim,
            data,
            frequencies: self.frequencies.clone(),
        })
    }

    /// Scales every row to unit Euclidean norm. All-zero rows stay zero and
    /// are listed in the result.
    pub fn unit_normalize(&self) -> Normalized {
        let mut data = self.data.clone();
        let mut zero_rows = Vec::new();
        for (i, row) in data.chunks_mut(self.dim).enumerate() {
            let norm = l2_norm(row);
            if norm == 0.0 {
                zero_rows.push(self.words[i].clone());
                continue;
            }
            // Rows already at unit norm up to rounding are left untouched so
            // that normalization is exactly idempotent.
            if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
                continue;
            }
            row.iter_mut().for_each(|x| *x /= norm);
        }
        let space = self
            .with_vectors(self.dim, data)
            .expect("shape unchanged by normalization");
        Normalized { space, zero_rows }
    }
}

/// Output of [`EmbeddingSpace::unit_normalize`].
#[derive(Clone, Debug)]
pub struct Normalized {
    pub space: EmbeddingSpace,
    pub zero_rows: Vec<String>,
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn load_embeddings(path: impl AsRef<Path>, expect_header: bool) -> Result<EmbeddingSpace> {
    load_embeddings_with(
        path,
        &LoadOptions {
            expect_header,
            ..LoadOptions::default()
        },
    )
}

/// Reads the word2vec text format: an optional `n d` header line, then
/// `word v1 ... vd` per line.
pub fn load_embeddings_with(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<EmbeddingSpace> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|_| Error::BinaryFormat {
        path: path.to_path_buf(),
    })?;

    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty());

    let mut declared = None;
    if opts.expect_header {
        let (line_no, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "missing header line"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let parsed: Option<(usize, usize)> = match fields.as_slice() {
            [n, d] => n.parse().ok().zip(d.parse().ok()),
            _ => None,
        };
        match parsed {
            Some(nd) => declared = Some(nd),
            None => {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("expected header \"vocab_size dim\", found {header:?}"),
                ))
            }
        }
    }

    let mut words = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut data = Vec::new();
    let mut dim = None;
    for (line_no, line) in lines {
        let mut fields = line.split_whitespace();
        let raw_word = fields.next().expect("non-blank line has a field");
        let word = if opts.lowercase {
            raw_word.to_lowercase()
        } else {
            raw_word.to_string()
        };
        let start = data.len();
        for field in fields {
            let value: f64 = field
                .parse()
                .map_err(|_| Error::parse(path, line_no, format!("non-numeric component {field:?}")))?;
            data.push(value);
        }
        let row_dim = data.len() - start;
        if row_dim == 0 {
            return Err(Error::parse(path, line_no, format!("word {word:?} has no vector")));
        }
        match dim {
            None => dim = Some(row_dim),
            Some(d) if d != row_dim => {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("dimension mismatch: expected {d}, found {row_dim}"),
                ))
            }
            _ => {}
        }
        if let Some(first) = seen.insert(word.clone(), line_no) {
            return Err(Error::parse(
                path,
                line_no,
                format!("duplicate word {word:?} (first seen on line {first})"),
            ));
        }
        words.push(word);
    }

    let dim = dim.ok_or_else(|| Error::parse(path, 1, "no embedding rows"))?;
    if let Some((n, d)) = declared {
        if n != words.len() || d != dim {
            return Err(Error::parse(
                path,
                1,
                format!(
                    "header mismatch: declared {n} rows of dimension {d}, found {} rows of dimension {dim}",
                    words.len()
                ),
            ));
        }
    }
    let language = opts.language.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    EmbeddingSpace::new(language, words, dim, data)
}

/// Writes the space with an `n d` header. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn save_embeddings(space: &EmbeddingSpace, path: impl AsRef<Path>) -> Result<()> {
    if space.is_empty() {
        return Err(Error::Invalid("refusing to write an empty embedding space".into()));
    }
    let mut out = String::with_capacity(space.len() * space.dim() * 12);
    let _ = writeln!(out, "{} {}", space.len(), space.dim());
    for (i, word) in space.words().iter().enumerate() {
        out.push_str(word);
        for x in space.row(i) {
            let _ = write!(out, " {x}");
        }
        out.push('\n');
    }
    write_text(path.as_ref(), &out)
}

pub(crate) fn read_utf8(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|_| Error::parse(path, 1, "file is not valid UTF-8"))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn loads_with_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "en.vec", "2 3\na 1 0 0\nb 0 1 0\n");
        let s = load_embeddings(&p, true).unwrap();
        assert_eq!(s.words(), ["a", "b"]);
        assert_eq!(s.dim(), 3);
        assert_eq!(s.vector("b").unwrap(), [0.0, 1.0, 0.0]);
        assert_eq!(s.language(), "en");
    }

    #[test]
    fn duplicate_word_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "x.vec", "a 1 0\na 0 1\n");
        let err = load_embeddings(&p, false).unwrap_err().to_string();
        assert!(err.contains(":2:"), "{err}");
        assert!(err.contains("\"a\""), "{err}");
    }

    #[test]
    fn header_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "x.vec", "3 2\na 1 0\nb 0 1\n");
        let err = load_embeddings(&p, true).unwrap_err().to_string();
        assert!(err.contains("declared 3 rows"), "{err}");
    }

    #[test]
    fn dimension_mismatch_and_non_numeric() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "x.vec", "a 1 0\nb 0 1 2\n");
        let err = load_embeddings(&p, false).unwrap_err().to_string();
        assert!(err.contains(":2:") && err.contains("dimension"), "{err}");
        let p = write(&dir, "y.vec", "a 1 zz\n");
        let err = load_embeddings(&p, false).unwrap_err().to_string();
        assert!(err.contains("non-numeric"), "{err}");
    }

    #[test]
    fn crlf_and_binary() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "x.vec", "1 2\r\na 1 0\r\n");
        assert_eq!(load_embeddings(&p, true).unwrap().len(), 1);
        let p = dir.path().join("bin.vec");
        fs::write(&p, [0xffu8, 0xfe, 0x00, 0x80]).unwrap();
        assert!(matches!(load_embeddings(&p, false), Err(Error::BinaryFormat { .. })));
    }

    #[test]
    fn lowercase_option() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "x.vec", "Haus 1 0\n");
        let opts = LoadOptions {
            lowercase: true,
            language: Some("de".into()),
            ..Default::default()
        };
        let s = load_embeddings_with(&p, &opts).unwrap();
        assert!(s.contains("haus"));
        assert_eq!(s.language(), "de");
    }

    #[test]
    fn save_writes_header_and_refuses_empty() {
        let dir = tempfile::tempdir().unwrap();
        let words = vec!["a".to_string(), "b".into(), "c".into()];
        let s = EmbeddingSpace::new("en", words, 150, vec![0.25; 450]).unwrap();
        let p = dir.path().join("out.vec");
        save_embeddings(&s, &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().next().unwrap(), "3 150");
        let empty = EmbeddingSpace::new("en", vec![], 4, vec![]).unwrap();
        assert!(save_embeddings(&empty, &p).is_err());
    }

    #[test]
    fn normalize_rows() {
        let s = EmbeddingSpace::new("x", vec!["a".into(), "z".into()], 2, vec![3.0, 4.0, 0.0, 0.0]).unwrap();
        let n = s.unit_normalize();
        assert_eq!(n.space.row(0), [0.6, 0.8]);
        assert_eq!(n.space.row(1), [0.0, 0.0]);
        assert_eq!(n.zero_rows, ["z"]);
        let again = n.space.unit_normalize();
        assert_eq!(again.space, n.space);
    }

    #[test]
    fn frequency_table_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "f.tsv", "haus\t10\nund\t90\n");
        let t = FrequencyTable::load(&p).unwrap();
        assert_eq!(t.count("haus"), 10);
        assert_eq!(t.count("und"), 90);
        assert_eq!(t.ranked(), [("und", 90), ("haus", 10)]);
        let p = write(&dir, "g.tsv", "haus\t0\n");
        assert!(FrequencyTable::load(&p).is_err());
        let p = write(&dir, "h.tsv", "haus\t10\nhaus\t2\n");
        let err = FrequencyTable::load(&p).unwrap_err().to_string();
        assert!(err.contains("duplicate"), "{err}");
        let p = write(&dir, "i.tsv", "haus\tx\n");
        assert!(FrequencyTable::load(&p).is_err());
    }

    #[test]
    fn frequencies_must_be_in_vocabulary() {
        let s = EmbeddingSpace::new("x", vec!["a".into()], 1, vec![1.0]).unwrap();
        let t = FrequencyTable::from_counts([("a", 3), ("b", 1)]).unwrap();
        assert!(s.clone().with_frequencies(t.clone()).is_err());
        let (s, dropped) = s.merge_frequencies(&t);
        assert_eq!(dropped, 1);
        assert_eq!(s.frequencies().unwrap().count("a"), 3);
    }
}
