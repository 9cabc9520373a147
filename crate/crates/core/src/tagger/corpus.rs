use std::fmt::Write as _;
use std::path::Path;

use crate::embedding::{read_utf8, write_text};
use crate::error::{Error, Result};

pub const JOB_TITLE: &str = "JOB_TITLE";
pub const ORG_NAME: &str = "ORG_NAME";

/// The default entity types.
pub fn default_entity_types() -> Vec<String> {
    vec![JOB_TITLE.to_string(), ORG_NAME.to_string()]
}

/// A parsed BIO label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bio<'a> {
    Outside,
    Begin(&'a str),
    Inside(&'a str),
}

impl<'a> Bio<'a> {
    pub fn parse(label: &'a str) -> Option<Self> {
        if label == "O" {
            return Some(Bio::Outside);
        }
        let (prefix, ty) = label.split_once('-')?;
        if ty.is_empty() || ty.chars().any(char::is_whitespace) {
            return None;
        }
        match prefix {
            "B" => Some(Bio::Begin(ty)),
            "I" => Some(Bio::Inside(ty)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sequence {
    pub tokens: Vec<String>,
    pub labels: Vec<String>,
}

impl Sequence {
    pub fn new(tokens: Vec<String>, labels: Vec<String>) -> Result<Self> {
        if tokens.len() != labels.len() {
            return Err(Error::Invalid(format!(
                "{} tokens but {} labels",
                tokens.len(),
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|l| Bio::parse(l).is_none()) {
            return Err(Error::Invalid(format!("malformed BIO label {bad:?}")));
        }
        Ok(Self { tokens, labels })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Token sequences with BIO labels, all in one language.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TaggedCorpus {
    pub language: String,
    pub sequences: Vec<Sequence>,
}

impl TaggedCorpus {
    pub fn new(language: impl Into<String>, sequences: Vec<Sequence>) -> Self {
        Self {
            language: language.into(),
            sequences,
        }
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sequences.iter().map(Sequence::len).sum()
    }

    /// Subset by sequence index, keeping the language.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            language: self.language.clone(),
            sequences: indices.iter().map(|&i| self.sequences[i].clone()).collect(),
        }
    }

    pub fn to_conll(&self) -> String {
        let mut out = String::new();
        for (i, seq) in self.sequences.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            for (t, l) in seq.tokens.iter().zip(&seq.labels) {
                let _ = writeln!(out, "{t}\t{l}");
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path.as_ref(), &self.to_conll())
    }
}

/// Reads `token<TAB>label` lines with blank lines between sequences. The
/// language tag is the file stem.
pub fn load_conll(path: impl AsRef<Path>) -> Result<TaggedCorpus> {
    let path = path.as_ref();
    let language = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    load_conll_as(path, language)
}

pub fn load_conll_as(path: impl AsRef<Path>, language: impl Into<String>) -> Result<TaggedCorpus> {
    let path = path.as_ref();
    let text = read_utf8(path)?;
    let mut sequences = Vec::new();
    let mut current = Sequence::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            if !current.is_empty() {
                sequences.push(std::mem::take(&mut current));
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [token, label] = fields.as_slice() else {
            return Err(Error::parse(
                path,
                idx + 1,
                format!("expected token<TAB>label, found {line:?}"),
            ));
        };
        let (token, label) = (token.trim(), label.trim());
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(Error::parse(path, idx + 1, format!("bad token {token:?}")));
        }
        if Bio::parse(label).is_none() {
            return Err(Error::parse(path, idx + 1, format!("malformed BIO label {label:?}")));
        }
        current.tokens.push(token.to_string());
        current.labels.push(label.to_string());
    }
    if !current.is_empty() {
        sequences.push(current);
    }
    Ok(TaggedCorpus::new(language, sequences))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sequences() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("en.conll");
        std::fs::write(&p, "John\tO\n\nAcme\tB-ORG_NAME\n\n\n").unwrap();
        let c = load_conll(&p).unwrap();
        assert_eq!(c.language, "en");
        assert_eq!(c.len(), 2);
        assert!(c.sequences.iter().all(|s| s.len() == 1));
        assert_eq!(c.sequences[1].labels, ["B-ORG_NAME"]);
    }

    #[test]
    fn rejects_bad_label() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.conll");
        std::fs::write(&p, "a\tO\nb\tX-FOO\n").unwrap();
        let err = load_conll(&p).unwrap_err().to_string();
        assert!(err.contains(":2:"), "{err}");
        for bad in ["B-", "I", "b-JOB", "OO"] {
            assert!(Bio::parse(bad).is_none(), "{bad}");
        }
    }

    #[test]
    fn conll_round_trip() {
        let c = TaggedCorpus::new(
            "de",
            vec![
                Sequence::new(
                    vec!["a".into(), "b".into()],
                    vec!["B-JOB_TITLE".into(), "I-JOB_TITLE".into()],
                )
                .unwrap(),
                Sequence::new(vec!["c".into()], vec!["O".into()]).unwrap(),
            ],
        );
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("de.conll");
        c.save(&p).unwrap();
        assert_eq!(load_conll(&p).unwrap(), c);
    }
}
