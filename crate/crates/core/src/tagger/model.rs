use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::features::{feature_width, Features};
use crate::embedding::{read_utf8, write_text};
use crate::error::{Error, Result};

/// `O` at index 0, then `B-e`, `I-e` for each entity type in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelSet {
    entity_types: Vec<String>,
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl LabelSet {
    pub fn new(entity_types: &[String]) -> Result<Self> {
        if entity_types.is_empty() {
            return Err(Error::Invalid("at least one entity type is required".into()));
        }
        let mut labels = vec!["O".to_string()];
        for e in entity_types {
            if e.is_empty() || e.chars().any(char::is_whitespace) {
                return Err(Error::Invalid(format!("bad entity type {e:?}")));
            }
            labels.push(format!("B-{e}"));
            labels.push(format!("I-{e}"));
        }
        let mut index = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::Invalid(format!("duplicate entity type in {entity_types:?}")));
            }
        }
        Ok(Self {
            entity_types: entity_types.to_vec(),
            labels,
            index,
        })
    }

    pub fn entity_types(&self) -> &[String] {
        &self.entity_types
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn encode<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| {
                self.index(l.as_ref())
                    .ok_or_else(|| Error::Invalid(format!("label {:?} outside the model label set", l.as_ref())))
            })
            .collect()
    }

    pub fn decode(&self, path: &[usize]) -> Vec<String> {
        path.iter().map(|&i| self.labels[i].clone()).collect()
    }
}

/// Linear-chain scoring weights: one emission vector per label and a
/// `(L+1) × (L+1)` transition table whose extra row/column is the
/// start/stop state.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights {
    pub num_labels: usize,
    pub width: usize,
    /// `L × width`, row-major.
    pub emission: Vec<f64>,
    /// `(L+1) × (L+1)`, indexed `[from][to]`.
    pub transitions: Vec<f64>,
}

impl Weights {
    pub fn zeros(num_labels: usize, width: usize) -> Self {
        Self {
            num_labels,
            width,
            emission: vec![0.0; num_labels * width],
            transitions: vec![0.0; (num_labels + 1) * (num_labels + 1)],
        }
    }

    pub fn boundary(&self) -> usize {
        self.num_labels
    }

    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.transitions[from * (self.num_labels + 1) + to]
    }

    pub fn transition_mut(&mut self, from: usize, to: usize) -> &mut f64 {
        &mut self.transitions[from * (self.num_labels + 1) + to]
    }

    pub fn emission_row(&self, label: usize) -> &[f64] {
        &self.emission[label * self.width..(label + 1) * self.width]
    }

    /// `n × L` emission scores.
    pub fn emission_scores(&self, features: &Features) -> Vec<f64> {
        let l = self.num_labels;
        let mut out = vec![0.0; features.len() * l];
        for t in 0..features.len() {
            let f = features.row(t);
            for y in 0..l {
                out[t * l + y] = f.iter().zip(self.emission_row(y)).map(|(a, b)| a * b).sum();
            }
        }
        out
    }

    /// Total score of a label path.
    pub fn path_score(&self, emissions: &[f64], path: &[usize]) -> f64 {
        let l = self.num_labels;
        let s = self.boundary();
        let mut prev = s;
        let mut total = 0.0;
        for (t, &y) in path.iter().enumerate() {
            total += self.transition(prev, y) + emissions[t * l + y];
            prev = y;
        }
        if !path.is_empty() {
            total += self.transition(prev, s);
        }
        total
    }

    /// Exact max-score path. Among equal-scoring paths the lexicographically
    /// smallest label-index sequence wins: best suffix scores are computed
    /// right to left, then labels are fixed left to right taking the lowest
    /// index that attains the maximum.
    pub fn viterbi(&self, emissions: &[f64]) -> Vec<usize> {
        let l = self.num_labels;
        let n = emissions.len() / l;
        if n == 0 {
            return Vec::new();
        }
        let s = self.boundary();
        let mut beta = vec![0.0; n * l];
        for y in 0..l {
            beta[(n - 1) * l + y] = self.transition(y, s);
        }
        for t in (0..n - 1).rev() {
            for y in 0..l {
                let mut best = f64::NEG_INFINITY;
                for z in 0..l {
                    let v = self.transition(y, z) + emissions[(t + 1) * l + z] + beta[(t + 1) * l + z];
                    if v > best {
                        best = v;
                    }
                }
                beta[t * l + y] = best;
            }
        }
        let mut path = Vec::with_capacity(n);
        let mut prev = s;
        for t in 0..n {
            let mut arg = 0;
            let mut best = f64::NEG_INFINITY;
            for y in 0..l {
                let v = self.transition(prev, y) + emissions[t * l + y] + beta[t * l + y];
                if v > best {
                    best = v;
                    arg = y;
                }
            }
            path.push(arg);
            prev = arg;
        }
        path
    }
}

/// A trained linear-chain tagger over window embedding features.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggerModel {
    pub labels: LabelSet,
    pub radius: usize,
    pub dim: usize,
    pub weights: Weights,
    pub epochs: usize,
    pub seed: u64,
    pub averaged: bool,
}

impl TaggerModel {
    pub fn feature_width(&self) -> usize {
        feature_width(self.radius, self.dim)
    }

    pub fn decode_indices(&self, features: &Features) -> Result<Vec<usize>> {
        if features.width != self.feature_width() {
            return Err(Error::Dimension(format!(
                "feature width {} vs model width {}",
                features.width,
                self.feature_width()
            )));
        }
        Ok(self.weights.viterbi(&self.weights.emission_scores(features)))
    }

    pub fn viterbi_decode(&self, features: &Features) -> Result<Vec<String>> {
        Ok(self.labels.decode(&self.decode_indices(features)?))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "entity_types {}", self.labels.entity_types().join(" "));
        let _ = writeln!(out, "labels {}", self.labels.labels().join(" "));
        let _ = writeln!(out, "radius {}", self.radius);
        let _ = writeln!(out, "dim {}", self.dim);
        let _ = writeln!(out, "epochs {}", self.epochs);
        let _ = writeln!(out, "seed {}", self.seed);
        let _ = writeln!(out, "averaged {}", self.averaged);
        let w = &self.weights;
        let _ = writeln!(out, "emission {} {}", w.num_labels, w.width);
        for row in w.emission.chunks(w.width) {
            write_row(&mut out, row);
        }
        let _ = writeln!(out, "transitions {}", w.num_labels + 1);
        for row in w.transitions.chunks(w.num_labels + 1) {
            write_row(&mut out, row);
        }
        out.push_str("end\n");
        write_text(path.as_ref(), &out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = read_utf8(path)?;
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        let mut next = |key: &str| -> Result<(usize, Vec<String>)> {
            let (no, line) = lines
                .next()
                .ok_or_else(|| Error::parse(path, 0, "unexpected end of model file"))?;
            let mut fields = line.split_whitespace();
            if !key.is_empty() && fields.next() != Some(key) {
                return Err(Error::parse(path, no, format!("expected {key:?}")));
            }
            Ok((no, fields.map(str::to_string).collect()))
        };
        let (no, magic) = next("")?;
        if magic.join(" ") != MAGIC {
            return Err(Error::parse(path, no, "not a tagger model file"));
        }
        let (_, entity_types) = next("entity_types")?;
        let labels = LabelSet::new(&entity_types)?;
        let (no, label_names) = next("labels")?;
        if label_names != labels.labels() {
            return Err(Error::parse(path, no, "label list disagrees with entity types"));
        }
        let num = |(no, f): (usize, Vec<String>)| -> Result<u64> {
            f.first()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::parse(path, no, "expected an integer"))
        };
        let radius = num(next("radius")?)? as usize;
        let dim = num(next("dim")?)? as usize;
        let epochs = num(next("epochs")?)? as usize;
        let seed = num(next("seed")?)?;
        let (no, averaged) = next("averaged")?;
        let averaged = match averaged.first().map(String::as_str) {
            Some("true") => true,
            Some("false") => false,
            _ => return Err(Error::parse(path, no, "expected true/false")),
        };
        let (no, shape) = next("emission")?;
        let width = feature_width(radius, dim);
        if shape != [labels.len().to_string(), width.to_string()] {
            return Err(Error::parse(path, no, "emission shape disagrees with the feature spec"));
        }
        let mut weights = Weights::zeros(labels.len(), width);
        read_rows(&mut next, path, &mut weights.emission, width)?;
        let (no, tshape) = next("transitions")?;
        if tshape != [(labels.len() + 1).to_string()] {
            return Err(Error::parse(path, no, "transition shape disagrees with the label set"));
        }
        read_rows(&mut next, path, &mut weights.transitions, labels.len() + 1)?;
        next("end")?;
        Ok(Self {
            labels,
            radius,
            dim,
            weights,
            epochs,
            seed,
            averaged,
        })
    }
}

const MAGIC: &str = "lexalign-tagger 1";

type NextLine<'a> = dyn FnMut(&str) -> Result<(usize, Vec<String>)> + 'a;

fn read_rows(next: &mut NextLine<'_>, path: &Path, dst: &mut [f64], cols: usize) -> Result<()> {
    for chunk in dst.chunks_mut(cols) {
        let (no, vals) = next("")?;
        if vals.len() != cols {
            return Err(Error::parse(path, no, format!("expected {cols} values")));
        }
        for (d, v) in chunk.iter_mut().zip(&vals) {
            *d = v
                .parse()
                .map_err(|_| Error::parse(path, no, format!("bad number {v:?}")))?;
        }
    }
    Ok(())
}

fn write_row(out: &mut String, row: &[f64]) {
    let vals: Vec<String> = row.iter().map(|v| v.to_string()).collect();
    out.push_str(&vals.join(" "));
    out.push('\n');
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_set_layout() {
        let ls = LabelSet::new(&["J".to_string(), "N".to_string()]).unwrap();
        assert_eq!(ls.labels(), ["O", "B-J", "I-J", "B-N", "I-N"]);
        assert!(ls.encode(&["B-X"]).is_err());
        assert!(LabelSet::new(&[]).is_err());
        assert!(LabelSet::new(&["J".to_string(), "J".to_string()]).is_err());
    }

    #[test]
    fn single_token_dominant_emission() {
        let mut w = Weights::zeros(3, 1);
        let emissions = vec![0.1, 2.0, -1.0];
        assert_eq!(w.viterbi(&emissions), [1]);
        *w.transition_mut(3, 1) = -5.0;
        assert_eq!(w.viterbi(&emissions), [0]);
    }

    #[test]
    fn zero_weights_decode_all_outside() {
        let w = Weights::zeros(5, 4);
        assert_eq!(w.viterbi(&[0.0; 15]), [0, 0, 0]);
        assert!(w.viterbi(&[]).is_empty());
    }

    fn brute_force(w: &Weights, emissions: &[f64]) -> Vec<usize> {
        let l = w.num_labels;
        let n = emissions.len() / l;
        let mut best: Option<(f64, Vec<usize>)> = None;
        let total = l.pow(n as u32);
        // Enumerates paths in lexicographic order, keeping the first maximum.
        for code in 0..total {
            let mut path = vec![0; n];
            let mut c = code;
            for t in (0..n).rev() {
                path[t] = c % l;
                c /= l;
            }
            let mut score = 0.0;
            let mut prev = l;
            for (t, &y) in path.iter().enumerate() {
                score += w.transitions[prev * (l + 1) + y] + emissions[t * l + y];
                prev = y;
            }
            score += w.transitions[prev * (l + 1) + l];
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, path));
            }
        }
        best.unwrap().1
    }

    #[test]
    fn three_token_hand_weights_match_enumeration() {
        let mut w = Weights::zeros(3, 1);
        let trans = [
            [0.5, -1.0, 0.2, 0.0],
            [0.1, 0.3, 1.5, -0.2],
            [0.4, -0.7, 0.9, 0.6],
            [0.2, 0.8, -3.0, 0.0],
        ];
        for (i, row) in trans.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                *w.transition_mut(i, j) = *v;
            }
        }
        let emissions = [0.3, 0.9, 0.1, -0.5, 0.2, 1.1, 0.7, 0.0, 0.4];
        assert_eq!(w.viterbi(&emissions), brute_force(&w, &emissions));
    }

    #[test]
    fn model_file_round_trip() {
        let labels = LabelSet::new(&["JOB_TITLE".to_string(), "ORG_NAME".to_string()]).unwrap();
        let mut weights = Weights::zeros(5, feature_width(1, 2));
        for (i, v) in weights.emission.iter_mut().enumerate() {
            *v = (i as f64 * 0.37).sin();
        }
        for (i, v) in weights.transitions.iter_mut().enumerate() {
            *v = -(i as f64) / 7.0;
        }
        let m = TaggerModel {
            labels,
            radius: 1,
            dim: 2,
            weights,
            epochs: 3,
            seed: 9,
            averaged: true,
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.tagger");
        m.save(&p).unwrap();
        assert_eq!(TaggerModel::load(&p).unwrap(), m);
    }
}
