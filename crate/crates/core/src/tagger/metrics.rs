use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use super::corpus::TaggedCorpus;
use super::features::featurize;
use super::model::TaggerModel;
use super::spans::{extract_spans, Span};
use crate::embedding::{write_text, EmbeddingSpace};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TypeScore {
    pub entity_type: String,
    pub gold: usize,
    pub predicted: usize,
    pub correct: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Exact-match span scores per entity type and their macro average.
#[derive(Clone, Debug, PartialEq)]
pub struct F1Report {
    pub per_type: Vec<TypeScore>,
    pub macro_f1: f64,
    /// Share of test tokens without an embedding.
    pub oov_rate: f64,
}

impl F1Report {
    pub fn get(&self, entity_type: &str) -> Option<&TypeScore> {
        self.per_type.iter().find(|s| s.entity_type == entity_type)
    }

    pub fn summary(&self) -> String {
        let mut out = format!("F1 {}", self.macro_f1);
        for s in &self.per_type {
            let _ = write!(out, " {} {}", s.entity_type, s.f1);
        }
        out
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("entity\tgold\tpredicted\tcorrect\tprecision\trecall\tf1\n");
        for s in &self.per_type {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                s.entity_type, s.gold, s.predicted, s.correct, s.precision, s.recall, s.f1
            );
        }
        let _ = writeln!(out, "macro\t\t\t\t\t\t{}", self.macro_f1);
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path.as_ref(), &self.to_tsv())
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Span F1 over parallel gold/predicted label sequences.
pub fn span_f1<S: AsRef<str>, T: AsRef<str>>(
    gold: &[Vec<S>],
    predicted: &[Vec<T>],
    entity_types: &[String],
) -> Result<F1Report> {
    if gold.len() != predicted.len() {
        return Err(Error::Invalid(format!(
            "{} gold sequences vs {} predicted",
            gold.len(),
            predicted.len()
        )));
    }
    let mut gold_spans: HashSet<(usize, Span)> = HashSet::new();
    let mut pred_spans: HashSet<(usize, Span)> = HashSet::new();
    for (i, (g, p)) in gold.iter().zip(predicted).enumerate() {
        if g.len() != p.len() {
            return Err(Error::Invalid(format!("sequence {i}: length mismatch")));
        }
        gold_spans.extend(extract_spans(g).into_iter().map(|s| (i, s)));
        pred_spans.extend(extract_spans(p).into_iter().map(|s| (i, s)));
    }
    let per_type: Vec<TypeScore> = entity_types
        .iter()
        .map(|ty| {
            let g = gold_spans.iter().filter(|(_, s)| &s.entity_type == ty).count();
            let p = pred_spans.iter().filter(|(_, s)| &s.entity_type == ty).count();
            let c = pred_spans
                .iter()
                .filter(|x| &x.1.entity_type == ty && gold_spans.contains(x))
                .count();
            let precision = ratio(c, p);
            let recall = ratio(c, g);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            TypeScore {
                entity_type: ty.clone(),
                gold: g,
                predicted: p,
                correct: c,
                precision,
                recall,
                f1,
            }
        })
        .collect();
    let macro_f1 = if per_type.is_empty() {
        0.0
    } else {
        per_type.iter().map(|s| s.f1).sum::<f64>() / per_type.len() as f64
    };
    Ok(F1Report {
        per_type,
        macro_f1,
        oov_rate: 0.0,
    })
}

/// Decodes every test sequence and scores it against the gold labels.
pub fn evaluate_f1(model: &TaggerModel, test: &TaggedCorpus, embeddings: &EmbeddingSpace) -> Result<F1Report> {
    if embeddings.dim() != model.dim {
        return Err(Error::Dimension(format!(
            "embedding dimension {} vs model dimension {}",
            embeddings.dim(),
            model.dim
        )));
    }
    let mut gold = Vec::with_capacity(test.len());
    let mut predicted = Vec::with_capacity(test.len());
    let mut oov = 0;
    let mut tokens = 0;
    for seq in &test.sequences {
        let features = featurize(&seq.tokens, embeddings, model.radius);
        oov += features.oov;
        tokens += seq.len();
        predicted.push(model.viterbi_decode(&features)?);
        gold.push(seq.labels.clone());
    }
    let mut report = span_f1(&gold, &predicted, model.labels.entity_types())?;
    report.oov_rate = ratio(oov, tokens);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn types() -> Vec<String> {
        vec!["J".to_string(), "N".to_string()]
    }

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identical_predictions() {
        let g = vec![labels(&["B-J", "I-J", "O", "B-N"])];
        let r = span_f1(&g, &g, &types()).unwrap();
        assert_eq!(r.macro_f1, 1.0);
    }

    #[test]
    fn boundary_must_match_exactly() {
        let g = vec![labels(&["O", "B-J", "I-J"])];
        let p = vec![labels(&["O", "B-J", "O"])];
        let r = span_f1(&g, &p, &types()).unwrap();
        assert_eq!(r.get("J").unwrap().f1, 0.0);
    }

    #[test]
    fn hand_enumerated_table() {
        // Gold: two J spans, one N span. Predicted: one correct J span and a
        // spurious N span. J: P = 1, R = 1/2; N: P = 0, R = 0.
        let g = vec![labels(&["B-J", "O", "B-J", "O", "B-N", "O"])];
        let p = vec![labels(&["B-J", "O", "O", "O", "O", "B-N"])];
        let r = span_f1(&g, &p, &types()).unwrap();
        let j = r.get("J").unwrap();
        assert_eq!((j.precision, j.recall), (1.0, 0.5));
        assert_eq!(j.f1, 2.0 * (1.0 * 0.5) / 1.5);
        assert!((j.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.get("N").unwrap().f1, 0.0);
        assert!((r.macro_f1 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn swapping_gold_and_prediction_swaps_p_and_r() {
        let a = vec![labels(&["B-J", "I-J", "O", "B-N", "B-J"])];
        let b = vec![labels(&["B-J", "O", "O", "B-N", "I-J"])];
        let ab = span_f1(&a, &b, &types()).unwrap();
        let ba = span_f1(&b, &a, &types()).unwrap();
        for (x, y) in ab.per_type.iter().zip(&ba.per_type) {
            assert_eq!(x.precision, y.recall);
            assert_eq!(x.recall, y.precision);
        }
    }

    #[test]
    fn length_mismatch_is_error() {
        let a = vec![labels(&["O"])];
        let b = vec![labels(&["O", "O"])];
        assert!(span_f1(&a, &b, &types()).is_err());
    }
}
