use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::corpus::{default_entity_types, TaggedCorpus};
use super::features::{feature_width, featurize};
use super::model::{LabelSet, TaggerModel, Weights};
use crate::embedding::EmbeddingSpace;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub seed: u64,
    pub radius: usize,
    pub entity_types: Vec<String>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            seed: 0,
            radius: 1,
            entity_types: default_entity_types(),
        }
    }
}

/// Running sums for the averaged perceptron: the current weights plus the
/// step-weighted sum of every update, so the average is `w - u / c`.
struct Averager {
    current: Weights,
    weighted: Weights,
    step: f64,
}

impl Averager {
    fn add_emission(&mut self, label: usize, features: &[f64], sign: f64) {
        let width = self.current.width;
        let cur = &mut self.current.emission[label * width..(label + 1) * width];
        let acc = &mut self.weighted.emission[label * width..(label + 1) * width];
        for ((c, a), f) in cur.iter_mut().zip(acc.iter_mut()).zip(features) {
            *c += sign * f;
            *a += self.step * sign * f;
        }
    }

    fn add_transition(&mut self, from: usize, to: usize, sign: f64) {
        *self.current.transition_mut(from, to) += sign;
        *self.weighted.transition_mut(from, to) += self.step * sign;
    }

    fn average(self) -> Weights {
        let c = self.step;
        let mut out = self.current;
        for (w, u) in out.emission.iter_mut().zip(&self.weighted.emission) {
            *w -= u / c;
        }
        for (w, u) in out.transitions.iter_mut().zip(&self.weighted.transitions) {
            *w -= u / c;
        }
        out
    }
}

/// Averaged structured perceptron with Viterbi decoding. Corpora are
/// concatenated and shuffled once per epoch with a generator seeded from
/// `config.seed`; every corpus is featurized with the space registered for
/// its language, which must already live in the pivot space.
pub fn train_tagger(
    corpora: &[&TaggedCorpus],
    spaces: &HashMap<String, &EmbeddingSpace>,
    config: &TrainConfig,
) -> Result<TaggerModel> {
    if config.epochs == 0 {
        return Err(Error::Invalid("epochs must be >= 1".into()));
    }
    let labels = LabelSet::new(&config.entity_types)?;
    let mut dim = None;
    let mut items = Vec::new();
    for corpus in corpora {
        let space = spaces
            .get(&corpus.language)
            .ok_or_else(|| Error::Invalid(format!("no embedding space for language {:?}", corpus.language)))?;
        match dim {
            None => dim = Some(space.dim()),
            Some(d) if d != space.dim() => {
                return Err(Error::Dimension(format!(
                    "embedding spaces disagree: {d} vs {} ({})",
                    space.dim(),
                    corpus.language
                )))
            }
            _ => {}
        }
        for seq in &corpus.sequences {
            if seq.is_empty() {
                continue;
            }
            items.push((&seq.tokens, labels.encode(&seq.labels)?, *space));
        }
    }
    let dim = dim.ok_or_else(|| Error::Invalid("no training corpora".into()))?;
    if items.is_empty() {
        return Err(Error::Invalid("training data has no tokens".into()));
    }

    let width = feature_width(config.radius, dim);
    let zeros = Weights::zeros(labels.len(), width);
    let mut avg = Averager {
        current: zeros.clone(),
        weighted: zeros,
        step: 1.0,
    };
    let boundary = labels.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..items.len()).collect();
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut mistakes = 0usize;
        for &i in &order {
            let (tokens, gold, space) = &items[i];
            let features = featurize(tokens, space, config.radius);
            let predicted = avg.current.viterbi(&avg.current.emission_scores(&features));
            if &predicted != gold {
                mistakes += 1;
                let mut prev_gold = boundary;
                let mut prev_pred = boundary;
                for t in 0..gold.len() {
                    let (g, p) = (gold[t], predicted[t]);
                    if g != p {
                        avg.add_emission(g, features.row(t), 1.0);
                        avg.add_emission(p, features.row(t), -1.0);
                    }
                    if (prev_gold, g) != (prev_pred, p) {
                        avg.add_transition(prev_gold, g, 1.0);
                        avg.add_transition(prev_pred, p, -1.0);
                    }
                    prev_gold = g;
                    prev_pred = p;
                }
                if prev_gold != prev_pred {
                    avg.add_transition(prev_gold, boundary, 1.0);
                    avg.add_transition(prev_pred, boundary, -1.0);
                }
            }
            avg.step += 1.0;
        }
        log::debug!(
            "tagger epoch {}: {mistakes} of {} sequences mispredicted",
            epoch + 1,
            items.len()
        );
    }
    Ok(TaggerModel {
        labels,
        radius: config.radius,
        dim,
        weights: avg.average(),
        epochs: config.epochs,
        seed: config.seed,
        averaged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tagger::corpus::Sequence;

    fn space() -> EmbeddingSpace {
        let words = ["worked", "as", "engineer", "at", "acme", "corp"];
        let dim = 6;
        let mut data = vec![0.0; words.len() * dim];
        for i in 0..words.len() {
            data[i * dim + i] = 1.0;
        }
        EmbeddingSpace::new("en", words.iter().map(|w| w.to_string()).collect(), dim, data).unwrap()
    }

    fn corpus() -> TaggedCorpus {
        let tokens = ["worked", "as", "engineer", "at", "acme", "corp"];
        let labels = ["O", "O", "B-JOB_TITLE", "O", "B-ORG_NAME", "I-ORG_NAME"];
        TaggedCorpus::new(
            "en",
            vec![Sequence::new(
                tokens.iter().map(|s| s.to_string()).collect(),
                labels.iter().map(|s| s.to_string()).collect(),
            )
            .unwrap()],
        )
    }

    #[test]
    fn memorizes_a_single_sequence() {
        let s = space();
        let c = corpus();
        let spaces = HashMap::from([("en".to_string(), &s)]);
        let config = TrainConfig {
            epochs: 20,
            ..TrainConfig::default()
        };
        let model = train_tagger(&[&c], &spaces, &config).unwrap();
        let f = featurize(&c.sequences[0].tokens, &s, model.radius);
        assert_eq!(model.viterbi_decode(&f).unwrap(), c.sequences[0].labels);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let s = space();
        let c = corpus();
        let spaces = HashMap::from([("en".to_string(), &s)]);
        let config = TrainConfig {
            epochs: 5,
            seed: 11,
            ..TrainConfig::default()
        };
        let a = train_tagger(&[&c, &c], &spaces, &config).unwrap();
        let b = train_tagger(&[&c, &c], &spaces, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn error_paths() {
        let s = space();
        let c = corpus();
        let spaces = HashMap::from([("en".to_string(), &s)]);
        assert!(train_tagger(&[], &spaces, &TrainConfig::default()).is_err());
        let other = TaggedCorpus::new("de", c.sequences.clone());
        assert!(train_tagger(&[&other], &spaces, &TrainConfig::default()).is_err());
        let narrow = EmbeddingSpace::new("de", vec!["x".into()], 2, vec![1.0, 0.0]).unwrap();
        let spaces2 = HashMap::from([("en".to_string(), &s), ("de".to_string(), &narrow)]);
        assert!(matches!(
            train_tagger(&[&c, &other], &spaces2, &TrainConfig::default()),
            Err(Error::Dimension(_))
        ));
        let config = TrainConfig {
            entity_types: vec!["OTHER".into()],
            ..TrainConfig::default()
        };
        assert!(train_tagger(&[&c], &spaces, &config).is_err());
    }
}
