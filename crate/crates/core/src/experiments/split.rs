use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tagger::TaggedCorpus;

/// Train/dev/test documents of one corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusSplit {
    pub train: TaggedCorpus,
    pub dev: TaggedCorpus,
    pub test: TaggedCorpus,
}

/// Seeded document-level shuffle. Dev and test get `floor(f·n)` documents;
/// the remainder goes to train.
pub fn split_corpus(corpus: &TaggedCorpus, fractions: [f64; 3], seed: u64) -> Result<CorpusSplit> {
    if fractions.iter().any(|f| !(*f >= 0.0)) || (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid(format!(
            "split fractions {fractions:?} must be non-negative and sum to 1"
        )));
    }
    let n = corpus.len();
    let take = |f: f64| (f * n as f64 + 1e-9).floor() as usize;
    let (n_dev, n_test) = (take(fractions[1]), take(fractions[2]));
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = n - n_dev - n_test;
    Ok(CorpusSplit {
        train: corpus.select(&order[..n_train]),
        dev: corpus.select(&order[n_train..n_train + n_dev]),
        test: corpus.select(&order[n_train + n_dev..]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tagger::Sequence;

    fn docs(n: usize) -> TaggedCorpus {
        let seqs = (0..n)
            .map(|i| Sequence::new(vec![format!("w{i}")], vec!["O".into()]).unwrap())
            .collect();
        TaggedCorpus::new("de", seqs)
    }

    #[test]
    fn floors_with_remainder_to_train() {
        let s = split_corpus(&docs(10), [0.7, 0.15, 0.15], 1).unwrap();
        assert_eq!((s.train.len(), s.dev.len(), s.test.len()), (8, 1, 1));
    }

    #[test]
    fn seeded_and_disjoint() {
        let a = split_corpus(&docs(50), [0.7, 0.15, 0.15], 4).unwrap();
        assert_eq!(a, split_corpus(&docs(50), [0.7, 0.15, 0.15], 4).unwrap());
        let mut all: Vec<String> = [&a.train, &a.dev, &a.test]
            .iter()
            .flat_map(|c| c.sequences.iter().map(|s| s.tokens[0].clone()))
            .collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 50);
    }

    #[test]
    fn bad_fractions() {
        assert!(split_corpus(&docs(10), [0.5, 0.5, 0.1], 0).is_err());
    }
}
