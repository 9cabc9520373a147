//! BIO entity tagging over embedding window features: a linear-chain model
//! trained as an averaged structured perceptron, with exact Viterbi decoding
//! and exact-match span F1.

mod corpus;
mod features;
mod metrics;
mod model;
mod spans;
mod train;

pub use corpus::{default_entity_types, load_conll, load_conll_as, Bio, Sequence, TaggedCorpus, JOB_TITLE, ORG_NAME};
pub use features::{feature_width, featurize, Features};
pub use metrics::{evaluate_f1, span_f1, F1Report, TypeScore};
pub use model::{LabelSet, TaggerModel, Weights};
pub use spans::{encode_spans, extract_spans, Span};
pub use train::{train_tagger, TrainConfig};
