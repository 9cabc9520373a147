//! Seed dictionary construction, linear cross-lingual embedding maps, and
//! their evaluation by word translation and BIO sequence labelling.

#[macro_use]
mod macros;

pub mod alignment;
pub mod dictionary;
pub mod embedding;
pub mod error;
pub mod experiments;
pub mod intrinsic;
pub mod linalg;
pub mod synthetic;
pub mod tagger;

pub use error::{Error, Result};
/// Matrix types used throughout the public API.
pub use nalgebra;
