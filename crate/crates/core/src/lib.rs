//! Joint Chinese word segmentation and POS tagging with character-level
//! relation graphs.
//!
//! A sentence's dependency tree, first-ancestor constituent labels and
//! semantic roles are turned into four relation graphs over a node set of
//! characters plus 36 shared label nodes. A gated multi-relation GCN
//! propagates encoder features over those graphs, the result is fused with
//! the encoder output, and a linear-chain CRF decodes joint BMES×POS labels.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`, which is what training
//! and the gradient checks use.

pub mod crf;
pub mod error;
pub mod graphs;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod numcore;

pub use error::{Error, Result};
pub use numcore::Scalar;

/// Half-open character range `[start, end)` covered by one word.
pub type Span = (usize, usize);

pub type Tensor = numcore::Tensor<f64>;
pub type Tensor32 = numcore::Tensor<f32>;
pub type Tape = numcore::Tape<f64>;
pub type ParamStore = numcore::ParamStore<f64>;
pub type RelationGraph = graphs::RelationGraph<f64>;
pub type SentenceGraphs = graphs::SentenceGraphs<f64>;
pub type Model = model::SynSemGcn<f64>;
pub type Model32 = model::SynSemGcn<f32>;
