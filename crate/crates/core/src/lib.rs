//! Multi-task fine-tuning toolkit built around a mixture-ratio batch scheduler.
//!
//! The crate covers the full workflow for sentence-pair tasks (natural
//! language inference, question entailment, answer relevance):
//!
//! - [`corpus`]: JSON-Lines ingestion, relevance-score transforms, negative
//!   sampling, split recipes and cross-validation folds.
//! - [`scheduler`]: per-epoch mini-batch plans mixing every in-domain batch
//!   with a ratio-controlled sample of external batches.
//! - [`model`]: a small hashed-feature encoder with per-group answer heads,
//!   cross-entropy / squared-error objectives, SGD and the training loops.
//! - [`inference`]: majority-vote ensembles with probability tie-breaks,
//!   answer ranking, constrained triple decoding, member selection.
//! - [`metrics`]: accuracy, positive precision, MRR and Spearman restricted
//!   to predicted positives.
//! - [`pipeline`]: staged, reproducible end-to-end runs and the
//!   single-source vs multi-source ensemble comparison.
//!
//! Every random choice flows from an explicit `u64` seed through
//! [`seed::derive_seed`], so all artifacts are reproducible.

pub mod corpus;
pub mod error;
pub mod inference;
mod jsonl;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod scheduler;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
