//! Corpus compiler and evaluation harness for multi-task task-oriented
//! dialogue pre-training.
//!
//! - [`schema`]: canonical dialogue model and validation
//! - [`ingest`]: canonical loader and dataset adapters
//! - [`promptc`]: prompt templates and the seven-task corpus compiler
//! - [`metrics`]: BLEU, Inform/Success, Combined Score, JGA, intent accuracy, ROUGE
//! - [`analysis`]: aspect profiles, bucketing and per-bucket reports
//! - [`splits`]: low-resource, per-intent and leave-one-domain-out splits

pub mod analysis;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod promptc;
pub mod sampling;
pub mod schema;
pub mod splits;
pub mod text;

pub use error::{Error, Result};
pub use schema::{BeliefState, BeliefTriple, Dialogue, Speaker, TaskKind, Turn};
