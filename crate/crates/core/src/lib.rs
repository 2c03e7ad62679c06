//! Exact and approximate mode-seeking search over locally-normalized
//! autoregressive sequence models, plus the analyses that relate search
//! difficulty to how much the references of an input disagree.
//!
//! * [`seq`]: vocabularies, sequences, hypotheses and JSONL datasets.
//! * [`model`]: the [`model::ConditionalModel`] trait, context-table models
//!   and a seeded synthetic model generator.
//! * [`search`]: greedy, beam, exact DFS, exact n-best DFS and an
//!   enumeration oracle.
//! * [`metrics`]: edit distance, reference uncertainty, length buckets and
//!   Spearman correlation.
//! * [`analysis`]: search errors, probability-mass coverage and
//!   correlations over batches of results.
//! * [`cli`]: the `modeseek` command-line front end.

pub mod analysis;
pub mod cli;
pub mod fixtures;
pub mod metrics;
pub mod model;
mod report;
pub mod search;
pub mod seq;
