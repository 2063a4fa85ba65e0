//! Evaluation engine for politically conditioned parliamentary speech
//! generation.
//!
//! The crate is organised around a staged pipeline: ingest a speech corpus,
//! embed it, generate candidate speeches through model endpoints, score them
//! with computational metrics and an LLM judge, and run the statistical
//! analysis layer. Each stage is also usable as a library on its own; see
//! the `examples/` directory for one runnable example per capability.
//!
//! Modules:
//!
//! * [`corpus`] — record types, JSONL ingestion, topic mapping, reference
//!   selection and stratified sampling.
//! * [`embedding`] — embedding provider protocol, on-disk cache, vector math.
//! * [`polmetrics`] — political-authenticity metrics (spectrum alignment and
//!   party alignment) over centroid indexes.
//! * [`textmetrics`] — Distinct-N, Self-BLEU, perplexity, and the external
//!   scorer protocol.
//! * [`judge`] — LLM-judge prompt rendering, batching and verdict parsing.
//! * [`genharness`] — generation-side prompt templates, output validation,
//!   retry and cross-model alignment.
//! * [`stats`] — normalization, cross-context stability, difficulty
//!   rankings, t-tests, ANOVA and Bonferroni correction.
//! * [`pipeline`] — run manifests, stage orchestration and report emission.

pub mod chat;
pub mod corpus;
pub mod embedding;
pub mod genharness;
pub mod judge;
pub mod net;
pub mod pipeline;
pub mod polmetrics;
pub mod stats;
pub mod textmetrics;

/// Engine version stamped into every artifact header.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
