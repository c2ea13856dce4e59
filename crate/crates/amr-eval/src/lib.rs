//! Fine-grained evaluation for AMR (Abstract Meaning Representation) parsers.
//!
//! The crate is organised around the evaluation workflow:
//!
//! * [`graph`] — Penman notation, the AMR graph model, normalization and
//!   exact graph matching.
//! * [`smatch`] — triple-overlap scoring with a hill-climbing aligner and an
//!   exhaustive oracle for small graphs.
//! * [`metrics`] — targeted category checks (node/edge/subgraph recall,
//!   exact match, ...) with prerequisite and sanity-check roles.
//! * [`pipeline`] — training-set frequency indexing and candidate extraction
//!   from test corpora, plus review-sheet plumbing.
//! * [`generation`] — synchronous string/graph grammars and the shipped
//!   structural-generalization and PP-attachment corpora.
//! * [`stats`] / [`report`] / [`viz`] — Wilson intervals, significance tests,
//!   table rendering and DOT export of graph diffs.

pub mod categories;
pub mod generation;
pub mod graph;
pub mod manifest;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod smatch;
pub mod stats;
pub mod testgen;
pub mod viz;
