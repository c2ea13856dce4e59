//! Corpus extraction: frequency indexing of a training set, threshold
//! mining of a test set, alignment-driven candidates, and the review
//! workflow around manual filtering.

mod aligned;
mod extract;
mod index;
mod review;

pub use aligned::{extract_aligned, parse_alignments, AlignedMode, AlignmentRecord};
pub use extract::{
    candidates_to_annotations, extract_category, parse_candidates, write_candidates,
    CandidateRecord, CandidateStatus, ExtractConfig, EXTRACTION_CATEGORIES,
};
pub use index::{band, build_index, load_index, save_index, Band, FrequencyIndex, ARG_ROLES};
pub use review::{review_summary, ReviewAdvisory, ReviewVerdict, HAND_FILTER_THRESHOLD};

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("entry {0:?} has no graph")]
    MissingGraph(String),
    #[error("unknown extraction category {0:?}")]
    UnknownCategory(String),
    #[error("alignment references unknown entry {0:?}")]
    UnknownEntry(String),
    #[error("alignment references unknown variable {variable:?} in entry {entry:?}")]
    UnknownVariable { entry: String, variable: String },
    #[error("alignment file line {line}: {message}")]
    BadAlignment { line: usize, message: String },
    #[error("candidate sheet line {line}: {message}")]
    BadSheet { line: usize, message: String },
    #[error("index file line {line}: {message}")]
    BadIndex { line: usize, message: String },
    #[error("review sample size must be >= 1")]
    EmptySample,
    #[error("error rate {0} is not a ratio in [0, 1]")]
    BadErrorRate(f64),
    #[error(transparent)]
    Metric(#[from] crate::metrics::MetricError),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

/// The special-entity type inventory, shipped as configuration.
pub fn default_entity_types() -> BTreeSet<String> {
    include_str!("entity_types.txt")
        .lines()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entity_type_list_matches_the_configured_inventory() {
        let types = default_entity_types();
        assert_eq!(types.len(), 20);
        assert!(types.contains("phone-number-entity"));
        assert!(types.contains("variable"));
    }
}
