//! Grammar-based corpus generation for the structural-generalization and
//! PP-attachment categories, including their sanity-check splits.

mod categories;
mod pp;
pub mod rule;
pub mod sampler;

pub use categories::{
    generate_category, load_grammar, sample, sanity_split, shipped_config, validate_entry,
    CoveragePass, GeneratedCorpus, GeneratedEntry, GenerationConfig, SamplePass,
    GENERATION_CATEGORIES,
};
pub use pp::pp_attachment_corpus;
pub use rule::{FeatVal, GenError, Grammar, SyncRule};
pub use sampler::{derive, BindingRecord, Derivation, Forced};
