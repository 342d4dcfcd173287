//! Approximate the research specialty of a publication record.
//!
//! The pipeline runs in three steps:
//!
//! 1. [`seed`]: extend an initial record with the corpus publications it references.
//! 2. [`keys`]: per data field (source cell, title words, authors, references),
//!    select the most frequent values until a coverage threshold of the seed is met.
//! 3. [`approx`]: collect every publication in a year window that is covered by
//!    key values in at least three of the four fields.
//!
//! [`analytics`] ranks prominent authors and compares records by mutual coverage;
//! [`syngen`] generates synthetic corpora with planted specialties for validation.

pub mod analytics;
pub mod approx;
pub mod corpus;
pub mod export;
pub mod keys;
pub mod seed;
pub mod syngen;

#[cfg(test)]
mod testutil;

pub use approx::{
    build_approximation, coverage_profile, expected_inclusion_probability, rederive_key_values,
    seed_coverage_histogram, CoverageHistogram, CoverageProfile, FieldFlags,
    SpecialtyApproximation, YearWindow,
};
pub use corpus::{
    derive_cell, ingest, ingest_reader, tokenize_title, AuthorKey, AuthorName, CellId, Corpus,
    DocType, IngestOptions, Publication,
};
pub use keys::{
    compute_all_keys, field_frequencies, publication_covered, select_key_values, AuthorScope,
    FieldKind, KeyValueSet, KeyValueSets, KeysConfig, PerField,
};
pub use seed::{build_seed_record, SeedOptions, SeedRecord};
pub use analytics::{
    coverage_of_record_by_keys, mutual_coverage, rank_authors, AuthorRanking, MutualCoverage,
    RankingInput,
};
pub use syngen::{evaluate_recovery, generate, GeneratorConfig, GroundTruth};
