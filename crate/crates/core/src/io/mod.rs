//! File formats: feature files, metadata CSV, model bundles, score tables
//! and metric reports.

mod binary;
pub mod features;
pub mod metadata;
pub mod models;
pub mod scores;

pub use features::{read_feature_file, write_feature_file};
pub use metadata::{read_metadata, read_pairs, write_metadata, write_pairs, MetadataRow};
pub use models::{read_models, write_models};
pub use scores::{read_scores, write_scores, ScoreRow};
