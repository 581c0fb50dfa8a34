//! Template-based face recognition on precomputed embeddings.
//!
//! The crate takes per-media face embeddings from one or more extractor
//! streams and runs the recognition stage on top of them:
//!
//! 1. [`fusion`]: per-stream unit normalization, concatenation, video-frame
//!    pooling and template assembly.
//! 2. [`svm`]: one class-weighted linear SVM per template, trained against a
//!    large negative set.
//! 3. [`scoring`]: one-shot similarity between encodings and softmax fusion
//!    of the per-encoding scores of a template pair.
//! 4. [`eval`]: TAR@FAR, CMC and TPIR@FPIR, aggregated over protocol splits.
//!
//! [`pipeline`] wires the stages together; [`io`] holds the file formats and
//! [`synth`] generates clustered embeddings for desk-scale runs.

pub mod config;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod io;
pub mod model;
pub mod pipeline;
pub mod scoring;
pub mod svm;
pub mod synth;

pub use config::Config;
pub use error::{Error, Result};
pub use model::{Embedding, FeatureMap, MediaEncoding, MediaRecord, ProtocolSplit, Template};
