//! Marker-confidence analysis for epistemic markers in LLM answers.
//!
//! A model answers questions while hedging with phrases such as "fairly
//! certain" or "unlikely". The confidence of a marker is the observed
//! accuracy of the answers carrying it. This crate turns response logs into
//! per-marker confidence tables and scores how stable those tables are
//! inside one dataset and across datasets:
//!
//! - in-domain and cross-domain transfer ECE, plus ECE of numeric confidences
//! - coefficient of variation of marker confidence within and across datasets
//! - Pearson correlation of marker confidence with dataset accuracy (MAC)
//! - Spearman correlation of marker rankings between dataset pairs (MRC)
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the HTTP
//! client and the CLI live in the `epimark` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod ece;
mod error;
pub mod extract;
pub mod figures;
pub mod ingest;
pub mod metrics;
pub mod model;
pub mod prompt;
pub mod report;
pub mod stats;
pub mod synth;
pub mod table;

pub use error::{Error, Result};
pub use model::{
    Answer, AnswerOption, Marker, NumericConfidence, PromptMode, QaItem, QuestionType,
    ResponseRecord, Split, Violation,
};
pub use table::{ConfidenceTable, MarkerStats};
