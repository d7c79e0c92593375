//! File formats, dataset adapters, the chat-completion client and the
//! command-line pipeline around `epimark-core`.

pub mod adapters;
pub mod cli;
pub mod config;
pub mod elicit;
pub mod emit;
mod error;
pub mod jsonl;
pub mod pipeline;
pub mod run_dir;

pub use error::{Error, Result};
