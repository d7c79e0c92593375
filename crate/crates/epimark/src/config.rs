//! TOML run configuration. Command-line flags override file values.

use std::path::{Path, PathBuf};

use epimark_core::ece::EceBinning;
use epimark_core::extract::StrategyKind;
use epimark_core::metrics::{EvaluationConfig, DEFAULT_COVERAGE_FLOOR, DEFAULT_THRESHOLD};
use serde::{Deserialize, Serialize};

use crate::elicit::ClientConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub run_dir: Option<PathBuf>,
    pub client: ClientConfig,
    pub extract: ExtractConfig,
    pub metrics: MetricsConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractConfig {
    pub strategy: StrategyKind,
    pub lexicon: Option<PathBuf>,
    /// Model asked by the llm_assisted and hybrid strategies.
    pub extractor_model: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub threshold: u64,
    pub thresholds: Vec<u64>,
    pub include_none_marker: bool,
    pub ece_bins: EceBinning,
    pub coverage_floor: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            thresholds: Vec::new(),
            include_none_marker: false,
            ece_bins: EceBinning::default(),
            coverage_floor: DEFAULT_COVERAGE_FLOOR,
        }
    }
}

impl From<&MetricsConfig> for EvaluationConfig {
    fn from(m: &MetricsConfig) -> Self {
        EvaluationConfig {
            threshold: m.threshold,
            sweep: m.thresholds.clone(),
            include_none_marker: m.include_none_marker,
            binning: m.ece_bins,
            coverage_floor: m.coverage_floor,
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::format(path, e))
    }
}
