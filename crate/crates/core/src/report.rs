//! Report types produced by [`crate::metrics::evaluate_model`].

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ece::EceBinning;
use crate::model::Marker;

/// A metric input that was left out, and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skipped {
    pub metric: String,
    pub subject: String,
    pub reason: String,
}

/// Transfer ECE from the training table of one dataset to the test split of
/// another (or the same) dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEce {
    pub train_dataset: String,
    pub test_dataset: String,
    pub ece: Option<f64>,
    pub coverage: f64,
    pub covered: u64,
    pub total: u64,
}

/// The four marker-analysis metrics at one filtering threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMetrics {
    pub threshold: u64,
    pub c_avg_cv: Option<f64>,
    pub mac: Option<f64>,
    pub mrc: Option<f64>,
    pub i_avg_cv: Option<f64>,
    pub markers_per_dataset: BTreeMap<String, u64>,
    pub shared_markers: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounters {
    /// Ordered cross-dataset pairs averaged into C-AvgECE.
    pub ece_ordered_pairs: u64,
    /// Unordered dataset pairs visited by MRC.
    pub mrc_pairs_enumerated: u64,
    /// Unordered pairs that shared at least two markers.
    pub mrc_pairs_used: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordDiagnostics {
    pub records: u64,
    pub unextracted: u64,
    pub invalid_answers: u64,
    pub no_marker: u64,
    pub invalid_numeric: u64,
}

/// All seven metrics for one model, with breakdowns and coverage diagnostics.
///
/// Metrics are `None` when undefined for the input; `skipped` says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub model_id: String,
    pub threshold: u64,
    pub include_none_marker: bool,
    pub ece_binning: EceBinning,
    pub datasets: Vec<String>,
    pub accuracies: BTreeMap<String, f64>,
    pub mean_accuracy: Option<f64>,
    pub i_avg_ece: Option<f64>,
    pub c_avg_ece: Option<f64>,
    pub num_ece: Option<f64>,
    pub c_avg_cv: Option<f64>,
    pub mac: Option<f64>,
    pub mrc: Option<f64>,
    pub i_avg_cv: Option<f64>,
    pub per_dataset_ece: Vec<PairEce>,
    pub num_ece_by_dataset: BTreeMap<String, f64>,
    pub shared_markers: Vec<Marker>,
    pub coverage: Option<f64>,
    pub counters: PairCounters,
    pub skipped: Vec<Skipped>,
    pub warnings: Vec<String>,
    pub threshold_sweep: Vec<ThresholdMetrics>,
    pub diagnostics: RecordDiagnostics,
}

impl MetricReport {
    /// The seven headline metrics in table order.
    pub fn headline(&self) -> [(&'static str, Option<f64>); 7] {
        [
            ("i_avg_ece", self.i_avg_ece),
            ("c_avg_ece", self.c_avg_ece),
            ("num_ece", self.num_ece),
            ("c_avg_cv", self.c_avg_cv),
            ("mac", self.mac),
            ("mrc", self.mrc),
            ("i_avg_cv", self.i_avg_cv),
        ]
    }

    pub fn in_domain_ece(&self) -> impl Iterator<Item = (&str, f64)> {
        self.per_dataset_ece
            .iter()
            .filter(|p| p.train_dataset == p.test_dataset)
            .filter_map(|p| p.ece.map(|e| (p.train_dataset.as_str(), e)))
    }
}

/// Cross-model correlation of accuracy with marker stability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapabilityCorrelation {
    pub r_acc_cv: f64,
    pub r_acc_mrc: f64,
}

/// Reports for every model in a run plus the cross-model analyses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub reports: Vec<MetricReport>,
    pub capability: Option<CapabilityCorrelation>,
    pub skipped: Vec<Skipped>,
    /// Mean in-domain ECE per dataset, averaged over models.
    pub dataset_in_domain_ece: BTreeMap<String, f64>,
}
