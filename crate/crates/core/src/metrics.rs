//! The seven stability metrics and the cross-model analyses.
//!
//! ECE-based metrics transfer an unfiltered training-split table onto test
//! records. The four marker-analysis metrics (C-AvgCV, MAC, MRC, I-AvgCV)
//! work on training tables filtered by a minimum marker count.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::ece::{ece, EceBinning, EceSample};
use crate::model::{Answer, Marker, PromptMode, ResponseRecord, Split};
use crate::report::{
    CapabilityCorrelation, MetricReport, PairCounters, PairEce, RecordDiagnostics, ReportBundle,
    Skipped, ThresholdMetrics,
};
use crate::stats::{cv, mean, pearson, spearman};
use crate::table::{marker_confidence_table, ConfidenceTable};
use crate::{Error, Result};

/// Training tables keyed by dataset id.
pub type Tables = BTreeMap<String, ConfidenceTable>;

/// Default minimum marker count for the marker-analysis metrics.
pub const DEFAULT_THRESHOLD: u64 = 10;
/// Transfer coverage below this fraction raises a warning.
pub const DEFAULT_COVERAGE_FLOOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferEce {
    pub ece: f64,
    pub coverage: f64,
    pub covered: u64,
    pub total: u64,
}

fn transfer_samples(train: &ConfidenceTable, test: &[ResponseRecord]) -> (Vec<EceSample>, u64) {
    let mut samples = Vec::new();
    let mut total = 0;
    for r in test {
        let (Some(marker), Some(correct)) = (&r.marker, r.valid_outcome()) else {
            continue;
        };
        total += 1;
        if let Some(conf) = train.confidence(marker) {
            samples.push(EceSample::new(conf, correct));
        }
    }
    (samples, total)
}

/// Scores `test_records` with the marker confidences of `train_table`.
///
/// Test records whose marker is missing from the table are excluded from the
/// ECE and counted against coverage.
pub fn ece_marker_transfer(
    train_table: &ConfidenceTable,
    test_records: &[ResponseRecord],
    binning: EceBinning,
) -> Result<TransferEce> {
    let (samples, total) = transfer_samples(train_table, test_records);
    if total == 0 {
        return Err(Error::EmptyInput("transfer test records"));
    }
    if samples.is_empty() {
        return Err(Error::ZeroCoverage);
    }
    let covered = samples.len() as u64;
    Ok(TransferEce {
        ece: ece(&samples, binning)?,
        coverage: covered as f64 / total as f64,
        covered,
        total,
    })
}

/// Per-dataset inputs of one model plus every ordered transfer pair.
#[derive(Debug, Clone)]
pub struct MetricGrid {
    pub datasets: Vec<String>,
    pub tables: Tables,
    pub test_records: BTreeMap<String, Vec<ResponseRecord>>,
    pub numeric_records: BTreeMap<String, Vec<ResponseRecord>>,
    pub accuracies: BTreeMap<String, f64>,
    pub binning: EceBinning,
    pub ece_pairs: BTreeMap<(String, String), TransferEce>,
    pub pair_errors: BTreeMap<(String, String), Error>,
    /// (covered, total) per ordered pair, including failed ones.
    pub pair_coverage: BTreeMap<(String, String), (u64, u64)>,
}

impl MetricGrid {
    /// Builds the grid and evaluates ECE-mar for every ordered dataset pair,
    /// the diagonal included.
    pub fn build(
        tables: Tables,
        test_records: BTreeMap<String, Vec<ResponseRecord>>,
        accuracies: BTreeMap<String, f64>,
        numeric_records: BTreeMap<String, Vec<ResponseRecord>>,
        binning: EceBinning,
    ) -> Result<Self> {
        for d in tables.keys() {
            if !test_records.contains_key(d) || !accuracies.contains_key(d) {
                return Err(Error::IncompleteGrid(d.clone()));
            }
        }
        let datasets: Vec<String> = tables.keys().cloned().collect();
        let mut grid = Self {
            datasets,
            tables,
            test_records,
            numeric_records,
            accuracies,
            binning,
            ece_pairs: BTreeMap::new(),
            pair_errors: BTreeMap::new(),
            pair_coverage: BTreeMap::new(),
        };
        for p in &grid.datasets {
            for q in &grid.datasets {
                let key = (p.clone(), q.clone());
                let (samples, total) = transfer_samples(&grid.tables[p], &grid.test_records[q]);
                grid.pair_coverage.insert(key.clone(), (samples.len() as u64, total));
                match ece_marker_transfer(&grid.tables[p], &grid.test_records[q], binning) {
                    Ok(t) => {
                        grid.ece_pairs.insert(key, t);
                    }
                    Err(e) => {
                        grid.pair_errors.insert(key, e);
                    }
                }
            }
        }
        Ok(grid)
    }

    fn pair_ece(&self, p: &str, q: &str) -> Result<f64> {
        let key = (p.to_string(), q.to_string());
        if let Some(t) = self.ece_pairs.get(&key) {
            return Ok(t.ece);
        }
        Err(self
            .pair_errors
            .get(&key)
            .cloned()
            .unwrap_or_else(|| Error::IncompleteGrid(format!("{p} -> {q}"))))
    }
}

/// Mean in-domain ECE-mar over datasets.
pub fn i_avg_ece(grid: &MetricGrid) -> Result<f64> {
    if grid.datasets.is_empty() {
        return Err(Error::TooFewDatasets { needed: 1, got: 0 });
    }
    let mut sum = 0.0;
    for d in &grid.datasets {
        sum += grid.pair_ece(d, d)?;
    }
    Ok(sum / grid.datasets.len() as f64)
}

/// Mean cross-domain ECE-mar over all ordered pairs `p != q`. Returns the
/// value and the number of pairs averaged, always `|D| * (|D| - 1)`.
pub fn c_avg_ece(grid: &MetricGrid) -> Result<(f64, u64)> {
    let n = grid.datasets.len();
    if n < 2 {
        return Err(Error::TooFewDatasets { needed: 2, got: n });
    }
    let mut sum = 0.0;
    let mut pairs = 0u64;
    for p in &grid.datasets {
        for q in grid.datasets.iter().filter(|q| *q != p) {
            sum += grid.pair_ece(p, q)?;
            pairs += 1;
        }
    }
    debug_assert_eq!(pairs as usize, n * (n - 1));
    Ok((sum / pairs as f64, pairs))
}

/// Mean over datasets of the ECE of numeric confidences on the test split.
/// Datasets without usable numeric records are left out of the mean.
pub fn num_ece(grid: &MetricGrid) -> Result<(f64, BTreeMap<String, f64>)> {
    let mut per = BTreeMap::new();
    for d in &grid.datasets {
        let Some(records) = grid.numeric_records.get(d) else {
            continue;
        };
        let samples: Vec<EceSample> = records
            .iter()
            .filter_map(|r| {
                let conf = r.numeric_confidence?.value()?;
                Some(EceSample::new(conf, r.valid_outcome()?))
            })
            .filter(|s| (0.0..=1.0).contains(&s.predicted_confidence))
            .collect();
        if !samples.is_empty() {
            per.insert(d.clone(), ece(&samples, grid.binning)?);
        }
    }
    if per.is_empty() {
        return Err(Error::EmptyInput("numeric-mode test records"));
    }
    let values: Vec<f64> = per.values().copied().collect();
    Ok((mean(&values)?, per))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EceAggregates {
    pub i_avg_ece: f64,
    pub c_avg_ece: f64,
    pub num_ece: Option<f64>,
    pub ordered_pairs: u64,
}

/// I-AvgECE, C-AvgECE and (when numeric records exist) NumECE.
pub fn aggregate_ece(grid: &MetricGrid) -> Result<EceAggregates> {
    let i = i_avg_ece(grid)?;
    let (c, ordered_pairs) = c_avg_ece(grid)?;
    Ok(EceAggregates {
        i_avg_ece: i,
        c_avg_ece: c,
        num_ece: num_ece(grid).ok().map(|(v, _)| v),
        ordered_pairs,
    })
}

/// Filters every table by `threshold` and optionally drops the no-marker
/// sentinel.
pub fn analysis_tables(tables: &Tables, threshold: u64, include_none_marker: bool) -> Tables {
    tables
        .iter()
        .map(|(d, t)| {
            let mut f = t.filter_by_count(threshold);
            if !include_none_marker {
                f = f.without_none_marker();
            }
            (d.clone(), f)
        })
        .collect()
}

/// Markers present in every table.
pub fn shared_markers(tables: &Tables) -> Vec<Marker> {
    let mut iter = tables.values();
    let Some(first) = iter.next() else {
        return Vec::new();
    };
    let mut shared: BTreeSet<Marker> = first.markers().cloned().collect();
    for t in iter {
        shared.retain(|m| t.entries.contains_key(m));
    }
    shared.into_iter().collect()
}

fn skip(metric: &str, subject: impl Into<String>, reason: impl ToString) -> Skipped {
    Skipped {
        metric: metric.into(),
        subject: subject.into(),
        reason: reason.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Averaged {
    pub value: f64,
    pub used: u64,
    pub skipped: Vec<Skipped>,
}

/// Mean over datasets of the CV of marker confidences within each dataset.
/// Datasets with fewer than two markers are skipped.
pub fn i_avg_cv(tables: &Tables) -> Result<Averaged> {
    let mut cvs = Vec::new();
    let mut skipped = Vec::new();
    for (d, t) in tables {
        if t.len() < 2 {
            skipped.push(skip("i_avg_cv", d, format!("{} marker(s) after filtering", t.len())));
            continue;
        }
        let values: Vec<f64> = t.entries.values().map(|s| s.confidence).collect();
        match cv(&values) {
            Ok(v) => cvs.push(v),
            Err(e) => skipped.push(skip("i_avg_cv", d, e)),
        }
    }
    if cvs.is_empty() {
        return Err(Error::NoUsableMarkers("i_avg_cv"));
    }
    Ok(Averaged {
        value: mean(&cvs)?,
        used: cvs.len() as u64,
        skipped,
    })
}

/// Mean over globally shared markers of the CV of that marker's confidence
/// across datasets.
pub fn c_avg_cv(tables: &Tables) -> Result<Averaged> {
    if tables.len() < 2 {
        return Err(Error::TooFewDatasets {
            needed: 2,
            got: tables.len(),
        });
    }
    let shared = shared_markers(tables);
    if shared.is_empty() {
        return Err(Error::NoSharedMarkers);
    }
    let mut cvs = Vec::new();
    let mut skipped = Vec::new();
    for m in &shared {
        let values: Vec<f64> = tables.values().map(|t| t.entries[m].confidence).collect();
        match cv(&values) {
            Ok(v) => cvs.push(v),
            Err(e) => skipped.push(skip("c_avg_cv", m.as_str(), e)),
        }
    }
    if cvs.is_empty() {
        return Err(Error::NoUsableMarkers("c_avg_cv"));
    }
    Ok(Averaged {
        value: mean(&cvs)?,
        used: cvs.len() as u64,
        skipped,
    })
}

/// Marker-accuracy correlation: mean over globally shared markers of the
/// Pearson correlation between the marker's per-dataset confidence and the
/// model's per-dataset accuracy.
pub fn mac(tables: &Tables, accuracies: &BTreeMap<String, f64>) -> Result<Averaged> {
    if tables.len() < 2 {
        return Err(Error::TooFewDatasets {
            needed: 2,
            got: tables.len(),
        });
    }
    let acc: Vec<f64> = tables
        .keys()
        .map(|d| accuracies.get(d).copied().ok_or_else(|| Error::IncompleteGrid(d.clone())))
        .collect::<Result<_>>()?;
    let shared = shared_markers(tables);
    if shared.is_empty() {
        return Err(Error::NoSharedMarkers);
    }
    let mut rhos = Vec::new();
    let mut skipped = Vec::new();
    for m in &shared {
        let conf: Vec<f64> = tables.values().map(|t| t.entries[m].confidence).collect();
        match pearson(&conf, &acc) {
            Ok(r) => rhos.push(r),
            Err(e) => skipped.push(skip("mac", m.as_str(), e)),
        }
    }
    if rhos.is_empty() {
        return Err(Error::NoUsableMarkers("mac"));
    }
    Ok(Averaged {
        value: mean(&rhos)?,
        used: rhos.len() as u64,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MrcResult {
    pub value: f64,
    pub pairs_enumerated: u64,
    pub pairs_used: u64,
    pub skipped: Vec<Skipped>,
}

/// Marker-ranking correlation: mean over unordered dataset pairs of the
/// Spearman correlation of confidences on the markers the pair shares.
/// Pairs sharing fewer than two markers are skipped.
pub fn mrc(tables: &Tables) -> Result<MrcResult> {
    if tables.len() < 2 {
        return Err(Error::TooFewDatasets {
            needed: 2,
            got: tables.len(),
        });
    }
    let entries: Vec<(&String, &ConfidenceTable)> = tables.iter().collect();
    let mut rhos = Vec::new();
    let mut skipped = Vec::new();
    let mut enumerated = 0u64;
    for (i, (dp, tp)) in entries.iter().enumerate() {
        for (dq, tq) in &entries[i + 1..] {
            enumerated += 1;
            let subject = format!("{dp}~{dq}");
            let (x, y): (Vec<f64>, Vec<f64>) = tp
                .entries
                .iter()
                .filter_map(|(m, s)| tq.entries.get(m).map(|o| (s.confidence, o.confidence)))
                .unzip();
            if x.len() < 2 {
                skipped.push(skip("mrc", subject, format!("{} shared marker(s)", x.len())));
                continue;
            }
            match spearman(&x, &y) {
                Ok(r) => rhos.push(r),
                Err(e) => skipped.push(skip("mrc", subject, e)),
            }
        }
    }
    if rhos.is_empty() {
        return Err(Error::NoUsablePairs);
    }
    Ok(MrcResult {
        value: mean(&rhos)?,
        pairs_enumerated: enumerated,
        pairs_used: rhos.len() as u64,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSummary {
    pub model_id: String,
    pub mean_accuracy: f64,
    pub c_avg_cv: f64,
    pub mrc: f64,
}

/// Pearson correlation across models of mean accuracy with C-AvgCV and with
/// MRC.
pub fn capability_correlation(summaries: &[ModelSummary]) -> Result<CapabilityCorrelation> {
    if summaries.len() < 3 {
        return Err(Error::TooFewModels {
            needed: 3,
            got: summaries.len(),
        });
    }
    let acc: Vec<f64> = summaries.iter().map(|s| s.mean_accuracy).collect();
    let cvs: Vec<f64> = summaries.iter().map(|s| s.c_avg_cv).collect();
    let mrcs: Vec<f64> = summaries.iter().map(|s| s.mrc).collect();
    Ok(CapabilityCorrelation {
        r_acc_cv: pearson(&acc, &cvs)?,
        r_acc_mrc: pearson(&acc, &mrcs)?,
    })
}

/// Mean in-domain ECE per dataset over models. Keys are `(model, dataset)`.
pub fn dataset_avg_in_domain_ece(runs: &BTreeMap<(String, String), f64>) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (f64, u64)> = BTreeMap::new();
    for ((_, dataset), v) in runs {
        let slot = acc.entry(dataset.clone()).or_insert((0.0, 0));
        slot.0 += v;
        slot.1 += 1;
    }
    acc.into_iter().map(|(d, (s, n))| (d, s / n as f64)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationConfig {
    pub threshold: u64,
    /// Extra thresholds for the robustness sweep.
    pub sweep: Vec<u64>,
    pub include_none_marker: bool,
    pub binning: EceBinning,
    pub coverage_floor: f64,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            sweep: Vec::new(),
            include_none_marker: false,
            binning: EceBinning::default(),
            coverage_floor: DEFAULT_COVERAGE_FLOOR,
        }
    }
}

/// Runs the four marker-analysis metrics at one threshold.
pub fn marker_analysis(
    tables: &Tables,
    accuracies: &BTreeMap<String, f64>,
    threshold: u64,
    include_none_marker: bool,
) -> (ThresholdMetrics, Vec<Marker>, MrcCounts, Vec<Skipped>) {
    let filtered = analysis_tables(tables, threshold, include_none_marker);
    let shared = shared_markers(&filtered);
    let mut skipped = Vec::new();
    let mut take = |metric: &str, r: Result<Averaged>| match r {
        Ok(a) => {
            skipped.extend(a.skipped);
            Some(a.value)
        }
        Err(e) => {
            skipped.push(skip(metric, "model", e));
            None
        }
    };
    let c = take("c_avg_cv", c_avg_cv(&filtered));
    let m = take("mac", mac(&filtered, accuracies));
    let i = take("i_avg_cv", i_avg_cv(&filtered));
    let mut counts = MrcCounts::default();
    let r = match mrc(&filtered) {
        Ok(res) => {
            counts = MrcCounts {
                enumerated: res.pairs_enumerated,
                used: res.pairs_used,
            };
            skipped.extend(res.skipped);
            Some(res.value)
        }
        Err(e) => {
            let n = filtered.len() as u64;
            counts.enumerated = n * n.saturating_sub(1) / 2;
            skipped.push(skip("mrc", "model", e));
            None
        }
    };
    let row = ThresholdMetrics {
        threshold,
        c_avg_cv: c,
        mac: m,
        mrc: r,
        i_avg_cv: i,
        markers_per_dataset: filtered.iter().map(|(d, t)| (d.clone(), t.len() as u64)).collect(),
        shared_markers: shared.len() as u64,
    };
    (row, shared, counts, skipped)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MrcCounts {
    pub enumerated: u64,
    pub used: u64,
}

fn diagnostics(records: &[ResponseRecord]) -> RecordDiagnostics {
    let mut d = RecordDiagnostics {
        records: records.len() as u64,
        ..Default::default()
    };
    for r in records {
        match &r.extracted_answer {
            None => d.unextracted += 1,
            Some(Answer::Invalid) => d.invalid_answers += 1,
            Some(Answer::Valid(_)) => {}
        }
        if r.marker.as_ref().is_some_and(Marker::is_none) {
            d.no_marker += 1;
        }
        if r.prompt_mode == PromptMode::Numeric && r.numeric_confidence.and_then(|c| c.value()).is_none() {
            d.invalid_numeric += 1;
        }
    }
    d
}

/// Computes the full report for the records of a single model.
pub fn evaluate_model(records: &[ResponseRecord], config: &EvaluationConfig) -> Result<MetricReport> {
    let Some(first) = records.first() else {
        return Err(Error::EmptyInput("records"));
    };
    let model_id = first.model_id.clone();
    if let Some(other) = records.iter().find(|r| r.model_id != model_id) {
        return Err(Error::MixedGroup {
            field: "model_id",
            first: model_id,
            other: other.model_id.clone(),
        });
    }

    let mut train: BTreeMap<String, Vec<ResponseRecord>> = BTreeMap::new();
    let mut test: BTreeMap<String, Vec<ResponseRecord>> = BTreeMap::new();
    let mut numeric: BTreeMap<String, Vec<ResponseRecord>> = BTreeMap::new();
    for r in records {
        let bucket = match (r.prompt_mode, r.split) {
            (PromptMode::Marker, Split::Train) => &mut train,
            (PromptMode::Marker, Split::Test) => &mut test,
            (PromptMode::Numeric, Split::Test) => &mut numeric,
            (PromptMode::Numeric, Split::Train) => continue,
        };
        bucket.entry(r.dataset_id.clone()).or_default().push(r.clone());
    }

    let mut skipped = Vec::new();
    let mut tables = Tables::new();
    let mut accuracies = BTreeMap::new();
    let all_datasets: BTreeSet<&String> = train.keys().chain(test.keys()).collect();
    for d in all_datasets {
        let (Some(tr), true) = (train.get(d), test.contains_key(d)) else {
            skipped.push(skip("all", d.as_str(), "needs marker-mode records in both train and test splits"));
            continue;
        };
        let outcomes: Vec<bool> = tr.iter().filter(|r| r.marker.is_some()).filter_map(|r| r.valid_outcome()).collect();
        if outcomes.is_empty() {
            skipped.push(skip("all", d.as_str(), "no valid training answers"));
            continue;
        }
        let hits = outcomes.iter().filter(|c| **c).count();
        accuracies.insert(d.clone(), hits as f64 / outcomes.len() as f64);
        tables.insert(d.clone(), marker_confidence_table(tr)?);
    }
    test.retain(|d, _| tables.contains_key(d));
    numeric.retain(|d, _| tables.contains_key(d));

    let grid = MetricGrid::build(tables, test, accuracies, numeric, config.binning)?;
    let mut warnings = Vec::new();
    let mut per_dataset_ece = Vec::new();
    let (mut covered_sum, mut total_sum) = (0u64, 0u64);
    for ((p, q), (covered, total)) in &grid.pair_coverage {
        let coverage = if *total > 0 { *covered as f64 / *total as f64 } else { 0.0 };
        covered_sum += covered;
        total_sum += total;
        if coverage < config.coverage_floor {
            let msg = format!(
                "transfer {p} -> {q}: coverage {coverage:.3} below floor {:.3}",
                config.coverage_floor
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
        if let Some(e) = grid.pair_errors.get(&(p.clone(), q.clone())) {
            skipped.push(skip("ece_mar", format!("{p}->{q}"), e));
        }
        per_dataset_ece.push(PairEce {
            train_dataset: p.clone(),
            test_dataset: q.clone(),
            ece: grid.ece_pairs.get(&(p.clone(), q.clone())).map(|t| t.ece),
            coverage,
            covered: *covered,
            total: *total,
        });
    }

    let mut opt = |metric: &str, r: Result<f64>| match r {
        Ok(v) => Some(v),
        Err(e) => {
            skipped.push(skip(metric, "model", e));
            None
        }
    };
    let i_avg = opt("i_avg_ece", i_avg_ece(&grid));
    let mut ordered_pairs = 0;
    let c_avg = opt(
        "c_avg_ece",
        c_avg_ece(&grid).map(|(v, n)| {
            ordered_pairs = n;
            v
        }),
    );
    let mut num_by_dataset = BTreeMap::new();
    let num = opt(
        "num_ece",
        num_ece(&grid).map(|(v, per)| {
            num_by_dataset = per;
            v
        }),
    );

    let (row, shared, mrc_counts, analysis_skipped) =
        marker_analysis(&grid.tables, &grid.accuracies, config.threshold, config.include_none_marker);
    skipped.extend(analysis_skipped);

    let mut thresholds: Vec<u64> = config.sweep.clone();
    thresholds.sort_unstable();
    thresholds.dedup();
    let threshold_sweep = thresholds
        .into_iter()
        .map(|t| marker_analysis(&grid.tables, &grid.accuracies, t, config.include_none_marker).0)
        .collect();

    let acc_values: Vec<f64> = grid.accuracies.values().copied().collect();
    Ok(MetricReport {
        model_id,
        threshold: config.threshold,
        include_none_marker: config.include_none_marker,
        ece_binning: config.binning,
        datasets: grid.datasets.clone(),
        mean_accuracy: mean(&acc_values).ok(),
        accuracies: grid.accuracies.clone(),
        i_avg_ece: i_avg,
        c_avg_ece: c_avg,
        num_ece: num,
        c_avg_cv: row.c_avg_cv,
        mac: row.mac,
        mrc: row.mrc,
        i_avg_cv: row.i_avg_cv,
        per_dataset_ece,
        num_ece_by_dataset: num_by_dataset,
        shared_markers: shared,
        coverage: (total_sum > 0).then(|| covered_sum as f64 / total_sum as f64),
        counters: PairCounters {
            ece_ordered_pairs: ordered_pairs,
            mrc_pairs_enumerated: mrc_counts.enumerated,
            mrc_pairs_used: mrc_counts.used,
        },
        skipped,
        warnings,
        threshold_sweep,
        diagnostics: diagnostics(records),
    })
}

/// Evaluates every model found in `records` and the cross-model analyses.
pub fn evaluate_all(records: &[ResponseRecord], config: &EvaluationConfig) -> Result<ReportBundle> {
    let mut by_model: BTreeMap<&str, Vec<ResponseRecord>> = BTreeMap::new();
    for r in records {
        by_model.entry(r.model_id.as_str()).or_default().push(r.clone());
    }
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for (model, recs) in by_model {
        match evaluate_model(&recs, config) {
            Ok(r) => reports.push(r),
            Err(e) => skipped.push(skip("model", model, e)),
        }
    }

    let summaries: Vec<ModelSummary> = reports
        .iter()
        .filter_map(|r| {
            Some(ModelSummary {
                model_id: r.model_id.clone(),
                mean_accuracy: r.mean_accuracy?,
                c_avg_cv: r.c_avg_cv?,
                mrc: r.mrc?,
            })
        })
        .collect();
    let capability = match capability_correlation(&summaries) {
        Ok(c) => Some(c),
        Err(e) => {
            skipped.push(skip("capability_correlation", "run", e));
            None
        }
    };

    let mut runs = BTreeMap::new();
    for r in &reports {
        for (d, v) in r.in_domain_ece() {
            runs.insert((r.model_id.clone(), d.to_string()), v);
        }
    }
    Ok(ReportBundle {
        dataset_in_domain_ece: dataset_avg_in_domain_ece(&runs),
        reports,
        capability,
        skipped,
    })
}
