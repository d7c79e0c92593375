//! Report and figure-data writers. Output is byte-deterministic for a given
//! input.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use epimark_core::figures::{heatmap_matrix, marker_diversity, ranking_table, MarkerSelection};
use epimark_core::metrics::{analysis_tables, Tables};
use epimark_core::report::ReportBundle;
use epimark_core::ResponseRecord;
use serde::Serialize;

use crate::error::Result;
use crate::jsonl::{write_atomic, write_json};

pub const METRICS_HEADER: [&str; 8] = ["model", "i_avg_ece", "c_avg_ece", "num_ece", "c_avg_cv", "mac", "mrc", "i_avg_cv"];

/// Written for undefined values and missing heatmap cells.
pub const MISSING: &str = "NA";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// A fraction as a percentage with two decimals.
pub fn percent(v: Option<f64>) -> String {
    v.map_or_else(|| MISSING.to_string(), |v| format!("{:.2}", v * 100.0))
}

fn plain(v: Option<f64>) -> String {
    v.map_or_else(|| MISSING.to_string(), |v| v.to_string())
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Invalid(e.to_string()))?;
    write_atomic(path, |f| {
        std::io::Write::write_all(f, &bytes)?;
        Ok(())
    })
}

/// One row per model in the seven-metric layout.
pub fn metrics_csv(bundle: &ReportBundle) -> Vec<Vec<String>> {
    bundle
        .reports
        .iter()
        .map(|r| {
            let mut row = vec![r.model_id.clone()];
            row.extend(r.headline().iter().map(|(_, v)| percent(*v)));
            row
        })
        .collect()
}

/// Writes the report in `formats` under `dir`; returns the files written.
pub fn emit_report(bundle: &ReportBundle, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if formats.contains(&Format::Json) {
        let p = dir.join("report.json");
        write_json(&p, bundle)?;
        written.push(p);
    }
    if formats.contains(&Format::Csv) {
        let p = dir.join("metrics.csv");
        write_csv(&p, &METRICS_HEADER, metrics_csv(bundle))?;
        written.push(p);

        let p = dir.join("threshold_sweep.csv");
        let rows = bundle.reports.iter().flat_map(|r| {
            r.threshold_sweep.iter().map(move |t| {
                vec![
                    r.model_id.clone(),
                    t.threshold.to_string(),
                    percent(t.c_avg_cv),
                    percent(t.mac),
                    percent(t.mrc),
                    percent(t.i_avg_cv),
                    t.shared_markers.to_string(),
                ]
            })
        });
        write_csv(&p, &["model", "threshold", "c_avg_cv", "mac", "mrc", "i_avg_cv", "shared_markers"], rows)?;
        written.push(p);

        let p = dir.join("transfer_ece.csv");
        let rows = bundle.reports.iter().flat_map(|r| {
            r.per_dataset_ece.iter().map(move |e| {
                vec![
                    r.model_id.clone(),
                    e.train_dataset.clone(),
                    e.test_dataset.clone(),
                    percent(e.ece),
                    plain(Some(e.coverage)),
                    e.covered.to_string(),
                    e.total.to_string(),
                ]
            })
        });
        write_csv(&p, &["model", "train_dataset", "test_dataset", "ece", "coverage", "covered", "total"], rows)?;
        written.push(p);

        let p = dir.join("dataset_ece.csv");
        let rows = bundle
            .dataset_in_domain_ece
            .iter()
            .map(|(d, v)| vec![d.clone(), percent(Some(*v))]);
        write_csv(&p, &["dataset", "avg_in_domain_ece"], rows)?;
        written.push(p);

        if let Some(c) = bundle.capability {
            let p = dir.join("capability.csv");
            write_csv(&p, &["r_acc_cv", "r_acc_mrc"], [vec![c.r_acc_cv.to_string(), c.r_acc_mrc.to_string()]])?;
            written.push(p);
        }
    }
    Ok(written)
}

fn file_safe(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}

#[derive(Serialize)]
struct FigureIndex<'a> {
    selection: &'a MarkerSelection,
    threshold: u64,
    files: Vec<String>,
}

/// Heatmap, ranking and diversity CSVs from per-model training tables.
pub fn emit_figures(
    tables: &BTreeMap<String, Tables>,
    records: &[ResponseRecord],
    selection: &MarkerSelection,
    threshold: u64,
    include_none_marker: bool,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (model, model_tables) in tables {
        let filtered = analysis_tables(model_tables, threshold, include_none_marker);
        let h = heatmap_matrix(&filtered, selection);
        let p = dir.join(format!("heatmap_{}.csv", file_safe(model)));
        let mut header = vec!["marker"];
        header.extend(h.datasets.iter().map(String::as_str));
        let rows = h.markers.iter().zip(&h.cells).map(|(m, cells)| {
            let mut row = vec![m.as_str().to_string()];
            row.extend(cells.iter().map(|c| plain(*c)));
            row
        });
        write_csv(&p, &header, rows)?;
        written.push(p);

        let p = dir.join(format!("rankings_{}.csv", file_safe(model)));
        let rows = ranking_table(&filtered).into_iter().flat_map(|(d, ranked)| {
            ranked
                .into_iter()
                .map(move |r| vec![d.clone(), r.rank.to_string(), r.marker.as_str().to_string(), r.confidence.to_string()])
        });
        write_csv(&p, &["dataset", "rank", "marker", "confidence"], rows)?;
        written.push(p);
    }
    let p = dir.join("diversity.csv");
    let rows = marker_diversity(records, include_none_marker)
        .into_iter()
        .map(|((m, d), n)| vec![m, d, n.to_string()]);
    write_csv(&p, &["model", "dataset", "distinct_markers"], rows)?;
    written.push(p);

    let index = FigureIndex {
        selection,
        threshold,
        files: written
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
    };
    let p = dir.join("figures.json");
    write_json(&p, &index)?;
    written.push(p);
    Ok(written)
}
