//! Marker-confidence tables.

use alloc::collections::BTreeMap;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::model::{Marker, PromptMode, ResponseRecord, Split};
use crate::stats::{binomial_interval, Interval};
use crate::{Error, Result};

/// Confidence level of the per-marker Wilson interval.
pub const INTERVAL_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkerStats {
    pub count: u64,
    pub correct: u64,
    pub confidence: f64,
    pub interval: Interval,
}

impl MarkerStats {
    pub fn from_counts(correct: u64, count: u64, level: f64) -> Result<Self> {
        let interval = binomial_interval(correct, count, level)?;
        Ok(Self {
            count,
            correct,
            confidence: correct as f64 / count as f64,
            interval,
        })
    }
}

/// Per-marker accuracy for one (dataset, model, split).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceTable {
    pub dataset_id: String,
    pub model_id: String,
    pub split: Split,
    pub entries: BTreeMap<Marker, MarkerStats>,
}

impl ConfidenceTable {
    pub fn empty(dataset_id: impl Into<String>, model_id: impl Into<String>, split: Split) -> Self {
        Self {
            dataset_id: dataset_id.into(),
            model_id: model_id.into(),
            split,
            entries: BTreeMap::new(),
        }
    }

    pub fn confidence(&self, marker: &Marker) -> Option<f64> {
        self.entries.get(marker).map(|s| s.confidence)
    }

    pub fn total_count(&self) -> u64 {
        self.entries.values().map(|s| s.count).sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn markers(&self) -> impl Iterator<Item = &Marker> {
        self.entries.keys()
    }

    /// Keeps exactly the markers seen at least `threshold` times.
    pub fn filter_by_count(&self, threshold: u64) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .filter(|(_, s)| s.count >= threshold)
                .map(|(m, s)| (m.clone(), *s))
                .collect(),
            ..self.clone_header()
        }
    }

    pub fn without_none_marker(&self) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .filter(|(m, _)| !m.is_none())
                .map(|(m, s)| (m.clone(), *s))
                .collect(),
            ..self.clone_header()
        }
    }

    fn clone_header(&self) -> Self {
        Self::empty(self.dataset_id.clone(), self.model_id.clone(), self.split)
    }
}

pub fn filter_by_count(table: &ConfidenceTable, threshold: u64) -> ConfidenceTable {
    table.filter_by_count(threshold)
}

/// Builds the marker-confidence table from marker-mode records of a single
/// (dataset, model, split). Records without a marker or a valid answer are
/// not counted.
pub fn marker_confidence_table(records: &[ResponseRecord]) -> Result<ConfidenceTable> {
    marker_confidence_table_at(records, INTERVAL_LEVEL)
}

pub fn marker_confidence_table_at(records: &[ResponseRecord], level: f64) -> Result<ConfidenceTable> {
    let Some(first) = records.first() else {
        return Ok(ConfidenceTable::empty("", "", Split::Train));
    };
    let mut counts: BTreeMap<Marker, (u64, u64)> = BTreeMap::new();
    for r in records {
        if r.prompt_mode != PromptMode::Marker {
            return Err(Error::NotMarkerMode {
                item_id: r.item_id.clone(),
            });
        }
        for (field, a, b) in [
            ("dataset_id", &first.dataset_id, &r.dataset_id),
            ("model_id", &first.model_id, &r.model_id),
        ] {
            if a != b {
                return Err(Error::MixedGroup {
                    field,
                    first: a.clone(),
                    other: b.clone(),
                });
            }
        }
        if r.split != first.split {
            return Err(Error::MixedGroup {
                field: "split",
                first: first.split.as_str().into(),
                other: r.split.as_str().into(),
            });
        }
        let (Some(marker), Some(correct)) = (&r.marker, r.valid_outcome()) else {
            continue;
        };
        let slot = counts.entry(marker.clone()).or_default();
        slot.0 += 1;
        slot.1 += u64::from(correct);
    }

    let mut table = ConfidenceTable::empty(first.dataset_id.clone(), first.model_id.clone(), first.split);
    for (marker, (count, correct)) in counts {
        table
            .entries
            .insert(marker, MarkerStats::from_counts(correct, count, level)?);
    }
    Ok(table)
}
