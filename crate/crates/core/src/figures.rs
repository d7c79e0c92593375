//! Figure-ready data: confidence heatmaps, marker rankings and marker
//! diversity counts.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::metrics::{shared_markers, Tables};
use crate::model::{Marker, PromptMode, ResponseRecord};
use crate::stats::average_ranks;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MarkerSelection {
    /// Every marker seen in any table.
    All,
    /// Markers present in every table.
    Shared,
    Explicit(Vec<Marker>),
    /// A seeded uniform sample of the shared markers.
    RandomShared { count: usize, seed: u64 },
}

/// Markers x datasets matrix of confidences; `None` where a marker is absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapMatrix {
    pub markers: Vec<Marker>,
    pub datasets: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
}

pub fn heatmap_matrix(tables: &Tables, selection: &MarkerSelection) -> HeatmapMatrix {
    let markers: Vec<Marker> = match selection {
        MarkerSelection::All => {
            let all: BTreeSet<&Marker> = tables.values().flat_map(|t| t.markers()).collect();
            all.into_iter().cloned().collect()
        }
        MarkerSelection::Shared => shared_markers(tables),
        MarkerSelection::Explicit(list) => list.clone(),
        MarkerSelection::RandomShared { count, seed } => {
            let mut shared = shared_markers(tables);
            shared.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed));
            shared.truncate(*count);
            shared.sort();
            shared
        }
    };
    let datasets: Vec<String> = tables.keys().cloned().collect();
    let cells = markers
        .iter()
        .map(|m| tables.values().map(|t| t.confidence(m)).collect())
        .collect();
    HeatmapMatrix {
        markers,
        datasets,
        cells,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedMarker {
    pub marker: Marker,
    pub confidence: f64,
    /// 1 is the most confident marker; ties share the average rank.
    pub rank: f64,
}

/// Per dataset, markers by descending confidence with average ranks.
pub fn ranking_table(tables: &Tables) -> BTreeMap<String, Vec<RankedMarker>> {
    tables
        .iter()
        .map(|(d, t)| {
            let entries: Vec<(&Marker, f64)> = t.entries.iter().map(|(m, s)| (m, s.confidence)).collect();
            let values: Vec<f64> = entries.iter().map(|(_, c)| *c).collect();
            let k = values.len() as f64;
            let ascending = average_ranks(&values);
            let mut ranked: Vec<RankedMarker> = entries
                .iter()
                .zip(ascending)
                .map(|((m, c), r)| RankedMarker {
                    marker: (*m).clone(),
                    confidence: *c,
                    rank: k + 1.0 - r,
                })
                .collect();
            ranked.sort_by(|a, b| {
                a.rank
                    .partial_cmp(&b.rank)
                    .unwrap_or(core::cmp::Ordering::Equal)
                    .then_with(|| a.marker.cmp(&b.marker))
            });
            (d.clone(), ranked)
        })
        .collect()
}

/// Distinct markers per `(model, dataset)` over marker-mode records.
pub fn marker_diversity(records: &[ResponseRecord], include_none_marker: bool) -> BTreeMap<(String, String), usize> {
    let mut sets: BTreeMap<(String, String), BTreeSet<&Marker>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.prompt_mode == PromptMode::Marker) {
        let set = sets.entry((r.model_id.clone(), r.dataset_id.clone())).or_default();
        if let Some(m) = &r.marker {
            if include_none_marker || !m.is_none() {
                set.insert(m);
            }
        }
    }
    sets.into_iter().map(|(k, s)| (k, s.len())).collect()
}
