//! Extraction and evaluation over files.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use epimark_core::extract::{extract_record, ExtractionStats, Lexicon, MarkerModel, StrategyKind};
use epimark_core::metrics::Tables;
use epimark_core::table::marker_confidence_table;
use epimark_core::{PromptMode, QaItem, ResponseRecord, Split};

use crate::error::{Error, Result};
use crate::jsonl::{read_records, Decoded};

type ItemKey = (String, Split, String);

fn key(dataset: &str, split: Split, item_id: &str) -> ItemKey {
    (dataset.to_string(), split, item_id.to_string())
}

/// Items indexed by their record reference.
pub struct ItemIndex(HashMap<ItemKey, QaItem>);

impl ItemIndex {
    pub fn new(items: impl IntoIterator<Item = QaItem>) -> Self {
        Self(
            items
                .into_iter()
                .map(|i| (key(&i.dataset_id, i.split, &i.item_id), i))
                .collect(),
        )
    }

    pub fn get(&self, r: &ResponseRecord) -> Option<&QaItem> {
        self.0.get(&key(&r.dataset_id, r.split, &r.item_id))
    }
}

/// Fills the extracted fields of every raw record. A record whose item is
/// unknown is a data error.
pub fn extract_all<M: MarkerModel>(
    records: &mut [ResponseRecord],
    items: &ItemIndex,
    strategy: StrategyKind,
    lexicon: &Lexicon,
    mut model: Option<&mut M>,
) -> std::result::Result<ExtractionStats, ExtractFailure<M::Error>> {
    let mut stats = ExtractionStats::default();
    for r in records.iter_mut() {
        let item = items.get(r).ok_or_else(|| {
            ExtractFailure::Data(Error::Invalid(format!(
                "record {}/{}/{} references an unknown item",
                r.dataset_id,
                r.split.as_str(),
                r.item_id
            )))
        })?;
        extract_record(r, item, strategy, lexicon, model.as_deref_mut(), &mut stats).map_err(ExtractFailure::Model)?;
    }
    Ok(stats)
}

#[derive(Debug)]
pub enum ExtractFailure<E> {
    Data(Error),
    Model(E),
}

/// Every `*.jsonl` file under `dir`, sorted, skipping error sidecars.
pub fn record_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::Invalid(e.to_string()))?;
        let name = entry.file_name().to_string_lossy();
        if entry.file_type().is_file() && name.ends_with(".jsonl") && !name.ends_with(".errors.jsonl") {
            files.push(entry.into_path());
        }
    }
    Ok(files)
}

/// Loads every record under `dir`; malformed lines go to sidecars.
pub fn load_records_dir(dir: &Path) -> Result<Decoded<ResponseRecord>> {
    let mut all = Decoded {
        values: Vec::new(),
        errors: Vec::new(),
    };
    for file in record_files(dir)? {
        let d = read_records(&file)?;
        all.values.extend(d.values);
        all.errors.extend(d.errors);
    }
    Ok(all)
}

/// Unfiltered training-split confidence tables per model and dataset.
pub fn train_tables(records: &[ResponseRecord]) -> Result<BTreeMap<String, Tables>> {
    let mut groups: BTreeMap<(&str, &str), Vec<ResponseRecord>> = BTreeMap::new();
    for r in records
        .iter()
        .filter(|r| r.prompt_mode == PromptMode::Marker && r.split == Split::Train)
    {
        groups.entry((&r.model_id, &r.dataset_id)).or_default().push(r.clone());
    }
    let mut out: BTreeMap<String, Tables> = BTreeMap::new();
    for ((model, dataset), recs) in groups {
        out.entry(model.to_string())
            .or_default()
            .insert(dataset.to_string(), marker_confidence_table(&recs)?);
    }
    Ok(out)
}
