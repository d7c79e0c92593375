//! Run directory layout and manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;
use crate::jsonl::{read_json, write_json};

/// `items/`, `raw/` (with the completion cache in `raw/cache/`), `records/`,
/// `tables/` and `reports/`, plus `manifest.json`.
#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    /// Last invocation of each subcommand with its resolved settings.
    pub steps: BTreeMap<String, Value>,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn items(&self) -> PathBuf {
        self.root.join("items")
    }

    pub fn raw(&self) -> PathBuf {
        self.root.join("raw")
    }

    pub fn cache(&self) -> PathBuf {
        self.raw().join("cache")
    }

    pub fn records(&self) -> PathBuf {
        self.root.join("records")
    }

    pub fn tables(&self) -> PathBuf {
        self.root.join("tables")
    }

    pub fn reports(&self) -> PathBuf {
        self.root.join("reports")
    }

    fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn manifest(&self) -> Result<Manifest> {
        let p = self.manifest_path();
        if p.exists() {
            read_json(&p)
        } else {
            Ok(Manifest {
                tool_version: env!("CARGO_PKG_VERSION").into(),
                steps: BTreeMap::new(),
            })
        }
    }

    /// Records `step` in the manifest, replacing an earlier entry.
    pub fn record_step(&self, step: &str, details: Value) -> Result<()> {
        let mut m = self.manifest()?;
        m.tool_version = env!("CARGO_PKG_VERSION").into();
        m.steps.insert(step.to_string(), details);
        write_json(&self.manifest_path(), &m)
    }
}
