//! JSON-Lines reading and writing with per-line error collection.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use epimark_core::{QaItem, ResponseRecord};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A line that failed to decode. `line` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
    pub content: String,
}

/// Decoded values plus the lines that did not decode.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded<T> {
    pub values: Vec<T>,
    pub errors: Vec<LineError>,
}

impl<T> Decoded<T> {
    /// Fails with the first line error, if any.
    pub fn strict(self, path: &Path) -> Result<Vec<T>> {
        match self.errors.into_iter().next() {
            Some(e) => Err(Error::Line {
                path: path.to_path_buf(),
                line: e.line,
                message: e.message,
            }),
            None => Ok(self.values),
        }
    }
}

/// Decodes JSON-Lines text. Blank lines are skipped; a bad line is recorded
/// and decoding continues.
pub fn decode<T: DeserializeOwned>(reader: impl BufRead) -> Result<Decoded<T>> {
    let mut out = Decoded {
        values: Vec::new(),
        errors: Vec::new(),
    };
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(v) => out.values.push(v),
            Err(e) => out.errors.push(LineError {
                line: i + 1,
                message: e.to_string(),
                content: line,
            }),
        }
    }
    Ok(out)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Decoded<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    decode(BufReader::new(file))
}

/// Writes `values` one per line, atomically replacing `path`.
pub fn write_jsonl<'a, T: Serialize + 'a>(path: &Path, values: impl IntoIterator<Item = &'a T>) -> Result<()> {
    write_atomic(path, |w| {
        for v in values {
            serde_json::to_writer(&mut *w, v)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

/// Path of the error sidecar written next to `path`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".errors.jsonl");
    path.with_file_name(name)
}

/// Reads response records. Bad lines are logged and, if any, written to the
/// sidecar file so the run can continue.
pub fn read_records(path: &Path) -> Result<Decoded<ResponseRecord>> {
    let decoded: Decoded<ResponseRecord> = read_jsonl(path)?;
    if !decoded.errors.is_empty() {
        log::warn!("{}: {} malformed line(s)", path.display(), decoded.errors.len());
        let sidecar = sidecar_path(path);
        if let Err(e) = write_jsonl(&sidecar, &decoded.errors) {
            log::warn!("could not write {}: {e}", sidecar.display());
        }
    }
    Ok(decoded)
}

pub fn write_records(path: &Path, records: &[ResponseRecord]) -> Result<()> {
    write_jsonl(path, records)
}

pub fn read_items(path: &Path) -> Result<Vec<QaItem>> {
    read_jsonl(path)?.strict(path)
}

pub fn write_items(path: &Path, items: &[QaItem]) -> Result<()> {
    write_jsonl(path, items)
}

/// Writes through a temporary file in the target directory, then renames it
/// into place.
pub fn write_atomic(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        path.file_name().unwrap_or_default().to_string_lossy(),
        std::process::id()
    ));
    let file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    let mut w = BufWriter::new(file);
    let written = body(&mut w).and_then(|()| {
        let file = w.into_inner().map_err(|e| e.into_error())?;
        file.sync_all()?;
        Ok(())
    });
    if let Err(e) = written {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
