//! Numeric confidence extraction.

use alloc::vec::Vec;

use crate::model::NumericConfidence;

const CUES: &[&str] = &["confidence", "confident", "certainty", "score", "sure"];

#[derive(Debug, Clone, Copy, PartialEq)]
struct Found {
    value: f64,
    start: usize,
    end: usize,
}

fn scan_number(bytes: &[u8], start: usize) -> Option<(f64, usize)> {
    let mut i = start;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i == start {
        return None;
    }
    if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
    }
    let text = core::str::from_utf8(&bytes[start..i]).ok()?;
    Some((text.parse().ok()?, i))
}

/// Numbers in `raw`, with `a-b` and `a to b` ranges collapsed to midpoints.
fn numbers(raw: &str) -> Vec<Found> {
    let bytes = raw.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let glued = i > 0 && (bytes[i - 1].is_ascii_alphanumeric() || bytes[i - 1] == b'.');
        if !bytes[i].is_ascii_digit() || glued {
            i += 1;
            continue;
        }
        let Some((value, end)) = scan_number(bytes, i) else {
            i += 1;
            continue;
        };
        let mut found = Found { value, start: i, end };
        let rest = &raw[end..];
        let trimmed = rest.trim_start();
        let sep_len = if let Some(r) = trimmed.strip_prefix('-') {
            Some(rest.len() - r.len())
        } else if let Some(r) = trimmed.strip_prefix('\u{2013}') {
            Some(rest.len() - r.len())
        } else {
            trimmed.strip_prefix("to ").map(|r| rest.len() - r.len())
        };
        if let Some(sep) = sep_len {
            let after = end + sep;
            let skip = raw[after..].len() - raw[after..].trim_start().len();
            if let Some((hi, hi_end)) = scan_number(bytes, after + skip) {
                found = Found {
                    value: (value + hi) / 2.0,
                    start: i,
                    end: hi_end,
                };
            }
        }
        i = found.end;
        out.push(found);
    }
    out
}

/// Whether the number at `f` is flagged as a confidence by nearby text:
/// a trailing `%` or `/100`, or a cue word shortly before it.
fn cued(raw: &str, f: &Found) -> bool {
    let after = raw[f.end..].trim_start();
    if after.starts_with('%') || after.starts_with("/100") || after.starts_with("out of 100") {
        return true;
    }
    let window_start = raw[..f.start]
        .char_indices()
        .rev()
        .nth(24)
        .map_or(0, |(i, _)| i);
    let before = raw[window_start..f.start].to_lowercase();
    CUES.iter().any(|c| before.contains(c))
}

/// Extracts a confidence in `[0, 1]` from a numeric-mode response.
///
/// A number marked as a confidence (percent sign, `/100`, or a preceding cue
/// word such as "confidence") is preferred; otherwise the first number in
/// `[0, 100]` is used. Ranges take their midpoint. Values are divided by 100.
pub fn extract_numeric_confidence(raw: &str) -> NumericConfidence {
    let found: Vec<Found> = numbers(raw)
        .into_iter()
        .filter(|f| (0.0..=100.0).contains(&f.value))
        .collect();
    let pick = found.iter().find(|f| cued(raw, f)).or_else(|| found.first());
    match pick {
        Some(f) => NumericConfidence::Value(f.value / 100.0),
        None => NumericConfidence::Invalid,
    }
}
