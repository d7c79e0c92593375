//! Rule-based marker extraction against a hedging lexicon.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::model::Marker;
use crate::{Error, Result};

/// Lexicon shipped with the crate.
pub const BUILTIN_LEXICON: &str = include_str!("../../data/hedging_lexicon.txt");

/// Hedging vocabulary. A marker is `[negation] modifier* head` or a fixed
/// phrase.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    pub version: u32,
    pub heads: BTreeSet<String>,
    pub modifiers: BTreeSet<String>,
    pub negations: BTreeSet<String>,
    pub phrases: Vec<Vec<String>>,
}

#[derive(Clone, Copy)]
enum Section {
    Heads,
    Modifiers,
    Negations,
    Phrases,
}

impl Lexicon {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_LEXICON).expect("builtin lexicon parses")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lex = Lexicon::default();
        let mut section = None;
        let mut saw_version = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: &str| Error::Lexicon {
                line: line_no,
                reason: reason.to_string(),
            };
            if let Some(v) = line.strip_prefix("version ") {
                lex.version = v.trim().parse().map_err(|_| err("bad version number"))?;
                saw_version = true;
                continue;
            }
            if line.starts_with('[') {
                section = Some(match line {
                    "[heads]" => Section::Heads,
                    "[modifiers]" => Section::Modifiers,
                    "[negations]" => Section::Negations,
                    "[phrases]" => Section::Phrases,
                    _ => return Err(err("unknown section")),
                });
                continue;
            }
            let words: Vec<String> = line.split_whitespace().map(str::to_lowercase).collect();
            match section {
                None => return Err(err("entry before any section")),
                Some(Section::Phrases) => lex.phrases.push(words),
                Some(s) => {
                    let [word] = words.as_slice() else {
                        return Err(err("single-word section holds several words"));
                    };
                    let set = match s {
                        Section::Heads => &mut lex.heads,
                        Section::Modifiers => &mut lex.modifiers,
                        _ => &mut lex.negations,
                    };
                    set.insert(word.clone());
                }
            }
        }
        if !saw_version {
            return Err(Error::Lexicon {
                line: 0,
                reason: "missing version line".into(),
            });
        }
        Ok(lex)
    }

    /// Length in tokens of the longest match starting at `tokens[start]`.
    fn match_at(&self, tokens: &[String], start: usize) -> Option<usize> {
        let mut best = None;
        for phrase in &self.phrases {
            if tokens.len() >= start + phrase.len() && tokens[start..start + phrase.len()] == phrase[..] {
                best = best.max(Some(phrase.len()));
            }
        }
        let mut i = start;
        if tokens.get(i).is_some_and(|t| self.negations.contains(t)) {
            i += 1;
        }
        while tokens.get(i).is_some_and(|t| self.modifiers.contains(t)) {
            i += 1;
        }
        if tokens.get(i).is_some_and(|t| self.heads.contains(t)) {
            best = best.max(Some(i + 1 - start));
        }
        best
    }

    /// Every non-overlapping hedge in `raw`, in order of appearance.
    pub fn find_all(&self, raw: &str) -> Vec<Marker> {
        let tokens = tokenize(raw);
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            if let Some(len) = self.match_at(&tokens, i) {
                out.push(Marker::normalize(&tokens[i..i + len].join(" ")));
                i += len;
            } else {
                i += 1;
            }
        }
        out
    }
}

fn tokenize(raw: &str) -> Vec<String> {
    raw.split(|c: char| c.is_whitespace() || matches!(c, ',' | ';' | ':' | '(' | ')' | '"' | '*'))
        .map(|t| {
            t.replace('\u{2019}', "'")
                .to_lowercase()
                .trim_matches(|c: char| !(c.is_alphanumeric() || c == '%' || c == '\''))
                .trim_matches('\'')
                .to_string()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

/// Result of rule-based marker extraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkerMatch {
    /// The first hedge, or the sentinel.
    pub marker: Marker,
    /// Further distinct hedges that were ignored.
    pub extra: Vec<Marker>,
}

impl MarkerMatch {
    pub fn had_multiple(&self) -> bool {
        !self.extra.is_empty()
    }
}

/// Takes the first hedge by position; later distinct hedges go to `extra`.
pub fn extract_marker_rule_based(raw: &str, lexicon: &Lexicon) -> MarkerMatch {
    let mut all = lexicon.find_all(raw).into_iter();
    let Some(marker) = all.next() else {
        return MarkerMatch {
            marker: Marker::none(),
            extra: Vec::new(),
        };
    };
    let mut extra: Vec<Marker> = Vec::new();
    for m in all {
        if m != marker && !extra.contains(&m) {
            extra.push(m);
        }
    }
    MarkerMatch { marker, extra }
}
