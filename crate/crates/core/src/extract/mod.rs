//! Structured fields from raw responses: answer, epistemic marker and
//! numeric confidence.

mod answer;
mod lexicon;
mod numeric;

use core::fmt;
use core::str::FromStr;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{Answer, Marker, NumericConfidence, PromptMode, QaItem, ResponseRecord};
use crate::prompt::extraction_prompt;

pub use answer::extract_answer;
pub use lexicon::{extract_marker_rule_based, Lexicon, MarkerMatch, BUILTIN_LEXICON};
pub use numeric::extract_numeric_confidence;

/// Applies the core-model marker normalization. Idempotent; text that is
/// empty after stripping yields the sentinel.
pub fn normalize_marker(text: &str) -> Marker {
    Marker::normalize(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    #[default]
    RuleBased,
    LlmAssisted,
    /// Rule-based first; the extractor model is asked only when no lexicon
    /// entry matches.
    Hybrid,
}

impl StrategyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::RuleBased => "rule_based",
            StrategyKind::LlmAssisted => "llm_assisted",
            StrategyKind::Hybrid => "hybrid",
        }
    }

    pub fn uses_model(self) -> bool {
        self != StrategyKind::RuleBased
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rule_based" => Ok(StrategyKind::RuleBased),
            "llm_assisted" => Ok(StrategyKind::LlmAssisted),
            "hybrid" => Ok(StrategyKind::Hybrid),
            _ => Err(alloc::format!("unknown strategy `{s}` (rule_based, llm_assisted or hybrid)")),
        }
    }
}

/// Something that can answer an extraction prompt, usually a chat endpoint.
pub trait MarkerModel {
    type Error;

    fn complete(&mut self, prompt: &str) -> Result<String, Self::Error>;
}

/// Turns the extractor model's reply into a marker.
pub fn parse_extractor_output(output: &str) -> Marker {
    let line = output.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    let line = line
        .strip_prefix("Marker:")
        .or_else(|| line.strip_prefix("marker:"))
        .unwrap_or(line)
        .trim()
        .trim_matches(|c| matches!(c, '"' | '\'' | '`'));
    if line.eq_ignore_ascii_case("no_marker") || line.eq_ignore_ascii_case("none") {
        return Marker::none();
    }
    Marker::normalize(line)
}

/// Which path produced a marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkerSource {
    Lexicon,
    Model,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkerExtraction {
    pub marker: Marker,
    pub extra: Vec<Marker>,
    pub source: MarkerSource,
}

/// Extracts the marker of a marker-mode response under `strategy`.
///
/// `model` is only consulted for [`StrategyKind::LlmAssisted`] and for
/// [`StrategyKind::Hybrid`] when the lexicon finds nothing; with `None` both
/// degrade to the rule-based result.
pub fn extract_marker<M: MarkerModel>(
    raw: &str,
    strategy: StrategyKind,
    lexicon: &Lexicon,
    model: Option<&mut M>,
) -> Result<MarkerExtraction, M::Error> {
    let rule = extract_marker_rule_based(raw, lexicon);
    let ask = match strategy {
        StrategyKind::RuleBased => false,
        StrategyKind::LlmAssisted => true,
        StrategyKind::Hybrid => rule.marker.is_none(),
    };
    if let (true, Some(model)) = (ask, model) {
        let reply = model.complete(&extraction_prompt(raw))?;
        return Ok(MarkerExtraction {
            marker: parse_extractor_output(&reply),
            extra: Vec::new(),
            source: MarkerSource::Model,
        });
    }
    Ok(MarkerExtraction {
        marker: rule.marker,
        extra: rule.extra,
        source: MarkerSource::Lexicon,
    })
}

/// Counts gathered while extracting a batch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionStats {
    pub records: u64,
    pub invalid_answers: u64,
    pub no_marker: u64,
    pub multiple_markers: u64,
    pub model_markers: u64,
    pub invalid_numeric: u64,
}

/// Fills the answer, correctness and confidence channel of `record`.
pub fn extract_record<M: MarkerModel>(
    record: &mut ResponseRecord,
    item: &QaItem,
    strategy: StrategyKind,
    lexicon: &Lexicon,
    model: Option<&mut M>,
    stats: &mut ExtractionStats,
) -> Result<(), M::Error> {
    stats.records += 1;
    let answer = extract_answer(&record.raw_response, item);
    record.correct = answer.as_valid().map(|a| item.is_correct(a));
    if answer == Answer::Invalid {
        stats.invalid_answers += 1;
    }
    record.extracted_answer = Some(answer);
    match record.prompt_mode {
        PromptMode::Marker => {
            let m = extract_marker(&record.raw_response, strategy, lexicon, model)?;
            stats.no_marker += u64::from(m.marker.is_none());
            stats.multiple_markers += u64::from(!m.extra.is_empty());
            stats.model_markers += u64::from(m.source == MarkerSource::Model);
            if !m.extra.is_empty() {
                log::debug!("{}: ignored extra markers {:?}", record.item_id, m.extra);
            }
            record.marker = Some(m.marker);
            record.numeric_confidence = None;
        }
        PromptMode::Numeric => {
            let c = extract_numeric_confidence(&record.raw_response);
            stats.invalid_numeric += u64::from(c == NumericConfidence::Invalid);
            record.numeric_confidence = Some(c);
            record.marker = None;
        }
    }
    Ok(())
}

/// A [`MarkerModel`] that is never available; lets rule-based callers name
/// the type parameter.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoModel;

impl MarkerModel for NoModel {
    type Error = core::convert::Infallible;

    fn complete(&mut self, _prompt: &str) -> Result<String, Self::Error> {
        Ok(String::new())
    }
}
