//! Shared data model: questions, responses, markers and record validation.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Wire token for the "no marker" sentinel.
pub const NO_MARKER: &str = "NO_MARKER";
/// Wire token for a failed answer or confidence extraction.
pub const INVALID: &str = "INVALID";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptMode {
    Marker,
    Numeric,
}

impl PromptMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PromptMode::Marker => "marker",
            PromptMode::Numeric => "numeric",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionType {
    Binary,
    MultipleChoice,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerOption {
    pub letter: String,
    pub text: String,
}

impl AnswerOption {
    pub fn new(letter: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            letter: letter.into(),
            text: text.into(),
        }
    }
}

/// One benchmark question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaItem {
    pub dataset_id: String,
    pub split: Split,
    pub item_id: String,
    pub question_type: QuestionType,
    pub question_text: String,
    pub options: Vec<AnswerOption>,
    /// `"yes"`/`"no"` for binary items, an option letter otherwise.
    pub gold_answer: String,
}

impl QaItem {
    /// Checks the item invariants, returning the first violation.
    pub fn validate(&self) -> Result<(), String> {
        match self.question_type {
            QuestionType::Binary => {
                if !self.options.is_empty() {
                    return Err("binary item carries options".into());
                }
                if self.gold_answer != "yes" && self.gold_answer != "no" {
                    return Err(alloc::format!(
                        "binary gold answer `{}` is not yes/no",
                        self.gold_answer
                    ));
                }
            }
            QuestionType::MultipleChoice => {
                if self.options.len() < 2 {
                    return Err("multiple-choice item needs at least two options".into());
                }
                let mut letters: Vec<&str> = self.options.iter().map(|o| o.letter.as_str()).collect();
                letters.sort_unstable();
                letters.dedup();
                if letters.len() != self.options.len() {
                    return Err("duplicate option letters".into());
                }
                if !self.options.iter().any(|o| o.letter == self.gold_answer) {
                    return Err(alloc::format!(
                        "gold answer `{}` is not an option letter",
                        self.gold_answer
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn option_letters(&self) -> impl Iterator<Item = &str> {
        self.options.iter().map(|o| o.letter.as_str())
    }

    /// Case-insensitive comparison against the gold answer.
    pub fn is_correct(&self, answer: &str) -> bool {
        answer.trim().eq_ignore_ascii_case(self.gold_answer.trim())
    }
}

/// A normalized epistemic marker, or the sentinel for responses without one.
///
/// Normalization lower-cases, strips leading and trailing punctuation and
/// collapses internal whitespace. It is idempotent; an input that normalizes
/// to the empty string becomes the sentinel.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Marker {
    // empty string encodes the sentinel
    canonical: String,
}

impl Marker {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn normalize(text: &str) -> Self {
        let lowered = text.to_lowercase();
        let stripped = lowered.trim_matches(|c: char| !c.is_alphanumeric());
        let mut canonical = String::with_capacity(stripped.len());
        for (i, word) in stripped.split_whitespace().enumerate() {
            if i > 0 {
                canonical.push(' ');
            }
            canonical.push_str(word);
        }
        Self { canonical }
    }

    pub fn is_none(&self) -> bool {
        self.canonical.is_empty()
    }

    /// Canonical text; empty for the sentinel.
    pub fn canonical_text(&self) -> &str {
        &self.canonical
    }

    /// Canonical text, or `NO_MARKER` for the sentinel.
    pub fn as_str(&self) -> &str {
        if self.is_none() {
            NO_MARKER
        } else {
            &self.canonical
        }
    }
}

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Marker {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Marker {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        if text == NO_MARKER {
            Ok(Marker::none())
        } else {
            Ok(Marker::normalize(&text))
        }
    }
}

/// An extracted answer token.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Answer {
    Valid(String),
    Invalid,
}

impl Answer {
    pub fn as_valid(&self) -> Option<&str> {
        match self {
            Answer::Valid(a) => Some(a),
            Answer::Invalid => None,
        }
    }
}

impl Serialize for Answer {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Answer::Valid(a) => s.serialize_str(a),
            Answer::Invalid => s.serialize_str(INVALID),
        }
    }
}

impl<'de> Deserialize<'de> for Answer {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Ok(if text == INVALID {
            Answer::Invalid
        } else {
            Answer::Valid(text)
        })
    }
}

/// A numeric confidence as a fraction in `[0, 1]`, or a failed parse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NumericConfidence {
    Value(f64),
    Invalid,
}

impl NumericConfidence {
    pub fn value(self) -> Option<f64> {
        match self {
            NumericConfidence::Value(v) => Some(v),
            NumericConfidence::Invalid => None,
        }
    }
}

impl Serialize for NumericConfidence {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            NumericConfidence::Value(v) => s.serialize_f64(*v),
            NumericConfidence::Invalid => s.serialize_str(INVALID),
        }
    }
}

impl<'de> Deserialize<'de> for NumericConfidence {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = NumericConfidence;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a number or \"{INVALID}\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
                Ok(NumericConfidence::Value(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                Ok(NumericConfidence::Value(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                Ok(NumericConfidence::Value(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                if v == INVALID {
                    Ok(NumericConfidence::Invalid)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// One model response. Extraction fields stay `None` until the response has
/// been through answer and marker extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub dataset_id: String,
    pub split: Split,
    pub item_id: String,
    pub model_id: String,
    pub prompt_mode: PromptMode,
    pub raw_response: String,
    pub extracted_answer: Option<Answer>,
    pub correct: Option<bool>,
    pub marker: Option<Marker>,
    pub numeric_confidence: Option<NumericConfidence>,
    pub temperature: f64,
}

impl ResponseRecord {
    /// A freshly elicited response with nothing extracted yet.
    pub fn raw(item: &QaItem, model_id: &str, mode: PromptMode, raw_response: String, temperature: f64) -> Self {
        Self {
            dataset_id: item.dataset_id.clone(),
            split: item.split,
            item_id: item.item_id.clone(),
            model_id: model_id.to_string(),
            prompt_mode: mode,
            raw_response,
            extracted_answer: None,
            correct: None,
            marker: None,
            numeric_confidence: None,
            temperature,
        }
    }

    pub fn references(&self, item: &QaItem) -> bool {
        self.dataset_id == item.dataset_id && self.split == item.split && self.item_id == item.item_id
    }

    /// Correctness flag when the answer is valid.
    pub fn valid_outcome(&self) -> Option<bool> {
        match self.extracted_answer {
            Some(Answer::Valid(_)) => self.correct,
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    ItemMismatch,
    AnswerNotExtracted,
    DualChannel,
    MissingChannel,
    ChannelModeMismatch,
    ConfidenceOutOfRange,
    CorrectMissing,
    CorrectOnInvalid,
    CorrectMismatch,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Violation::ItemMismatch => "item reference mismatch",
            Violation::AnswerNotExtracted => "answer not extracted",
            Violation::DualChannel => "dual-channel populated",
            Violation::MissingChannel => "confidence channel missing",
            Violation::ChannelModeMismatch => "channel does not match prompt mode",
            Violation::ConfidenceOutOfRange => "confidence out of range",
            Violation::CorrectMissing => "correctness missing for valid answer",
            Violation::CorrectOnInvalid => "correctness set for invalid answer",
            Violation::CorrectMismatch => "correctness disagrees with gold answer",
        })
    }
}

/// Lists every invariant an extracted record breaks against its item.
pub fn validate_record(record: &ResponseRecord, item: &QaItem) -> Vec<Violation> {
    let mut out = Vec::new();
    if !record.references(item) {
        out.push(Violation::ItemMismatch);
    }

    match (&record.marker, &record.numeric_confidence) {
        (Some(_), Some(_)) => out.push(Violation::DualChannel),
        (None, None) => out.push(Violation::MissingChannel),
        (Some(_), None) if record.prompt_mode != PromptMode::Marker => {
            out.push(Violation::ChannelModeMismatch)
        }
        (None, Some(_)) if record.prompt_mode != PromptMode::Numeric => {
            out.push(Violation::ChannelModeMismatch)
        }
        _ => {}
    }
    if let Some(NumericConfidence::Value(v)) = record.numeric_confidence {
        if !(0.0..=1.0).contains(&v) {
            out.push(Violation::ConfidenceOutOfRange);
        }
    }

    match (&record.extracted_answer, record.correct) {
        (None, _) => out.push(Violation::AnswerNotExtracted),
        (Some(Answer::Valid(_)), None) => out.push(Violation::CorrectMissing),
        (Some(Answer::Valid(a)), Some(flag)) => {
            if flag != item.is_correct(a) {
                out.push(Violation::CorrectMismatch);
            }
        }
        (Some(Answer::Invalid), Some(_)) => out.push(Violation::CorrectOnInvalid),
        (Some(Answer::Invalid), None) => {}
    }
    out
}
