//! Answer extraction from the start of a response.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::model::{Answer, QaItem, QuestionType};

/// Words that may follow a bare capital `A` or `I` when it names an option
/// ("A is correct", "A or B"). Any other lower-case follower marks it as an
/// article or pronoun.
const LETTER_FOLLOWERS: &[&str] = &["is", "or", "and", "seems", "appears", "looks", "because", "as", "since"];

/// First sentence of `raw`. A period only ends a sentence when followed by
/// whitespace or the end of input, so decimals stay intact.
fn first_sentence(raw: &str) -> &str {
    let bytes = raw.as_bytes();
    for (i, c) in raw.char_indices() {
        let ends = matches!(c, '.' | '!' | '?' | ';' | '\n');
        if ends {
            let next = bytes.get(i + 1).copied();
            if c == '\n' || next.is_none() || next.is_some_and(|b| b.is_ascii_whitespace()) {
                return &raw[..i];
            }
        }
    }
    raw
}

fn trim_token(t: &str) -> &str {
    t.trim_matches(|c: char| !c.is_alphanumeric())
}

/// Candidate answers in one clause, in order of appearance.
fn candidates(clause: &str, item: &QaItem) -> Vec<String> {
    let tokens: Vec<&str> = clause.split_whitespace().collect();
    let mut out = Vec::new();
    for (i, raw_tok) in tokens.iter().enumerate() {
        let word = trim_token(raw_tok);
        match item.question_type {
            QuestionType::Binary => {
                // trimming keeps inner hyphens, so "no-one" is not an answer
                let lw = word.to_lowercase();
                if lw == "yes" || lw == "no" {
                    out.push(lw);
                }
            }
            QuestionType::MultipleChoice => {
                if let Some(letter) = option_letter(raw_tok, word, tokens.get(i + 1).copied(), item) {
                    out.push(letter);
                }
            }
        }
    }
    out
}

fn option_letter(raw_tok: &str, word: &str, next: Option<&str>, item: &QaItem) -> Option<String> {
    let mut chars = word.chars();
    let c = chars.next()?;
    if chars.next().is_some() || !c.is_ascii_alphabetic() {
        return None;
    }
    let upper = c.to_ascii_uppercase().to_string();
    if !item.option_letters().any(|l| l.eq_ignore_ascii_case(&upper)) {
        return None;
    }
    let decorated = raw_tok.len() > word.len();
    if c.is_ascii_lowercase() {
        // lower-case letters count only with an option-style cue: "b)", "(b)", "b."
        let cue = raw_tok.contains(')') || raw_tok.contains('(') || raw_tok.ends_with('.');
        return cue.then_some(upper);
    }
    if (c == 'A' || c == 'I') && !decorated {
        if let Some(next) = next.map(trim_token) {
            if next.chars().next().is_some_and(char::is_lowercase) && !LETTER_FOLLOWERS.contains(&next) {
                return None;
            }
        }
    }
    Some(upper)
}

/// Extracts the answer from the leading segment of `raw`.
///
/// The first sentence is split into comma-separated clauses and the first
/// clause holding any candidate decides. Two different candidates in that
/// clause, or none anywhere in the sentence, give [`Answer::Invalid`].
pub fn extract_answer(raw: &str, item: &QaItem) -> Answer {
    let sentence = first_sentence(raw.trim_start());
    for clause in sentence.split(',') {
        let mut found = candidates(clause, item);
        if found.is_empty() {
            continue;
        }
        found.dedup();
        let first = &found[0];
        if found.iter().any(|f| f != first) {
            return Answer::Invalid;
        }
        return Answer::Valid(first.clone());
    }
    Answer::Invalid
}
