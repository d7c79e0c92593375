//! Elicitation prompts.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{PromptMode, QaItem, QuestionType};

/// Choice list shown to the model: `yes or no`, or the option letters.
pub fn choices(item: &QaItem) -> String {
    match item.question_type {
        QuestionType::Binary => "yes or no".into(),
        QuestionType::MultipleChoice => item.option_letters().collect::<Vec<_>>().join(", "),
    }
}

fn options_block(item: &QaItem) -> String {
    item.options
        .iter()
        .map(|o| format!("{}. {}", o.letter, o.text))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Renders the elicitation prompt for `item`. Pure in `(item, mode)`.
pub fn render_prompt(item: &QaItem, mode: PromptMode) -> String {
    let choices = choices(item);
    let q = &item.question_text;
    match (item.question_type, mode) {
        (QuestionType::Binary, PromptMode::Marker) => format!(
            "The following is a binary question. When responding, answer with a binary answer from {choices} \
             and incorporate only one epistemic marker to reflect your confidence level. You must include your \
             binary answer at the beginning of your response then respond with the epistemic markers in a concise \
             and brief manner.\nThe question is: {q}\nAnd your answer is:"
        ),
        (QuestionType::MultipleChoice, PromptMode::Marker) => format!(
            "The following is a multiple choice question. When responding, answer with a letter from {choices} \
             and incorporate only one epistemic marker to reflect your confidence level. You must include your \
             choice of letter at the beginning of your response then respond with the epistemic markers in a \
             concise and brief manner.\nThe question is: {q}\nThe options are:\n{}\nAnd your answer is:",
            options_block(item)
        ),
        (QuestionType::Binary, PromptMode::Numeric) => format!(
            "The following is a binary question. When responding, answer with a binary answer from {choices} \
             and incorporate a number between 0 and 100 to reflect your confidence level. You must include your \
             binary answer at the beginning of your response then respond with the confidence score in a concise \
             and brief manner.\nThe question is: {q}\nAnd your answer is:"
        ),
        (QuestionType::MultipleChoice, PromptMode::Numeric) => format!(
            "The following is a multiple choice question. When responding, answer with a letter from {choices} \
             and incorporate a number between 0 and 100 to reflect your confidence level. You must include your \
             choice of letter at the beginning of your response then respond with the confidence score in a \
             concise and brief manner.\nThe question is: {q}\nThe options are:\n{}\nAnd your answer is:",
            options_block(item)
        ),
    }
}

const EXTRACTION_SHOTS: &[(&str, &str)] = &[
    ("Yes, I am fairly certain.", "fairly certain"),
    ("No.", "NO_MARKER"),
    ("C. I'd say this is very likely.", "very likely"),
    ("B, though I'm not entirely sure.", "not entirely sure"),
    ("Yes. Without a doubt.", "without a doubt"),
    ("A", "NO_MARKER"),
    ("No, I suspect that is wrong.", "i suspect"),
];

/// Few-shot prompt asking an extractor model for the single epistemic marker
/// in `response`, or `NO_MARKER`.
pub fn extraction_prompt(response: &str) -> String {
    let mut out = String::from(
        "Identify the epistemic marker (the word or short phrase expressing confidence or uncertainty) in the \
         response. Reply with the marker only, copied from the response. If the response contains no such \
         expression, reply with NO_MARKER.\n\n",
    );
    for (resp, marker) in EXTRACTION_SHOTS {
        out.push_str(&format!("Response: {resp}\nMarker: {marker}\n\n"));
    }
    out.push_str(&format!("Response: {response}\nMarker:"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AnswerOption, Split};
    use alloc::vec;

    fn binary() -> QaItem {
        QaItem {
            dataset_id: "boolq".into(),
            split: Split::Test,
            item_id: "1".into(),
            question_type: QuestionType::Binary,
            question_text: "is the sky blue".into(),
            options: vec![],
            gold_answer: "yes".into(),
        }
    }

    fn mcq() -> QaItem {
        QaItem {
            dataset_id: "mmlu".into(),
            split: Split::Test,
            item_id: "2".into(),
            question_type: QuestionType::MultipleChoice,
            question_text: "2+2?".into(),
            options: ["3", "4", "5", "6"]
                .iter()
                .zip(["A", "B", "C", "D"])
                .map(|(t, l)| AnswerOption::new(l, *t))
                .collect(),
            gold_answer: "B".into(),
        }
    }

    #[test]
    fn binary_marker_prompt() {
        let p = render_prompt(&binary(), PromptMode::Marker);
        assert!(p.contains("answer with a binary answer"));
        assert!(p.contains("only one epistemic marker"));
        assert!(p.contains("from yes or no"));
        assert!(p.contains("is the sky blue"));
        assert_eq!(p, render_prompt(&binary(), PromptMode::Marker));
    }

    #[test]
    fn mcq_numeric_prompt() {
        let p = render_prompt(&mcq(), PromptMode::Numeric);
        assert!(p.contains("a number between 0 and 100"));
        assert!(p.contains("from A, B, C, D"));
        for l in ["A. 3", "B. 4", "C. 5", "D. 6"] {
            assert!(p.contains(l), "{l}");
        }
    }

    #[test]
    fn extraction_prompt_ends_with_response() {
        let p = extraction_prompt("Yes, likely.");
        assert!(p.ends_with("Response: Yes, likely.\nMarker:"));
    }
}
