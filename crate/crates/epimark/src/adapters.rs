//! Decoders for the published file layouts of the seven benchmarks.
//!
//! | dataset    | accepted layout                                                        |
//! |------------|------------------------------------------------------------------------|
//! | boolq      | JSONL `{question, answer: bool}` (the passage is ignored)              |
//! | strategyqa | JSON array or JSONL `{qid, question, answer: bool}`                    |
//! | gsm8k      | JSONL `{question, answer}` with the solution ending in `#### N`        |
//! | mmlu       | headerless CSV `question,A,B,C,D,answer`, a directory of them, or JSONL `{question, choices, answer}` |
//! | csqa       | JSONL `{id, question: {stem, choices: [{label, text}]}, answerKey}`    |
//! | medmcqa    | JSONL `{id, question, opa, opb, opc, opd, cop: 1..=4, choice_type}`    |
//! | casehold   | CSV with `citing_prompt, holding_0..holding_4, label` or JSONL `{context, endings, label}` |

use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use epimark_core::ingest::{DatasetId, RawItem};
use epimark_core::AnswerOption;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::jsonl::read_jsonl;

const LETTERS: [&str; 8] = ["A", "B", "C", "D", "E", "F", "G", "H"];

fn lettered<S: Into<String>>(texts: impl IntoIterator<Item = S>) -> Vec<AnswerOption> {
    LETTERS.iter().zip(texts).map(|(l, t)| AnswerOption::new(*l, t)).collect()
}

fn letter(index: usize, path: &Path) -> Result<String> {
    LETTERS
        .get(index)
        .map(|l| l.to_string())
        .ok_or_else(|| Error::format(path, format!("answer index {index} out of range")))
}

/// JSONL, or a JSON array when the file starts with `[`.
fn read_objects<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(&text).map_err(|e| Error::format(path, e));
    }
    read_jsonl(path)?.strict(path)
}

#[derive(Deserialize)]
struct BoolQ {
    question: String,
    answer: bool,
}

#[derive(Deserialize)]
struct StrategyQa {
    qid: Option<String>,
    question: String,
    answer: bool,
}

#[derive(Deserialize)]
struct Gsm8k {
    question: String,
    answer: String,
}

#[derive(Deserialize)]
struct CsqaChoice {
    label: String,
    text: String,
}

#[derive(Deserialize)]
struct CsqaQuestion {
    stem: String,
    choices: Vec<CsqaChoice>,
}

#[derive(Deserialize)]
struct Csqa {
    id: Option<String>,
    question: CsqaQuestion,
    #[serde(rename = "answerKey")]
    answer_key: String,
}

#[derive(Deserialize)]
struct MedMcqa {
    id: Option<String>,
    question: String,
    opa: String,
    opb: String,
    opc: String,
    opd: String,
    cop: usize,
    #[serde(default)]
    choice_type: Option<String>,
}

#[derive(Deserialize)]
struct MmluJson {
    question: String,
    choices: Vec<String>,
    answer: Value,
}

#[derive(Deserialize)]
struct CaseHoldJson {
    #[serde(default)]
    id: Option<Value>,
    context: String,
    endings: Vec<String>,
    label: Value,
}

fn index_or_letter(v: &Value, path: &Path) -> Result<String> {
    match v {
        Value::Number(n) => letter(n.as_u64().unwrap_or(u64::MAX) as usize, path),
        Value::String(s) => match s.trim().parse::<usize>() {
            Ok(i) => letter(i, path),
            Err(_) => Ok(s.trim().to_uppercase()),
        },
        other => Err(Error::format(path, format!("unexpected answer {other}"))),
    }
}

fn csv_files(path: &Path) -> Result<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

fn is_csv(path: &Path) -> bool {
    path.is_dir() || path.extension().is_some_and(|x| x == "csv")
}

fn mmlu(path: &Path) -> Result<Vec<RawItem>> {
    if !is_csv(path) {
        let rows: Vec<MmluJson> = read_objects(path)?;
        return rows
            .into_iter()
            .map(|r| {
                Ok(RawItem {
                    id: None,
                    answer: index_or_letter(&r.answer, path)?,
                    question: r.question,
                    options: lettered(r.choices),
                    multi_answer: false,
                })
            })
            .collect();
    }
    let mut out = Vec::new();
    for file in csv_files(path)? {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(false)
            .from_path(&file)
            .map_err(|e| Error::format(&file, e))?;
        let stem = file.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        for (i, row) in reader.records().enumerate() {
            let row = row.map_err(|e| Error::format(&file, e))?;
            if row.len() != 6 {
                return Err(Error::format(&file, format!("row {} has {} fields, want 6", i + 1, row.len())));
            }
            out.push(RawItem {
                // subject files repeat row numbers, so qualify them
                id: path.is_dir().then(|| format!("{stem}-{i}")),
                question: row[0].to_string(),
                options: lettered((1..5).map(|j| row[j].to_string())),
                answer: row[5].trim().to_uppercase(),
                multi_answer: false,
            });
        }
    }
    Ok(out)
}

fn casehold(path: &Path) -> Result<Vec<RawItem>> {
    if !is_csv(path) {
        let rows: Vec<CaseHoldJson> = read_objects(path)?;
        return rows
            .into_iter()
            .map(|r| {
                Ok(RawItem {
                    id: r.id.map(|v| match v {
                        Value::String(s) => s,
                        other => other.to_string(),
                    }),
                    answer: index_or_letter(&r.label, path)?,
                    question: r.context,
                    options: lettered(r.endings),
                    multi_answer: false,
                })
            })
            .collect();
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(BufReader::new(file));
    let headers = reader.headers().map_err(|e| Error::format(path, e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::format(path, format!("missing column `{name}`")))
    };
    let prompt = col("citing_prompt")?;
    let holdings = (0..5).map(|i| col(&format!("holding_{i}"))).collect::<Result<Vec<_>>>()?;
    let label = col("label")?;
    let id = headers.iter().position(|h| h == "example_id");
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::format(path, e))?;
        let answer: usize = row[label]
            .trim()
            .parse()
            .map_err(|_| Error::format(path, format!("bad label `{}`", &row[label])))?;
        out.push(RawItem {
            id: id.map(|c| row[c].to_string()),
            question: row[prompt].to_string(),
            options: lettered(holdings.iter().map(|&c| row[c].to_string())),
            answer: letter(answer, path)?,
            multi_answer: false,
        });
    }
    Ok(out)
}

/// Decodes one source file (or MMLU directory) of `dataset`.
pub fn load_raw(dataset: DatasetId, path: &Path) -> Result<Vec<RawItem>> {
    match dataset {
        DatasetId::BoolQ => Ok(read_objects::<BoolQ>(path)?
            .into_iter()
            .map(|r| RawItem::binary(None, r.question, r.answer))
            .collect()),
        DatasetId::StrategyQa => Ok(read_objects::<StrategyQa>(path)?
            .into_iter()
            .map(|r| RawItem::binary(r.qid, r.question, r.answer))
            .collect()),
        DatasetId::Gsm8k => Ok(read_objects::<Gsm8k>(path)?
            .into_iter()
            .map(|r| RawItem {
                id: None,
                question: r.question,
                options: Vec::new(),
                answer: r.answer,
                multi_answer: false,
            })
            .collect()),
        DatasetId::Mmlu => mmlu(path),
        DatasetId::Csqa => Ok(read_objects::<Csqa>(path)?
            .into_iter()
            .map(|r| RawItem {
                id: r.id,
                question: r.question.stem,
                options: r
                    .question
                    .choices
                    .into_iter()
                    .map(|c| AnswerOption::new(c.label, c.text))
                    .collect(),
                answer: r.answer_key,
                multi_answer: false,
            })
            .collect()),
        DatasetId::MedMcqa => read_objects::<MedMcqa>(path)?
            .into_iter()
            .map(|r| {
                if !(1..=4).contains(&r.cop) {
                    return Err(Error::format(path, format!("cop {} outside 1..=4", r.cop)));
                }
                Ok(RawItem {
                    id: r.id,
                    question: r.question,
                    options: lettered([r.opa, r.opb, r.opc, r.opd]),
                    answer: LETTERS[r.cop - 1].into(),
                    multi_answer: r.choice_type.as_deref() == Some("multi"),
                })
            })
            .collect(),
        DatasetId::CaseHold => casehold(path),
    }
}
