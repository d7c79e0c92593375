//! Dataset preprocessing: sampling, positional splits and GSM8K
//! binarization. Raw file parsing lives in the std crate; this module works
//! on already-decoded [`RawItem`]s.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{AnswerOption, QaItem, QuestionType, Split};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetId {
    BoolQ,
    StrategyQa,
    Gsm8k,
    Mmlu,
    Csqa,
    MedMcqa,
    CaseHold,
}

impl DatasetId {
    pub const ALL: [DatasetId; 7] = [
        DatasetId::BoolQ,
        DatasetId::StrategyQa,
        DatasetId::Gsm8k,
        DatasetId::Mmlu,
        DatasetId::Csqa,
        DatasetId::MedMcqa,
        DatasetId::CaseHold,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DatasetId::BoolQ => "boolq",
            DatasetId::StrategyQa => "strategyqa",
            DatasetId::Gsm8k => "gsm8k",
            DatasetId::Mmlu => "mmlu",
            DatasetId::Csqa => "csqa",
            DatasetId::MedMcqa => "medmcqa",
            DatasetId::CaseHold => "casehold",
        }
    }

    pub fn question_type(self) -> QuestionType {
        match self {
            DatasetId::BoolQ | DatasetId::StrategyQa | DatasetId::Gsm8k => QuestionType::Binary,
            _ => QuestionType::MultipleChoice,
        }
    }

    /// Default `(train, test)` sample sizes; `None` on a side keeps every item.
    pub fn default_sample_sizes(self) -> (Option<usize>, Option<usize>) {
        match self {
            DatasetId::Mmlu => (Some(20_000), None),
            DatasetId::MedMcqa => (Some(9686), Some(2422)),
            _ => (None, None),
        }
    }

    /// Fraction kept for training when only one source file exists.
    pub fn positional_train_fraction(self) -> Option<f64> {
        match self {
            DatasetId::CaseHold => Some(0.8),
            // 2290 labeled questions -> 2061 / 229
            DatasetId::StrategyQa => Some(0.9),
            _ => None,
        }
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DatasetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DatasetId::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| Error::UnknownDataset(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub dataset_id: DatasetId,
    pub source_path: String,
    pub seed: u64,
    /// Overrides the default `(train, test)` sizes.
    pub sample_sizes: Option<(usize, usize)>,
}

/// One decoded source record.
///
/// For GSM8K `answer` is the full worked solution ending in `#### N`; for
/// binary datasets it is `yes` or `no`; otherwise an option letter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawItem {
    pub id: Option<String>,
    pub question: String,
    pub options: Vec<AnswerOption>,
    pub answer: String,
    /// Set for MedMCQA questions with more than one correct option.
    pub multi_answer: bool,
}

impl RawItem {
    pub fn binary(id: Option<String>, question: impl Into<String>, answer: bool) -> Self {
        Self {
            id,
            question: question.into(),
            options: Vec::new(),
            answer: if answer { "yes" } else { "no" }.into(),
            multi_answer: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreparedDataset {
    pub train: Vec<QaItem>,
    pub test: Vec<QaItem>,
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Uniform sample of `k` indices out of `n`, returned in ascending order.
/// Seeded shuffle then prefix-take; `stream` separates independent draws.
pub fn sample_indices(n: usize, k: usize, seed: u64, stream: u64) -> Result<Vec<usize>> {
    if k > n {
        return Err(Error::SampleTooLarge {
            requested: k,
            available: n,
        });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng(seed, stream));
    idx.truncate(k);
    idx.sort_unstable();
    Ok(idx)
}

/// Number of leading items kept for training.
pub fn positional_split(n: usize, train_fraction: f64) -> usize {
    // n * fraction in exact arithmetic is what `floor` should see; guard
    // against 0.8 * 10 = 7.999...
    let raw = n as f64 * train_fraction;
    let rounded = libm::round(raw);
    if libm::fabs(raw - rounded) < 1e-9 {
        rounded as usize
    } else {
        libm::floor(raw) as usize
    }
}

/// Gold integer from a GSM8K solution (`... #### 1,080`).
pub fn parse_gsm8k_gold(solution: &str) -> Result<i64> {
    let tail = solution
        .rsplit_once("####")
        .map(|(_, t)| t)
        .ok_or_else(|| Error::UnparseableGold(solution.to_string()))?;
    let cleaned: String = tail.trim().chars().filter(|c| *c != ',').collect();
    cleaned
        .parse()
        .map_err(|_| Error::UnparseableGold(tail.trim().to_string()))
}

/// A wrong answer for GSM8K item `index`: the gold value shifted by a seeded
/// nonzero offset of magnitude in `[1, 2|gold| + 10]`. The sign is flipped if
/// it would turn a non-negative gold answer negative.
pub fn gsm8k_distractor(gold: i64, index: u64, seed: u64) -> i64 {
    let mut r = rng(seed, index.wrapping_add(1 << 32));
    let span = 2 * gold.unsigned_abs() + 10;
    let offset = r.random_range(1..=span) as i64;
    let up = r.random_bool(0.5);
    let candidate = if up { gold + offset } else { gold - offset };
    if gold >= 0 && candidate < 0 {
        gold + offset
    } else {
        candidate
    }
}

pub fn gsm8k_question(question: &str, answer: i64) -> String {
    format!("For the question '{}', is the answer {answer} its correct answer?", question.trim())
}

fn gsm8k_item(raw: &RawItem, split: Split, index: usize, embedded: i64, gold_yes: bool) -> QaItem {
    QaItem {
        dataset_id: DatasetId::Gsm8k.as_str().into(),
        split,
        item_id: item_id(split, raw, index),
        question_type: QuestionType::Binary,
        question_text: gsm8k_question(&raw.question, embedded),
        options: Vec::new(),
        gold_answer: if gold_yes { "yes" } else { "no" }.into(),
    }
}

/// Binary GSM8K item. Even `index` embeds the true answer (gold `yes`), odd
/// `index` embeds a seeded distractor (gold `no`).
pub fn binarize_gsm8k(raw: &RawItem, split: Split, index: usize, seed: u64) -> Result<QaItem> {
    let gold = parse_gsm8k_gold(&raw.answer)?;
    Ok(if index.is_multiple_of(2) {
        gsm8k_item(raw, split, index, gold, true)
    } else {
        gsm8k_item(raw, split, index, gsm8k_distractor(gold, index as u64, seed), false)
    })
}

/// Binarizes an odd-index item with a caller-chosen wrong answer.
pub fn binarize_gsm8k_with(raw: &RawItem, split: Split, index: usize, distractor: i64) -> Result<QaItem> {
    let gold = parse_gsm8k_gold(&raw.answer)?;
    if distractor == gold {
        return Err(Error::InvalidItem {
            item_id: item_id(split, raw, index),
            reason: "distractor equals the gold answer".into(),
        });
    }
    Ok(gsm8k_item(raw, split, index, distractor, false))
}

fn item_id(split: Split, raw: &RawItem, index: usize) -> String {
    match &raw.id {
        Some(id) => format!("{}-{id}", split.as_str()),
        None => format!("{}-{index}", split.as_str()),
    }
}

fn to_item(dataset: DatasetId, split: Split, index: usize, raw: &RawItem) -> Result<QaItem> {
    let mut item = QaItem {
        dataset_id: dataset.as_str().into(),
        split,
        item_id: item_id(split, raw, index),
        question_type: dataset.question_type(),
        question_text: raw.question.trim().to_string(),
        options: raw.options.clone(),
        gold_answer: raw.answer.trim().to_string(),
    };
    if item.question_type == QuestionType::Binary {
        item.gold_answer = item.gold_answer.to_lowercase();
    } else {
        item.gold_answer = item.gold_answer.to_uppercase();
    }
    item.validate().map_err(|reason| Error::InvalidItem {
        item_id: item.item_id.clone(),
        reason,
    })?;
    Ok(item)
}

fn take(items: Vec<RawItem>, size: Option<usize>, seed: u64, stream: u64) -> Result<Vec<(usize, RawItem)>> {
    let indexed: Vec<(usize, RawItem)> = items.into_iter().enumerate().collect();
    let Some(k) = size else {
        return Ok(indexed);
    };
    let keep = sample_indices(indexed.len(), k, seed, stream)?;
    let mut keep_iter = keep.into_iter().peekable();
    Ok(indexed
        .into_iter()
        .filter(|(i, _)| {
            if keep_iter.peek() == Some(i) {
                keep_iter.next();
                true
            } else {
                false
            }
        })
        .collect())
}

/// Applies the per-dataset preprocessing to decoded sources.
///
/// `test_raw` is the dataset's separate evaluation file, if it has one.
/// Datasets without one (CaseHOLD, a single-file StrategyQA) are split
/// positionally; MedMCQA without one is sampled into disjoint train and test
/// sets from the same pool.
pub fn prepare_dataset(spec: &DatasetSpec, train_raw: Vec<RawItem>, test_raw: Option<Vec<RawItem>>) -> Result<PreparedDataset> {
    let d = spec.dataset_id;
    let (train_n, test_n) = match spec.sample_sizes {
        Some((a, b)) => (Some(a), Some(b)),
        None => d.default_sample_sizes(),
    };
    let filter = |items: Vec<RawItem>| -> Vec<RawItem> {
        if d == DatasetId::MedMcqa {
            items.into_iter().filter(|r| !r.multi_answer).collect()
        } else {
            items
        }
    };
    let train_raw = filter(train_raw);
    let test_raw = test_raw.map(filter);

    let (train, test) = match test_raw {
        Some(test_raw) => (
            take(train_raw, train_n, spec.seed, 0)?,
            take(test_raw, test_n, spec.seed, 1)?,
        ),
        None => {
            if let Some(frac) = d.positional_train_fraction() {
                let mut all: Vec<(usize, RawItem)> = train_raw.into_iter().enumerate().collect();
                let cut = positional_split(all.len(), frac);
                let test: Vec<(usize, RawItem)> = all.split_off(cut);
                (all, test)
            } else if d == DatasetId::MedMcqa {
                let (tr, te) = (train_n.unwrap_or(0), test_n.unwrap_or(0));
                let picked = sample_indices(train_raw.len(), tr + te, spec.seed, 0)?;
                let train_pos = sample_indices(picked.len(), tr, spec.seed, 1)?;
                let mut slots: Vec<Option<RawItem>> = train_raw.into_iter().map(Some).collect();
                let mut train = Vec::new();
                let mut test = Vec::new();
                for (pos, i) in picked.into_iter().enumerate() {
                    let raw = slots[i].take().expect("sampled indices are distinct");
                    if train_pos.binary_search(&pos).is_ok() {
                        train.push((i, raw));
                    } else {
                        test.push((i, raw));
                    }
                }
                (train, test)
            } else {
                return Err(Error::MissingTestSource(d.as_str().into()));
            }
        }
    };

    let build = |split: Split, items: Vec<(usize, RawItem)>| -> Result<Vec<QaItem>> {
        items
            .into_iter()
            .map(|(index, raw)| {
                if d == DatasetId::Gsm8k {
                    // parity follows the position in the source file
                    binarize_gsm8k(&raw, split, index, spec.seed)
                } else {
                    to_item(d, split, index, &raw)
                }
            })
            .collect()
    };
    Ok(PreparedDataset {
        train: build(Split::Train, train)?,
        test: build(Split::Test, test)?,
    })
}
