//! Synthetic response logs with planted marker accuracies.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Answer, Marker, NumericConfidence, PromptMode, QaItem, QuestionType, ResponseRecord, Split};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticMarker {
    pub text: String,
    pub accuracy: f64,
    pub weight: f64,
}

impl SyntheticMarker {
    pub fn new(text: &str, accuracy: f64, weight: f64) -> Self {
        Self {
            text: text.into(),
            accuracy,
            weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticProfile {
    pub model_id: String,
    pub dataset_ids: Vec<String>,
    pub markers: Vec<SyntheticMarker>,
    /// Accuracy shift per dataset; empty means no shift anywhere.
    #[serde(default)]
    pub dataset_shifts: Vec<f64>,
    pub seed: u64,
    /// Records per dataset and split.
    pub n_records: usize,
    /// Also emit numeric-mode test records whose confidence is the planted
    /// (unshifted) accuracy.
    #[serde(default)]
    pub numeric: bool,
}

impl SyntheticProfile {
    /// Five datasets, eight markers skewed towards confident ones.
    pub fn reference(n_records: usize, seed: u64) -> Self {
        let markers = [
            ("absolutely certain", 0.99, 0.30),
            ("very confident", 0.97, 0.20),
            ("fairly certain", 0.95, 0.15),
            ("quite sure", 0.90, 0.10),
            ("likely", 0.85, 0.08),
            ("probably", 0.80, 0.07),
            ("i think", 0.70, 0.05),
            ("possibly", 0.60, 0.05),
        ]
        .iter()
        .map(|(t, a, w)| SyntheticMarker::new(t, *a, *w))
        .collect();
        Self {
            model_id: "synthetic".into(),
            dataset_ids: (1..=5).map(|i| format!("ds{i}")).collect(),
            markers,
            dataset_shifts: Vec::new(),
            seed,
            n_records,
            numeric: false,
        }
    }

    pub fn with_shifts(mut self, shifts: Vec<f64>) -> Self {
        self.dataset_shifts = shifts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidProfile(m));
        if self.dataset_ids.is_empty() || self.markers.is_empty() || self.n_records == 0 {
            return bad("needs datasets, markers and a positive record count".into());
        }
        if !self.dataset_shifts.is_empty() && self.dataset_shifts.len() != self.dataset_ids.len() {
            return bad(format!(
                "{} shifts for {} datasets",
                self.dataset_shifts.len(),
                self.dataset_ids.len()
            ));
        }
        let total: f64 = self.markers.iter().map(|m| m.weight).sum();
        if libm::fabs(total - 1.0) > 1e-9 {
            return bad(format!("emission weights sum to {total}"));
        }
        let mut seen = Vec::new();
        for m in &self.markers {
            if !(0.0..=1.0).contains(&m.accuracy) || m.weight.is_nan() || m.weight < 0.0 {
                return bad(format!("marker `{}` has accuracy or weight out of range", m.text));
            }
            let norm = Marker::normalize(&m.text);
            if norm.is_none() || seen.contains(&norm) {
                return bad(format!("marker `{}` is empty or duplicated after normalization", m.text));
            }
            seen.push(norm);
        }
        Ok(())
    }

    fn shift(&self, dataset: usize) -> f64 {
        self.dataset_shifts.get(dataset).copied().unwrap_or(0.0)
    }
}

/// Items and fully extracted records produced from a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRun {
    pub items: Vec<QaItem>,
    pub records: Vec<ResponseRecord>,
}

fn capitalized(answer: &str) -> String {
    let mut c = answer.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

/// Generates `n_records` marker-mode records per dataset and split. Each
/// record draws a marker by emission weight, then correctness with
/// probability `accuracy + shift` clamped to `[0, 1]`. Raw responses read
/// like real ones ("Yes, fairly certain."), so they survive re-extraction.
pub fn generate_synthetic(profile: &SyntheticProfile) -> Result<SyntheticRun> {
    profile.validate()?;
    let weights: Vec<f64> = profile.markers.iter().map(|m| m.weight).collect();
    let pick = WeightedIndex::new(&weights).map_err(|e| Error::InvalidProfile(e.to_string()))?;
    let mut run = SyntheticRun {
        items: Vec::new(),
        records: Vec::new(),
    };

    for (d, dataset) in profile.dataset_ids.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
        rng.set_stream(d as u64);
        let shift = profile.shift(d);
        for split in [Split::Train, Split::Test] {
            for i in 0..profile.n_records {
                let gold_yes = rng.random_bool(0.5);
                let item = QaItem {
                    dataset_id: dataset.clone(),
                    split,
                    item_id: format!("{}-{i}", split.as_str()),
                    question_type: QuestionType::Binary,
                    question_text: format!("synthetic question {i}"),
                    options: Vec::new(),
                    gold_answer: if gold_yes { "yes" } else { "no" }.into(),
                };
                let marker = &profile.markers[pick.sample(&mut rng)];
                let p = (marker.accuracy + shift).clamp(0.0, 1.0);
                let correct = rng.random_bool(p);
                let answer = if correct == gold_yes { "yes" } else { "no" };

                let mut rec = ResponseRecord::raw(
                    &item,
                    &profile.model_id,
                    PromptMode::Marker,
                    format!("{}, {}.", capitalized(answer), marker.text),
                    0.5,
                );
                rec.extracted_answer = Some(Answer::Valid(answer.into()));
                rec.correct = Some(correct);
                rec.marker = Some(Marker::normalize(&marker.text));
                run.records.push(rec);

                if profile.numeric && split == Split::Test {
                    let correct = rng.random_bool(p);
                    let answer = if correct == gold_yes { "yes" } else { "no" };
                    let score = libm::round(marker.accuracy * 100.0);
                    let mut rec = ResponseRecord::raw(
                        &item,
                        &profile.model_id,
                        PromptMode::Numeric,
                        format!("{}, {score}", capitalized(answer)),
                        0.5,
                    );
                    rec.extracted_answer = Some(Answer::Valid(answer.into()));
                    rec.correct = Some(correct);
                    rec.numeric_confidence = Some(NumericConfidence::Value(score / 100.0));
                    run.records.push(rec);
                }
                run.items.push(item);
            }
        }
    }
    Ok(run)
}
