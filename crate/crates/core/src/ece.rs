//! Expected calibration error.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EceSample {
    pub predicted_confidence: f64,
    pub correct: bool,
}

impl EceSample {
    pub fn new(predicted_confidence: f64, correct: bool) -> Self {
        Self {
            predicted_confidence,
            correct,
        }
    }
}

/// How predictions are grouped into calibration bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EceBinning {
    /// One bin per prediction: the mean of `|confidence - outcome|`.
    PerPrediction,
    /// One bin per distinct predicted confidence value.
    #[default]
    PerValue,
    /// `B` equal-width bins over `[0, 1]`.
    Fixed(usize),
}

impl fmt::Display for EceBinning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EceBinning::PerPrediction => f.write_str("per_prediction"),
            EceBinning::PerValue => f.write_str("per_value"),
            EceBinning::Fixed(b) => write!(f, "fixed:{b}"),
        }
    }
}

impl FromStr for EceBinning {
    type Err = String;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match s {
            "per_prediction" => Ok(EceBinning::PerPrediction),
            "per_value" => Ok(EceBinning::PerValue),
            _ => {
                let bins = s
                    .strip_prefix("fixed:")
                    .and_then(|b| b.parse::<usize>().ok())
                    .filter(|&b| b > 0)
                    .ok_or_else(|| alloc::format!("unknown ECE binning `{s}` (per_prediction, per_value or fixed:B)"))?;
                Ok(EceBinning::Fixed(bins))
            }
        }
    }
}

impl Serialize for EceBinning {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EceBinning {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn outcome(correct: bool) -> f64 {
    if correct {
        1.0
    } else {
        0.0
    }
}

/// Expected calibration error of `samples` under `binning`.
///
/// Samples are summed in a canonical order, so the result does not depend on
/// the input order.
pub fn ece(samples: &[EceSample], binning: EceBinning) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("ece"));
    }
    if let Some(bad) = samples
        .iter()
        .find(|s| !(0.0..=1.0).contains(&s.predicted_confidence))
    {
        return Err(Error::ConfidenceOutOfRange(bad.predicted_confidence));
    }
    let mut sorted: Vec<EceSample> = samples.to_vec();
    sorted.sort_by(|a, b| {
        a.predicted_confidence
            .partial_cmp(&b.predicted_confidence)
            .unwrap_or(Ordering::Equal)
            .then(a.correct.cmp(&b.correct))
    });
    let n = sorted.len() as f64;

    let value = match binning {
        EceBinning::PerPrediction => {
            sorted
                .iter()
                .map(|s| libm::fabs(s.predicted_confidence - outcome(s.correct)))
                .sum::<f64>()
                / n
        }
        EceBinning::PerValue => {
            let mut total = 0.0;
            for group in sorted.chunk_by(|a, b| a.predicted_confidence == b.predicted_confidence) {
                let conf = group[0].predicted_confidence;
                let hits = group.iter().filter(|s| s.correct).count() as f64;
                total += libm::fabs(group.len() as f64 * conf - hits);
            }
            total / n
        }
        EceBinning::Fixed(bins) => {
            let bins = bins.max(1);
            let mut gap = alloc::vec![0.0f64; bins];
            for s in &sorted {
                let idx = ((s.predicted_confidence * bins as f64) as usize).min(bins - 1);
                gap[idx] += s.predicted_confidence - outcome(s.correct);
            }
            gap.iter().map(|g| libm::fabs(*g)).sum::<f64>() / n
        }
    };
    Ok(value.clamp(0.0, 1.0))
}
