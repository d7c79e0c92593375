use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("records mix {field}: `{first}` and `{other}`")]
    MixedGroup {
        field: &'static str,
        first: String,
        other: String,
    },
    #[error("record {item_id} is not a marker-mode record")]
    NotMarkerMode { item_id: String },
    #[error("count must be positive")]
    ZeroCount,
    #[error("correct count {correct} exceeds total {count}")]
    CorrectExceedsCount { correct: u64, count: u64 },
    #[error("confidence level {0} must lie strictly between 0 and 1")]
    InvalidLevel(f64),
    #[error("confidence {0} outside [0, 1]")]
    ConfidenceOutOfRange(f64),
    #[error("no test record maps to a training marker (coverage 0)")]
    ZeroCoverage,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} values, got {got}")]
    TooFewValues { needed: usize, got: usize },
    #[error("zero variance in {0}")]
    DegenerateVariance(&'static str),
    #[error("mean must be positive for a coefficient of variation")]
    NonPositiveMean,
    #[error("need at least {needed} datasets, got {got}")]
    TooFewDatasets { needed: usize, got: usize },
    #[error("need at least {needed} models, got {got}")]
    TooFewModels { needed: usize, got: usize },
    #[error("no marker is shared by every dataset")]
    NoSharedMarkers,
    #[error("no usable shared marker for {0}")]
    NoUsableMarkers(&'static str),
    #[error("no dataset pair shares at least two markers")]
    NoUsablePairs,
    #[error("dataset {0} lacks test records or accuracy")]
    IncompleteGrid(String),
    #[error("unknown dataset id `{0}`")]
    UnknownDataset(String),
    #[error("unparseable GSM8K gold answer `{0}`")]
    UnparseableGold(String),
    #[error("requested {requested} items but only {available} available")]
    SampleTooLarge { requested: usize, available: usize },
    #[error("dataset {0} needs a separate test source")]
    MissingTestSource(String),
    #[error("invalid item {item_id}: {reason}")]
    InvalidItem { item_id: String, reason: String },
    #[error("invalid synthetic profile: {0}")]
    InvalidProfile(String),
    #[error("invalid lexicon line {line}: {reason}")]
    Lexicon { line: usize, reason: String },
}
