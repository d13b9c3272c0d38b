use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    // corpus
    #[error("duplicate query id {0}")]
    DuplicateId(u64),
    #[error("empty query text on line {line}")]
    EmptyText { line: usize },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("bad file format: {0}")]
    Format(String),
    #[error("file truncated: header declares {expected} bytes of payload, found {found}")]
    TruncatedFile { expected: u64, found: u64 },
    #[error("non-finite value in row {row}")]
    NonFiniteValue { row: usize },
    #[error("query and embedding id sets do not overlap")]
    NoOverlap,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,

    // sampling
    #[error("requested {requested} points but only {available} available")]
    InsufficientPoints { requested: usize, available: usize },
    #[error("requested zero points")]
    EmptyRequest,
    #[error("empty vote list")]
    EmptyVotes,

    // classifier
    #[error("insufficient labelled data: {0}")]
    InsufficientData(String),
    #[error("training set contains a single class")]
    DegenerateTraining,
    #[error("metric {0} is undefined on every bootstrap resample")]
    UndefinedMetricCi(String),

    // reduce
    #[error("k = {k} must be smaller than the number of points ({n})")]
    KTooLarge { k: usize, n: usize },
    #[error("bandwidth search did not converge for point {point}")]
    SigmaSolveFailure { point: usize },
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("invalid configuration: {0}")]
    Config(String),

    // cluster
    #[error("min_samples = {min_samples} exceeds point count {n}")]
    ParamTooLarge { min_samples: usize, n: usize },
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),

    // validate
    #[error("DBCV undefined: need at least two clusters of size >= 2, found {0}")]
    UndefinedDbcv(usize),

    // search
    #[error("every seed failed for config {0}")]
    AllSeedsFailed(usize),
    #[error("no configuration passes the stability filter (threshold {0})")]
    NoStableConfig(f64),

    // interpret
    #[error("cluster is empty")]
    EmptyCluster,
    #[error("idf undefined with fewer than two clusters")]
    IdfUndefined,
    #[error("cluster {0} is not covered by the merge map")]
    UnmappedCluster(i32),
    #[error("merge map references unknown cluster {0}")]
    UnknownCluster(i32),
    #[error("theme {0:?} is not in the declared theme list")]
    UnknownTheme(String),
    #[error("size mismatch: parts sum to {parts}, total is {total}")]
    SizeMismatch { parts: usize, total: usize },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// Short machine-readable name, used in structured CLI error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
            Error::DuplicateId(_) => "DuplicateId",
            Error::EmptyText { .. } => "EmptyText",
            Error::Parse { .. } => "ParseError",
            Error::Format(_) => "FormatError",
            Error::TruncatedFile { .. } => "TruncatedFile",
            Error::NonFiniteValue { .. } => "NonFiniteValue",
            Error::NoOverlap => "NoOverlap",
            Error::DimMismatch { .. } => "DimMismatch",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::EmptyInput => "EmptyInput",
            Error::InsufficientPoints { .. } => "InsufficientPoints",
            Error::EmptyRequest => "EmptyRequest",
            Error::EmptyVotes => "EmptyVotes",
            Error::InsufficientData(_) => "InsufficientData",
            Error::DegenerateTraining => "DegenerateTraining",
            Error::UndefinedMetricCi(_) => "UndefinedMetricCI",
            Error::KTooLarge { .. } => "KTooLarge",
            Error::SigmaSolveFailure { .. } => "SigmaSolveFailure",
            Error::EmptyGraph => "EmptyGraph",
            Error::Config(_) => "ConfigError",
            Error::ParamTooLarge { .. } => "ParamTooLarge",
            Error::TooFewPoints(_) => "TooFewPoints",
            Error::UndefinedDbcv(_) => "UndefinedDbcv",
            Error::AllSeedsFailed(_) => "AllSeedsFailed",
            Error::NoStableConfig(_) => "NoStableConfig",
            Error::EmptyCluster => "EmptyCluster",
            Error::IdfUndefined => "IdfUndefined",
            Error::UnmappedCluster(_) => "UnmappedCluster",
            Error::UnknownCluster(_) => "UnknownCluster",
            Error::UnknownTheme(_) => "UnknownTheme",
            Error::SizeMismatch { .. } => "SizeMismatch",
        }
    }
}
