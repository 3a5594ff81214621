use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure category; the CLI maps each to a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Config,
    Input,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing input file {0}")]
    MissingInput(PathBuf),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad config: {0}")]
    BadConfig(String),

    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("payload truncated: expected {expected} bytes, found {found}")]
    PayloadTruncated { expected: usize, found: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },
    #[error("duplicate utterance id {0:?}")]
    DuplicateUtteranceId(String),
    #[error("invalid language code {0:?}")]
    InvalidLanguage(String),
    #[error("malformed record at line {line}: {msg}")]
    MalformedRecord { line: usize, msg: String },
    #[error("duplicate language {0:?} in metadata")]
    DuplicateLanguage(String),
    #[error("coordinates out of range for {iso}: lat {lat}, lon {lon}")]
    CoordinateRange { iso: String, lat: f64, lon: f64 },
    #[error("unknown meaning id {0}")]
    UnknownMeaning(u32),
    #[error("empty transcription at line {0} after stripping modifiers")]
    EmptyTranscription(usize),
    #[error("language {0:?} has no metadata")]
    MissingMetadata(String),
    #[error("no language survives the filter")]
    EmptyResult,
    #[error("no records carry a predicted language")]
    NoPredictions,
    #[error("too few languages: {0}")]
    TooFewLanguages(String),
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("missing gender group {0}")]
    MissingGroup(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("requested {requested} components but data rank is {rank}")]
    InsufficientRank { requested: usize, rank: usize },
    #[error("within-class scatter is singular; supply a positive ridge")]
    SingularScatter,
    #[error("zero vector for {0:?}")]
    ZeroVector(String),
    #[error("language {0:?} was filtered down to no samples")]
    OverFiltered(String),
    #[error("fewer than two shared meanings between {0} and {1}")]
    TooFewSharedMeanings(String, String),
    #[error("degenerate LDND denominator between {0} and {1}")]
    DegenerateDenominator(String, String),
    #[error("both word forms are empty")]
    EmptyPair,
    #[error("constant input: {0}")]
    ConstantInput(&'static str),
    #[error("collinear design matrix")]
    CollinearDesign,
    #[error("non-finite distance between {0} and {1}")]
    NonFiniteDistance(String, String),
    #[error("NNLS stalled after {iterations} iterations (best-so-far residual {residual})")]
    NnlsStalled { iterations: usize, residual: f64 },
    #[error("leaf sets differ between trees")]
    LeafSetMismatch,
}

impl Error {
    /// Stable snake_case code reported on the command line.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            MissingInput(_) => "missing_input",
            Io(_) => "io_error",
            BadConfig(_) => "bad_config",
            MalformedHeader(_) => "malformed_header",
            PayloadTruncated { .. } => "payload_truncated",
            DimensionMismatch(_) => "dimension_mismatch",
            NonFiniteValue { .. } => "non_finite_value",
            DuplicateUtteranceId(_) => "duplicate_utterance_id",
            InvalidLanguage(_) => "invalid_language",
            MalformedRecord { .. } => "malformed_record",
            DuplicateLanguage(_) => "duplicate_language",
            CoordinateRange { .. } => "coordinate_range",
            UnknownMeaning(_) => "unknown_meaning",
            EmptyTranscription(_) => "empty_transcription",
            MissingMetadata(_) => "missing_metadata",
            EmptyResult => "empty_result",
            NoPredictions => "no_predictions",
            TooFewLanguages(_) => "too_few_languages",
            InsufficientSamples(_) => "insufficient_samples",
            MissingGroup(_) => "missing_group",
            InvalidArgument(_) => "invalid_argument",
            InsufficientRank { .. } => "insufficient_rank",
            SingularScatter => "singular_scatter",
            ZeroVector(_) => "zero_vector",
            OverFiltered(_) => "over_filtered",
            TooFewSharedMeanings(..) => "too_few_shared_meanings",
            DegenerateDenominator(..) => "degenerate_denominator",
            EmptyPair => "empty_pair",
            ConstantInput(_) => "constant_input",
            CollinearDesign => "collinear_design",
            NonFiniteDistance(..) => "non_finite_distance",
            NnlsStalled { .. } => "nnls_stalled",
            LeafSetMismatch => "leaf_set_mismatch",
        }
    }

    pub fn category(&self) -> Category {
        use Error::*;
        match self {
            BadConfig(_) | InvalidArgument(_) => Category::Config,
            InsufficientRank { .. }
            | SingularScatter
            | ZeroVector(_)
            | ConstantInput(_)
            | CollinearDesign
            | NnlsStalled { .. }
            | DegenerateDenominator(..) => Category::Numeric,
            _ => Category::Input,
        }
    }
}
