use std::path::PathBuf;

/// Broad failure classes, used by front-ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad configuration or arguments.
    Usage,
    /// Missing, malformed or inconsistent input data.
    Data,
    /// Training diverged or produced non-finite values.
    Numeric,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("operation requires a {expected} RBM")]
    WrongFlavor { expected: &'static str },
    #[error("declared length D={declared} but counts sum to {actual}")]
    InvalidLength { declared: f64, actual: f64 },
    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid target vector: {0}")]
    InvalidTarget(String),
    #[error("non-finite parameters or loss during {stage} at epoch {epoch}")]
    NonFiniteUpdate { stage: &'static str, epoch: usize },
    #[error("no term survived vocabulary filtering")]
    EmptyVocabulary,
    #[error("no non-empty training rows")]
    EmptyTrainingSet,
    #[error("no non-empty sentence to evaluate")]
    EmptyEvaluationSet,
    #[error("slope undefined: both points have dimension {0}")]
    DegenerateInterval(usize),
    #[error("need at least 3 curve points, got {0}")]
    TooFewPoints(usize),
    #[error("no critical dimension in range (steepness is flat)")]
    NoPeak,
    #[error("model was trained on vocabulary {expected:016x}, data uses {got:016x}")]
    VocabularyMismatch { expected: u64, got: u64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed {what}: {msg}")]
    Format { what: &'static str, msg: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidConfig(_) => ErrorCategory::Usage,
            Error::NonFiniteUpdate { .. } => ErrorCategory::Numeric,
            _ => ErrorCategory::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(what: &'static str, msg: impl Into<String>) -> Self {
        Error::Format {
            what,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}
