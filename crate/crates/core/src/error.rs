use thiserror::Error;

/// Failure categories shared by every module.
///
/// The CLI maps each category onto a fixed process exit code
/// (see [`KilabError::exit_code`]).
#[derive(Debug, Error)]
pub enum KilabError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("kernel spec error: {0}")]
    Spec(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate point set: {0}")]
    Degenerate(String),

    #[error("polynomial block is rank deficient (rank {rank} < {required}); nodes are not unisolvent")]
    Rank { rank: usize, required: usize },

    #[error("factorization failed at pivot {pivot}")]
    Factorization { pivot: usize },

    #[error("solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, KilabError>;

impl KilabError {
    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            KilabError::Config(_)
            | KilabError::Spec(_)
            | KilabError::Argument(_)
            | KilabError::Dimension { .. }
            | KilabError::Parse { .. } => 2,
            KilabError::Factorization { .. } | KilabError::Residual { .. } => 3,
            KilabError::Degenerate(_)
            | KilabError::Rank { .. }
            | KilabError::InsufficientData(_) => 4,
            KilabError::Io(_) => 5,
        }
    }

    /// Short machine-readable category name.
    pub fn category(&self) -> &'static str {
        match self {
            KilabError::Dimension { .. } => "dimension",
            KilabError::Config(_) => "config",
            KilabError::Spec(_) => "spec",
            KilabError::Argument(_) => "argument",
            KilabError::Degenerate(_) => "degenerate",
            KilabError::Rank { .. } => "rank",
            KilabError::Factorization { .. } => "conditioning",
            KilabError::Residual { .. } => "conditioning",
            KilabError::InsufficientData(_) => "insufficient-data",
            KilabError::Parse { .. } => "parse",
            KilabError::Io(_) => "io",
        }
    }
}
