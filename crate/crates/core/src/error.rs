use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: {0}")]
    Mismatch(String),

    #[error("colouring leaves no admissible (non-monochromatic) edge")]
    NoAdmissibleEdge,

    #[error("colouring is not proper")]
    ImproperColouring,

    #[error("hypergraph has no proper {0}-colouring")]
    Uncolourable(u16),

    #[error("series diverges: c*k*(k-1) = {ratio_num} >= (q^(k-1)-1)^2 = {ratio_den}")]
    Divergent { ratio_num: f64, ratio_den: f64 },

    #[error("retry cap of {0} attempts exhausted")]
    RetryCap(u64),

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for validation failures, 3 for
    /// resource-guard aborts, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ResourceGuard(_) | Error::RetryCap(_) => 3,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn params(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }
}
