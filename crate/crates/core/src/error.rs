use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{what} contains a non-finite value at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("{what} has a negative entry {value} at ({row}, {col})")]
    Negative {
        what: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("endmember column {0} is all zeros")]
    ZeroEndmember(usize),

    #[error("abundance column {col} sums to {sum}, outside the simplex tolerance")]
    NotOnSimplex { col: usize, sum: f64 },

    #[error("band mask keeps no bands")]
    EmptyMask,

    #[error("cube has no signal energy")]
    EmptyCube,

    #[error("bad HSIC file: {0}")]
    Format(String),

    #[error("truncated HSIC payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("CSV line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("data is rank deficient: needed rank {needed}, numerical rank {rank}")]
    RankDeficient { needed: usize, rank: usize },

    #[error("zero-norm vector passed to the spectral angle")]
    ZeroNorm,

    #[error("denoiser failed: {0}")]
    Denoiser(String),

    #[error("non-finite value in {what} after iteration {iter}")]
    Diverged { what: &'static str, iter: usize },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: impl ToString, found: impl ToString) -> Self {
        Error::Dimension {
            context,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
