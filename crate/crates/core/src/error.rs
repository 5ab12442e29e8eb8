use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Mixing polynomials from rings with different point counts, or asking
    /// for a point class the ring does not have.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The query lies outside the range the recursion supports at all.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A sufficiency guard (minimum degree) failed; can be overridden with `force`.
    #[error("outside proven range: {0}")]
    OutsideProvenRange(String),

    /// The dimension constraint `r + 2s = d(d+3)/2 + 3 - (codim)` fails.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-exact division: {0}")]
    NonExactDivision(String),

    #[error("recursion exceeded depth {0}")]
    RecursionLimit(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("reference data: {0}")]
    Reference(String),

    #[error("cache file {path}: {message}")]
    Cache { path: String, message: String },

    #[error("writing {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// Usage and guard errors map to exit status 2 in the CLI.
    pub fn is_guard(&self) -> bool {
        matches!(
            self,
            Error::OutsideProvenRange(_)
                | Error::Dimension(_)
                | Error::Unsupported(_)
                | Error::InvalidArgument(_)
                | Error::Parse(_)
        )
    }
}
