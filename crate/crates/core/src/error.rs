use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every numerical routine.
///
/// Values are carried as `f64` regardless of the scalar type the computation
/// ran in, so the error type stays non-generic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("{op} did not converge within {terms} terms (partial value {partial:e}, tail estimate {tail:e})")]
    Truncation {
        op: &'static str,
        partial: f64,
        tail: f64,
        terms: usize,
    },

    #[error("{op}: s = {s} lies within {radius:e} of the pole at s = {pole}")]
    PoleProximity {
        op: &'static str,
        s: f64,
        pole: f64,
        radius: f64,
    },

    #[error("quadrature failed on [{a}, {b}]: estimated error {err:e} after {intervals} subintervals")]
    Quadrature {
        a: f64,
        b: f64,
        err: f64,
        intervals: usize,
    },

    #[error("degenerate determinant in {op}: |det| = {det:e}")]
    Degenerate { op: &'static str, det: f64 },
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    /// Short machine-readable tag, used by the CLI's structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::Truncation { .. } => "truncation",
            Error::PoleProximity { .. } => "pole_proximity",
            Error::Quadrature { .. } => "quadrature",
            Error::Degenerate { .. } => "degenerate",
        }
    }
}
