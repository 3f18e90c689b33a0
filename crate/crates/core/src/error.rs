use thiserror::Error;

/// Errors produced by the detection library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated the invariant of its type or the precondition of
    /// an operation.
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    /// The magnifier has no distinct equal-importance partner for `p`.
    #[error("no magnifying partner for p = {p} with w = {w} (requires 0 < p < 1/w)")]
    NoPartner { p: f64, w: f64 },

    /// An iterative numerical routine hit its iteration cap.
    #[error("{what} did not converge: {detail}")]
    Convergence { what: &'static str, detail: String },

    /// The magnifier coefficient could not be calibrated from the training set.
    #[error("calibration failed: {reason} (m_A = {m_a:e}, m_B = {m_b:e})")]
    Calibration { reason: String, m_a: f64, m_b: f64 },

    /// A rate whose denominator is empty was requested.
    #[error("undefined rate: {0}")]
    UndefinedRate(String),

    /// `q` underflows where `p` still carries mass.
    #[error("KL divergence is infinite: q vanishes at x = {x} where p = {p:e}")]
    InfiniteDivergence { x: f64, p: f64 },

    /// The MIM detector was asked to decide without a magnifier coefficient.
    #[error("MIM detector requires a magnifier coefficient s0")]
    MissingS0,
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input rather than by a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Invalid { .. } | Error::MissingS0)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
