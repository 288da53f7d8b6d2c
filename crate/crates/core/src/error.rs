use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A chain or coefficient set violates a structural invariant.
    #[error("invalid chain: {field}: {reason}")]
    InvalidChain { field: &'static str, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("node set invalid: {0}")]
    InvalidNodes(String),

    /// Two quantities that must stay apart coincided (division by zero).
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    /// A reconstructed `a_k²` came out clearly negative.
    #[error("negative a^2 = {value:e} at site {site} (t = {t}); sign or spectral data inconsistent")]
    NegativeAmplitude { site: usize, value: f64, t: f64 },

    #[error("formula not applicable: {0}")]
    Inapplicable(String),
}
