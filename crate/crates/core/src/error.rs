use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs are structurally inconsistent (e.g. mismatched lengths).
    #[error("structural error: {0}")]
    Structural(String),

    /// An operation's precondition does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The projection sampler exceeded its proposal budget for one point.
    #[error(
        "sampler stall: {proposals} proposals without acceptance while placing point {placed} of {target}"
    )]
    SamplerStall {
        placed: usize,
        target: usize,
        proposals: u64,
    },

    /// The moment generating function of the fading law is infinite at the requested argument.
    #[error("MGF divergence: E[exp({argument} Z)] is infinite for {fading}")]
    MgfDivergence { argument: f64, fading: String },

    /// Inputs cannot be combined (estimator and fading law, regime and model).
    #[error("incompatible inputs: {0}")]
    Incompatible(String),

    /// Not enough usable data for the requested statistic.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Parse failure in one of the text formats.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
