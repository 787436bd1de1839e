use thiserror::Error;

/// Errors raised anywhere in the bound chain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or out-of-range protocol / channel parameters.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Observed statistics that cannot be fed to the bound engine.
    #[error("invalid statistics: {0}")]
    Input(String),

    /// Unreadable or malformed configuration, or an output that cannot be written.
    #[error("configuration error: {0}")]
    Config(String),

    /// The four prepared states do not span the Bloch space.
    #[error("degenerate inequality system: {0}")]
    Degenerate(String),

    /// The transmission-rate polytope is empty: the statistics contradict the source model.
    #[error("infeasible transmission-rate region for {0}")]
    Infeasible(String),

    /// Phase-error ratio with a non-positive denominator.
    #[error("undefined statistics: {0}")]
    Undefined(String),

    /// Z-basis error bound too large for the Eve-information formula.
    #[error("abort: Z-basis error bound {0:.6} is not below 0.159")]
    Abort(f64),

    /// Coefficient bookkeeping that violates an internal identity.
    #[error("internal consistency error: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
