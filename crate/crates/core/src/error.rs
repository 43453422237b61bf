use alloc::string::String;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// `Ei` was asked for its value at the logarithmic branch point 0.
    #[error("Ei is undefined at the branch point x = 0")]
    BranchPoint,
    /// The argument is finite but outside the supported numerical range.
    #[error("range error: {0}")]
    Range(String),
    /// Malformed indices or too-short input sequences.
    #[error("argument error: {0}")]
    Argument(String),
    /// Arithmetic between expansions about different centers.
    #[error("expansions about different centers cannot be combined")]
    CenterMismatch,
    /// A series or iteration failed to converge to the requested accuracy.
    #[error("not converged: {0}")]
    NonConvergent(String),
    /// A computed quantity violates a structural invariant (precision loss).
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// The ODE solver could not reach the requested tolerance.
    #[error("ODE solver failure after {accepted} accepted / {rejected} rejected steps at t = {t}")]
    Solver { t: f64, accepted: usize, rejected: usize },
    /// The Monte Carlo run does not contain enough usable replicates.
    #[error("statistical failure: {0}")]
    Statistical(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
