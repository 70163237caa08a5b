use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("2F1({a}, {b}; {c}; 1) diverges (c - a - b = {excess} <= 0)")]
    DivergentAtOne { a: f64, b: f64, c: f64, excess: f64 },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("quadrature failure: estimated error {estimate:e} exceeds {tolerance:e}")]
    QuadratureFailure { estimate: f64, tolerance: f64 },
    #[error("derivative of order {order} unavailable (smoothness order {max})")]
    OrderUnavailable { order: usize, max: usize },
    #[error("limit undefined: {0}")]
    LimitUndefined(String),
    #[error("certificate `{selector}` requires {window}, got d = {d}, s = {s}")]
    WrongWindow {
        selector: String,
        window: String,
        d: u32,
        s: f64,
    },
    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),
    /// `best` holds the last iterate (weights or flattened coordinates).
    #[error("solver did not converge after {iterations} iterations (last gap {gap:e})")]
    NotConverged {
        iterations: usize,
        gap: f64,
        best: Vec<f64>,
    },
    #[error("particle collision could not be resolved after {retries} retries")]
    Collision { retries: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
