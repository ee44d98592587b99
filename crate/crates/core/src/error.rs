use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    #[error("point {point} lies outside the domain {domain}")]
    OutOfDomain { point: f64, domain: String },

    #[error("index {index} is beyond the cutoff nu = {nu}")]
    IndexBeyondCutoff { index: usize, nu: String },

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("quadrature did not converge: last refinement changed the value by {delta:e} (tolerance {tol:e})")]
    NonConvergence { delta: f64, tol: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("grid too coarse: spacing {h:e} exceeds {limit:e}")]
    GridTooCoarse { h: f64, limit: f64 },

    #[error("WindowTooSmall: {0}")]
    WindowTooSmall(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("sample function vanishes at every sample point")]
    AllZero,
}
