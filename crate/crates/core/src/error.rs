use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid field model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("root finder did not converge after {iterations} iterations; final bracket [{lo}, {hi}]")]
    NoConvergence { iterations: usize, lo: f64, hi: f64 },

    #[error("bracket [{lo}, {hi}] does not straddle a sign change")]
    BadBracket { lo: f64, hi: f64 },

    #[error(
        "stationary-point grid too coarse near x = {x}: sign pattern inconsistent after refinement, use a finer grid"
    )]
    GridTooCoarse { x: f64 },

    #[error("point x = {x} is not stationary: |G'(x)| = {gradient:e}")]
    NotStationary { x: f64, gradient: f64 },

    #[error("minimum at x = {x} is degenerate beyond type 3")]
    DegenerateMinimum { x: f64 },

    #[error("stationary point at x = {x} is not a local minimum")]
    NotAMinimum { x: f64 },

    #[error("minima structure outside the phase taxonomy: {0}")]
    Unclassified(String),

    #[error("dilog argument {0} outside [-1, 1]")]
    DilogDomain(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
