use thiserror::Error;

use crate::link::SnrModel;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid link budget: {0}")]
    InvalidBudget(String),

    /// An argument fell outside the domain of the formula it feeds.
    #[error("{what} = {value} is outside the valid domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("operation requires {expected} SNR mode, got {got}")]
    ModeMismatch { expected: SnrModel, got: SnrModel },

    #[error("length mismatch: expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("adaptive quadrature did not converge on [{a}, {b}] within {evals} evaluations")]
    QuadratureNonConvergence { a: f64, b: f64, evals: usize },

    #[error("multiplier bisection did not converge after {iterations} iterations (residual {residual:e})")]
    BisectionNonConvergence { iterations: usize, residual: f64 },

    #[error("velocity resampling gave up after {attempts} draws (sigma_v = {sigma_v}, v = {v})")]
    ResampleExhausted {
        attempts: usize,
        sigma_v: f64,
        v: f64,
    },

    #[error("{0}")]
    Config(String),
}
