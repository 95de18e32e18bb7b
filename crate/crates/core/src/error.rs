use thiserror::Error;

use crate::partition::Partition;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cannot parse partition {input:?}: {reason}")]
    ParsePartition { input: String, reason: String },

    #[error("cannot parse rational {input:?}")]
    ParseRational { input: String },

    #[error("parameter {name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: String },

    #[error("partition {partition} has {length} parts but only {m} variables are available")]
    TooManyParts {
        partition: Partition,
        length: usize,
        m: usize,
    },

    #[error("polynomial is not homogeneous (found weights {first} and {second})")]
    NotHomogeneous { first: u32, second: u32 },

    #[error("degenerate parameter: d({kappa}) = d({mu}) = {value} with {mu} below {kappa}")]
    DegenerateEigenvalue {
        kappa: Partition,
        mu: Partition,
        value: String,
    },

    #[error("internal error: Laplace-Beltrami image of E_{0} is not symmetric")]
    NotSymmetric(Partition),

    #[error("internal error: divided difference left a nonzero remainder for E_{0}")]
    InexactDivision(Partition),

    #[error("the printed recurrences exist only for m = 2, 3, 4 (got m = {0})")]
    AppendixDimension(usize),

    #[error("beta must be one of 1, 2, 4 for distribution formulas (got {0})")]
    UnsupportedBeta(String),

    #[error("multivariate gamma pole at index {index}: argument {argument} is a nonpositive integer")]
    GammaPole { index: usize, argument: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{name} = {value} lies outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("truncation insufficient: last k-block has relative magnitude {last_term:e}; increase K")]
    TruncationInsufficient { last_term: f64 },

    #[error("truncated CDF is not monotone near x = {x}; increase K")]
    NonMonotone { x: f64 },

    #[error("target probability {alpha} exceeds the truncated mass {mass}; increase K")]
    QuantileUnreachable { alpha: f64, mass: f64 },

    #[error("empty sample")]
    EmptySample,

    #[error("sample variance is zero")]
    DegenerateVariance,

    #[error("eigen-solver failed on {failures} of {reps} replications")]
    EigenFailures { failures: usize, reps: usize },

    #[error("snapshot error: {0}")]
    Snapshot(String),

    #[error("i/o error: {0}")]
    Io(String),
}
