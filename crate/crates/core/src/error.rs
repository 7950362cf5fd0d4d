use thiserror::Error;

/// Errors raised while building profiles, maps and functional-equation solutions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("unknown kind `{0}`")]
    UnknownKind(String),

    #[error("x = {x} lies outside the domain")]
    OutOfDomain { x: f64 },

    #[error("depth profile is not differentiable at x = {x}")]
    NonDifferentiable { x: f64 },

    #[error("map is not invertible: {0}")]
    NotInvertible(String),

    #[error("iteration cap of {cap} exceeded")]
    IterationCapExceeded { cap: usize },

    #[error("seed jump mismatch: {0}")]
    SeedJumpMismatch(String),

    #[error("invalid seed: {0}")]
    InvalidSeed(String),

    /// The forward map is an involution of the given order, so no Abel
    /// solution with non-zero Q exists.
    #[error("forward map is an involution of order {order}; Abel equation with Q = {q} has no solution")]
    InvolutionObstruction { order: usize, q: f64 },

    #[error("function is not positive at x = {x}")]
    NotPositive { x: f64 },

    #[error("Schröder scale s must differ from 1")]
    ScaleIsOne,

    #[error("function does not satisfy the Schröder equation (max residual {max_residual:e})")]
    NotSchroderSolution { max_residual: f64 },

    #[error("period {period} is not a positive integer multiple of |Q| = {q}")]
    PeriodMismatch { period: f64, q: f64 },

    #[error("invalid mode numbers m = {m}, k = {k}: need 0 < m/k < 1/2")]
    InvalidModeNumbers { m: i64, k: i64 },

    #[error("not an involution of order {order} (max deviation {max_deviation:e})")]
    NotInvolution { order: usize, max_deviation: f64 },

    #[error("symmetric function is not invariant under cyclic rotation (max deviation {max_deviation:e})")]
    NotCyclicInvariant { max_deviation: f64 },

    #[error("x = {x} lies outside the extension domain")]
    OutOfExtensionDomain { x: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
