use thiserror::Error;

/// Errors produced by the geometry, integration and surface routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("non-finite field value at finite-difference stencil point (coordinate {coordinate}, offset {offset:+e})")]
    NonFiniteStencil { coordinate: usize, offset: f64 },

    #[error("degenerate population: total N = {total} must be > 0")]
    DegeneratePopulation { total: f64 },

    #[error("negative compartment {index} = {value} in strict mode")]
    NegativeCompartment { index: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    EigenNonConvergence { iterations: usize },

    #[error("eigenvalue consistency check failed: |sum(lambda) - trace| = {residual:e}")]
    EigenInconsistent { residual: f64 },

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("step size underflow at t = {t} (h = {h:e} < {h_min:e})")]
    StepUnderflow { t: f64, h: f64, h_min: f64 },

    #[error("invalid projection: {0}")]
    InvalidProjection(String),

    #[error("grid node {node:?} has degenerate population N = {total}")]
    DegenerateGridNode { node: [usize; 3], total: f64 },

    #[error("trajectory too short: {0} samples, at least 3 required")]
    TooFewSamples(usize),

    #[error("trajectory is not uniformly sampled (step {index} differs)")]
    NonUniformSampling { index: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
