use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite sample at node {index} (rho = {rho})")]
    NonFinite { index: usize, rho: f64 },

    #[error("weighted integral overflows even after rescaling (log magnitude {log_magnitude})")]
    Overflow { log_magnitude: f64 },

    #[error("profile blew up: |h| exceeded {threshold} at rho = {rho}")]
    BlowUp { rho: f64, threshold: f64 },

    #[error("integrator step size underflow at rho = {rho} (step {step:e})")]
    StepSizeUnderflow { rho: f64, step: f64 },

    #[error("ill-conditioned far-field fit (condition number {condition:e})")]
    IllConditionedFit { condition: f64 },

    #[error("singular tridiagonal system at row {row}")]
    SingularSystem { row: usize },

    #[error("grids do not match")]
    GridMismatch,

    #[error("boundary angles differ: {alpha_a} vs {alpha_b}")]
    BoundaryAngleMismatch { alpha_a: f64, alpha_b: f64 },

    #[error("far fields do not agree: difference {difference:e} at rho = {rho}; relative entropy is undefined")]
    FarFieldMismatch { rho: f64, difference: f64 },

    #[error("fit window is empty: difference is below the noise floor everywhere")]
    EmptyWindow,

    #[error("radius {rho} is outside the grid range [{lo}, {hi}]")]
    OutOfRange { rho: f64, lo: f64, hi: f64 },

    #[error("flow did not converge: final steady residual {residual:e}")]
    NotConverged { residual: f64 },

    #[error("eigenpair {index} did not converge")]
    EigenConvergence { index: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
