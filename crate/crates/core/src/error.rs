use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("analytic partial derivatives are required for {0}")]
    MissingAnalyticPartials(String),

    #[error("transition denominator vanishes ({value:e}); point leaves the chart overlap")]
    DenominatorVanishes { value: f64 },

    #[error("chart singularity: time component {value:e} of the tangent vector is too small")]
    ChartSingularity { value: f64 },

    #[error("superluminal three-velocity: |v|^2 = {speed_sq}")]
    SuperluminalInput { speed_sq: f64 },

    #[error("metric is not invertible at {0:?}")]
    MetricInversion(Vec<f64>),

    #[error("metric invariant violated: {0}")]
    InvalidMetric(String),

    #[error("Jacobian is not invertible at {0:?}")]
    NonInvertibleJacobian(Vec<f64>),

    #[error("initial state is off the constraint surface: residual {residual:e} > {tolerance:e}")]
    OffShell { residual: f64, tolerance: f64 },

    #[error("implicit step did not converge after {iterations} iterations (last update {update:e})")]
    ImplicitSolveDiverged { iterations: usize, update: f64 },

    #[error("state became non-finite at step {step}")]
    NonFiniteState { step: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("operator requires an affine observable; use the quadratic operator for higher momentum powers")]
    QuadraticRequired,

    #[error("coefficient matrix is not symmetric at {at:?} (|a - a^T| = {defect:e})")]
    AsymmetricCoefficients { at: Vec<f64>, defect: f64 },

    #[error("iterative linear solve failed to reach {tolerance:e} in {iterations} iterations (residual {residual:e})")]
    LinearSolveDiverged { iterations: usize, residual: f64, tolerance: f64 },

    #[error("Hamiltonian operator fails the symmetry admission check: residual {residual:e} > {threshold:e}")]
    NonSymmetricHamiltonian { residual: f64, threshold: f64 },

    #[error("CFL violation: dt/h = {ratio} exceeds bound {bound}")]
    CflViolation { ratio: f64, bound: f64 },

    #[error("run too short: {0}")]
    InsufficientRunLength(String),

    #[error("invalid configuration at `{path}`: {message}")]
    ConfigInvalid { path: String, message: String },

    #[error("expression error in `{expr}`: {message}")]
    Expression { expr: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigInvalid { path: path.into(), message: message.into() }
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
