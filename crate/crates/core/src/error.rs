//! Crate-wide error type.

/// Errors shared across all modules of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("{context}: index {index} out of range 1..={max}")]
    IndexOutOfRange {
        context: &'static str,
        index: usize,
        max: usize,
    },

    /// The diagonalizability assumption fails numerically: either the
    /// reconstruction residual of `V diag(lambda) V^-1` is above tolerance or
    /// the eigenvector basis is too ill-conditioned to invert.
    #[error(
        "shift operator is numerically defective or ill-conditioned \
         (reconstruction residual {residual:.3e}, cond(V) {condition:.3e})"
    )]
    DefectiveOrIllConditioned { residual: f64, condition: f64 },

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("shift operator is not a directed-cycle adjacency matrix")]
    NotDirectedCycle,

    #[error("invalid frequency support: {reason}")]
    InvalidSupport { reason: String },

    #[error("invalid selection plan: {reason}")]
    InvalidPlan { reason: String },

    /// A square interpolation system cannot be solved reliably; this node /
    /// plan combination does not recover this support.
    #[error("interpolation system is singular or ill-conditioned (cond {condition:.3e})")]
    SingularSystem { condition: f64 },

    /// A recovery-condition check failed and the caller did not force the
    /// interpolation through.
    #[error("recovery conditions violated: {clause}")]
    ConditionsViolated { clause: String },

    #[error("noise covariance is singular or ill-conditioned (cond {condition:.3e})")]
    SingularNoiseCovariance { condition: f64 },

    #[error("normal equations are singular or ill-conditioned (cond {condition:.3e})")]
    SingularNormalEquations { condition: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("invalid noise model: {0}")]
    InvalidModel(String),

    #[error("enumeration budget exceeded: {reason}")]
    BudgetExceeded { reason: String },

    #[error("no solution with at most {k_max} active frequencies fits the samples")]
    Infeasible { k_max: usize },

    #[error("solver did not converge after {iterations} iterations (last change {last_change:.3e})")]
    NoConvergence { iterations: usize, last_change: f64 },

    #[error("sensing matrix has zero column(s) {columns:?}")]
    ZeroColumn { columns: Vec<usize> },

    #[error("node {node} has no incoming neighbors; cannot take {requested} shift observations")]
    IsolatedNode { node: usize, requested: usize },

    #[error("no connected graph realization found in {attempts} attempts")]
    ConnectivityBudgetExceeded { attempts: usize },

    #[error("malformed table: {0}")]
    MalformedTable(String),

    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
