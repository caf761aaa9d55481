use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("operator is not positive definite (eigenvalue range [{min:e}, {max:e}])")]
    NotPositiveDefinite { min: f64, max: f64 },

    #[error("operator is not a density (trace {0})")]
    NotDensity(f64),

    #[error("vector is not normalizable (norm {0:e})")]
    NotUnitVector(f64),

    #[error("negative power of a singular operator requires the pseudo-power")]
    Singular,

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal {off_diagonal:e})")]
    SolverFailure { sweeps: usize, off_diagonal: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix format error: {0}")]
    MatrixFormat(String),

    #[error("function evaluation failed: {0}")]
    FunctionEvaluation(String),

    #[error("scalar function has no derivative")]
    MissingDerivative,

    #[error("probe fit residual {residual:e} exceeds {threshold:e}")]
    IllConditionedProbe { residual: f64, threshold: f64 },

    #[error("oracle answers are inconsistent (coefficient {0:e})")]
    InconsistentOracle(f64),

    #[error("optimizer failed to converge: {0}")]
    ConvergenceFailure(String),

    #[error("recovered eigenvalue {0} outside (0, inf)")]
    EigenvalueOutOfRange(f64),

    #[error("map violates transition probabilities by {0:e}")]
    NotASymmetry(f64),

    #[error("map matches neither the unitary nor the antiunitary prediction ({0})")]
    AmbiguousKind(String),
}

pub type Result<T> = std::result::Result<T, Error>;
