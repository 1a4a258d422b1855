use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("malformed matrix: {0}")]
    Shape(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: max |M - M^dagger| = {deviation:e} exceeds {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    ConvergenceFailure { sweeps: usize, residual: f64 },

    #[error("density operator has negative eigenvalue {eigenvalue:e}")]
    NotPositive { eigenvalue: f64 },

    #[error("density operator trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("state vector has norm {norm}, expected 1")]
    NotNormalized { norm: f64 },

    #[error("expectation value has imaginary part {imag:e}")]
    ImaginaryExpectation { imag: f64 },

    #[error("variance {value:e} is negative beyond roundoff")]
    NegativeVariance { value: f64 },

    #[error("vector is not an eigenvector of h: relative residual {residual:e}")]
    NotEigenvector { residual: f64 },

    #[error("eigenvalues coincide (omega = {omega})")]
    DegenerateEigenvalues { omega: f64 },

    #[error("eigenspace of omega = {omega} has dimension {available}, need {needed}")]
    EigenspaceTooSmall { omega: f64, needed: usize, available: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("basis is not orthonormal: max Gram deviation {deviation:e}")]
    NonOrthonormalBasis { deviation: f64 },

    #[error("inconsistent dichotomy verdict: {0}")]
    InconsistentVerdict(String),

    #[error("variance mixing identity violated: residual {residual:e}")]
    IdentityViolation { residual: f64 },

    #[error("sample must start at x = 0 with v = 1, found x = {x0}, v = {v0}")]
    InitialConditionViolation { x0: f64, v0: f64 },

    #[error("v({xi}) = {eta} does not exceed cos^2(xi) = {bound} by more than the tolerance")]
    NotStrict { xi: f64, eta: f64, bound: f64 },

    #[error("passage time {t} lies below the lower bound {bound}")]
    PassageBelowBound { t: f64, bound: f64 },

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("domain error: {0}")]
    DomainError(String),
}
