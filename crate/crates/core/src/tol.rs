//! Numerical thresholds shared across the crate.
//!
//! Every threshold that decides a verdict lives here so the CLI, the
//! campaign runner and the tests agree on the same numbers.

/// Relative Hermiticity tolerance: `max|M - M†| <= HERMITIAN_REL * (1 + max|M|)`.
pub const HERMITIAN_REL: f64 = 1e-10;

/// Jacobi stops once the off-diagonal Frobenius norm drops below this times `‖M‖_F`.
pub const JACOBI_OFF_REL: f64 = 1e-13;

/// Sweep cap for the Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues of a density operator at or below this are dropped from its spectrum.
pub const RANK_TOL: f64 = 1e-12;

/// Eigenvalues in `[-NEGATIVE_EIGEN_TOL, 0)` are treated as roundoff and clamped to zero.
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-10;

/// Allowed deviation of `Tr ρ` (and of a state's norm) from one.
pub const TRACE_TOL: f64 = 1e-10;

/// Imaginary part allowed in `Tr(Aρ)` for Hermitian `A`, relative to `1 + max|A|`.
pub const IMAG_EXPECTATION_REL: f64 = 1e-10;

/// Variances in `[-NEGATIVE_VARIANCE_TOL, 0)` are clamped to zero.
pub const NEGATIVE_VARIANCE_TOL: f64 = 1e-12;

/// Eigenvalues of `h` closer than this (relative to `1 + max|ω|`) span one eigenspace.
pub const EIGENSPACE_REL: f64 = 1e-9;

/// `Δh` at or below this counts as stationary.
pub const STATIONARY_TOL: f64 = 1e-12;

/// A decay curve with `max|P - 1|` at or below this counts as constant.
pub const CONSTANT_CURVE_TOL: f64 = 1e-10;

/// Default curve-equality tolerance for saturation.
pub const EQ_TOL: f64 = 1e-9;

/// Default tolerance for bound violations.
pub const BOUND_TOL: f64 = 1e-9;

/// Default structural tolerance for intelligent-state detection.
pub const DETECTION_TOL: f64 = 1e-8;

/// Relative eigenvector residual `‖hw - ωw‖ / ‖w‖` accepted by the constructors.
pub const EIGENVECTOR_RESIDUAL: f64 = 1e-9;

/// Two eigenvalues closer than this are degenerate for the constructors.
pub const DEGENERATE_OMEGA_TOL: f64 = 1e-10;

/// Orthonormality tolerance for caller-supplied bases.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Weights of a mixture must sum to one within this.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Central-difference step for first derivatives of decay curves.
pub const FD_STEP_FIRST: f64 = 1e-5;

/// Finite-difference step for `-P''(0)/2`.
pub const FD_STEP_SECOND: f64 = 1e-4;

/// Central-difference step for `dz_c/dx`.
pub const FD_STEP_ODE: f64 = 1e-6;

/// Half-width of the neighborhoods around the kinks of `z_c` excluded from derivative checks.
pub const KINK_EXCLUSION: f64 = 1e-3;

/// Boundary slack for the domain of `-2√(y(1-y))`.
pub const RHS_DOMAIN_SLACK: f64 = 1e-12;

/// A local minimum of `P - ε` within this of zero is a tangential passage.
pub const TOUCH_TOL: f64 = 1e-12;

/// Relative slack on the window edge `Δh|t| = π/2` so grid endpoints stay inside it.
pub const WINDOW_EDGE_REL: f64 = 1e-12;

/// Agreement required between analytic derivatives and their finite differences.
pub const FD_AGREEMENT: f64 = 1e-6;

/// Relative slack of the variance-mixing identity.
pub const MIXING_REL: f64 = 1e-12;
