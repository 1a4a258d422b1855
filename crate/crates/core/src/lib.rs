//! Survival probabilities of finite-dimensional quantum states and the
//! Fleming bound `P_ρ(t) >= cos²(Δh t)` for `Δh|t| <= π/2`, extended to
//! mixed states.
//!
//! Everything is exact spectral calculus on dense complex matrices with
//! `ħ = 1`:
//!
//! - [`linalg`]: matrices and a Jacobi Hermitian eigensolver.
//! - [`states`]: density operators, range projections, moments.
//! - [`dynamics`]: evolution, survival probabilities and their derivatives.
//! - [`bounds`]: the bound, the Mandelstam–Tamm inequality, the
//!   saturation dichotomy and passage times.
//! - [`intelligent`]: states that saturate the bound.
//! - [`odecmp`]: the comparison-ODE view of the bound.
//! - [`campaign`]: seeded randomized verification.

pub mod bounds;
pub mod campaign;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod intelligent;
pub mod linalg;
pub mod odecmp;
pub mod states;
pub mod tol;

pub use bounds::{BoundReport, DichotomyVerdict, VerdictKind};
pub use dynamics::{DecayCurve, Hamiltonian};
pub use error::{Error, Result};
pub use intelligent::{MixedIntelligentSpec, VarianceMixing};
pub use linalg::{ComplexMatrix, HermitianEigen, C64};
pub use states::{DensityOperator, Projector, PureState};
