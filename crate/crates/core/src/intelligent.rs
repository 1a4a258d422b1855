//! Construction and detection of intelligent states, and the
//! decomposition of a mixture's energy variance.
//!
//! A pure state saturates the Fleming bound for all times exactly when
//! it is an equal-weight superposition of two eigenvectors of `h` with
//! distinct eigenvalues. A mixed state saturates it exactly when every
//! eigenvector `ψ_k` of `ρ` splits as `φ_{k,1} + φ_{k,2}` across the same
//! two eigenspaces with `⟨φ_{k,ε}, φ_{l,η}⟩ = ½ δ_{kl} δ_{εη}`.

use serde::{Deserialize, Serialize};

use crate::dynamics::Hamiltonian;
use crate::error::{Error, Result};
use crate::linalg::{inner, norm, ComplexMatrix, C64};
use crate::states::{validate_density, variance, vector_mean_variance, DensityOperator, PureState};
use crate::tol;

/// Parameters of a mixed intelligent state
/// `ρ = Σ_k λ_k ψ_k ψ_k†`, `ψ_k = (basis1[k] + basis2[k]) / √2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedIntelligentSpec {
    pub dim: usize,
    pub omega1: f64,
    pub omega2: f64,
    pub weights: Vec<f64>,
    /// Orthonormal vectors in the `ω₁`-eigenspace.
    pub basis1: Vec<Vec<C64>>,
    /// Orthonormal vectors in the `ω₂`-eigenspace.
    pub basis2: Vec<Vec<C64>>,
}

/// `(Δh)²_ρ = Σ λ_k (Δh)²_k + ½ Σ_{k,l} λ_k λ_l (⟨h⟩_k - ⟨h⟩_l)²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceMixing {
    pub total: f64,
    pub within: f64,
    pub between: f64,
    pub mean_per_component: Vec<f64>,
}

impl VarianceMixing {
    pub fn residual(&self) -> f64 {
        self.total - self.within - self.between
    }
}

/// Eigenspace of `h` containing `w` and the normalized projection of `w`
/// onto it. The candidate eigenvalue is the one nearest to the Rayleigh
/// quotient, never a caller-declared value.
fn eigen_membership(h: &Hamiltonian, w: &[C64]) -> Result<(usize, Vec<C64>)> {
    if w.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: w.len() });
    }
    let wn = norm(w);
    if !wn.is_finite() || wn <= 0.0 {
        return Err(Error::NotEigenvector { residual: f64::INFINITY });
    }
    let hw = h.matrix().apply(w);
    let rayleigh = inner(w, &hw).re / (wn * wn);
    let j = h.nearest_eigenspace(rayleigh);
    let space = &h.eigenspaces()[j];
    let residual = norm(&hw.iter().zip(w).map(|(a, b)| a - b * space.value).collect::<Vec<_>>()) / wn;
    if residual > tol::EIGENVECTOR_RESIDUAL {
        return Err(Error::NotEigenvector { residual });
    }
    let p = h.eigen().project(space, w);
    let pn = norm(&p);
    Ok((j, p.into_iter().map(|z| z / pn).collect()))
}

/// `φ = (u/‖u‖ + v/‖v‖) / √2` for eigenvectors `u, v` with distinct eigenvalues.
pub fn construct_pure_intelligent(u: &[C64], v: &[C64], h: &Hamiltonian) -> Result<PureState> {
    let (ju, pu) = eigen_membership(h, u)?;
    let (jv, pv) = eigen_membership(h, v)?;
    let (wu, wv) = (h.eigenspaces()[ju].value, h.eigenspaces()[jv].value);
    if ju == jv || (wu - wv).abs() <= tol::DEGENERATE_OMEGA_TOL {
        return Err(Error::DegenerateEigenvalues { omega: wu });
    }
    let phi: Vec<C64> =
        pu.iter().zip(&pv).map(|(a, b)| (a + b) * std::f64::consts::FRAC_1_SQRT_2).collect();
    PureState::normalized(phi)
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidWeights("no weights given".into()));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w <= 0.0) {
        return Err(Error::InvalidWeights(format!("weight {w} is not positive")));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > tol::WEIGHT_SUM_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {sum}, expected 1")));
    }
    Ok(())
}

fn max_gram_deviation(vectors: &[Vec<C64>]) -> f64 {
    let mut worst = 0.0_f64;
    for (k, a) in vectors.iter().enumerate() {
        for (l, b) in vectors.iter().enumerate() {
            let want = if k == l { 1.0 } else { 0.0 };
            worst = worst.max((inner(a, b) - want).norm());
        }
    }
    worst
}

/// Puts every vector of `basis` into one eigenspace of `h` matching `omega`.
fn membership_of_basis(h: &Hamiltonian, basis: &[Vec<C64>], omega: f64) -> Result<(usize, Vec<Vec<C64>>)> {
    let mut space = None;
    let mut projected = Vec::with_capacity(basis.len());
    for b in basis {
        let (j, p) = eigen_membership(h, b)?;
        let value = h.eigenspaces()[j].value;
        if (value - omega).abs() > tol::EIGENVECTOR_RESIDUAL * (1.0 + omega.abs()) || space.is_some_and(|s| s != j)
        {
            let hb = h.matrix().apply(b);
            let r = norm(&hb.iter().zip(b).map(|(x, y)| x - y * omega).collect::<Vec<_>>()) / norm(b);
            return Err(Error::NotEigenvector { residual: r });
        }
        space = Some(j);
        projected.push(p);
    }
    Ok((space.expect("basis is non-empty"), projected))
}

/// `ρ = Σ_k λ_k ψ_k ψ_k†` with `ψ_k = (basis1[k] + basis2[k]) / √2`.
pub fn construct_mixed_intelligent(spec: &MixedIntelligentSpec, h: &Hamiltonian) -> Result<DensityOperator> {
    check_weights(&spec.weights)?;
    let n = spec.weights.len();
    if spec.basis1.len() != n || spec.basis2.len() != n {
        return Err(Error::InvalidWeights(format!(
            "{n} weights but bases of size {} and {}",
            spec.basis1.len(),
            spec.basis2.len()
        )));
    }
    if spec.dim != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: spec.dim });
    }
    if (spec.omega2 - spec.omega1).abs() <= tol::DEGENERATE_OMEGA_TOL {
        return Err(Error::DegenerateEigenvalues { omega: spec.omega1 });
    }
    if spec.omega2 < spec.omega1 {
        return Err(Error::DomainError(format!(
            "omega2 = {} must exceed omega1 = {}",
            spec.omega2, spec.omega1
        )));
    }

    let (j1, b1) = membership_of_basis(h, &spec.basis1, spec.omega1)?;
    let (j2, b2) = membership_of_basis(h, &spec.basis2, spec.omega2)?;
    for (j, omega) in [(j1, spec.omega1), (j2, spec.omega2)] {
        let available = h.eigenspaces()[j].multiplicity();
        if n > available {
            return Err(Error::EigenspaceTooSmall { omega, needed: n, available });
        }
    }
    for basis in [&b1, &b2] {
        let deviation = max_gram_deviation(basis);
        if deviation > tol::ORTHONORMAL_TOL {
            return Err(Error::NonOrthonormalBasis { deviation });
        }
    }

    let mut m = ComplexMatrix::zeros(spec.dim);
    for ((lambda, u), v) in spec.weights.iter().zip(&b1).zip(&b2) {
        let psi: Vec<C64> = u.iter().zip(v).map(|(a, b)| (a + b) * std::f64::consts::FRAC_1_SQRT_2).collect();
        m = &m + &ComplexMatrix::outer(&psi, &psi).scale_real(*lambda);
    }
    validate_density(&m.hermitian_part(), tol::RANK_TOL)
}

/// Structural intelligent-state test.
///
/// Returns `true` with the recovered parameters when exactly two
/// eigenvalues of `h` carry weight in the range of `ρ` and every
/// component pair satisfies `⟨φ_{k,ε}, φ_{l,η}⟩ = ½ δ_{kl} δ_{εη}` within `tol`.
pub fn is_intelligent(
    rho: &DensityOperator,
    h: &Hamiltonian,
    tol: f64,
) -> Result<(bool, Option<MixedIntelligentSpec>)> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: rho.dim() });
    }
    let spaces = h.eigenspaces();
    // components[k][j] = projection of ψ_k onto eigenspace j
    let components: Vec<Vec<Vec<C64>>> = rho
        .vectors()
        .iter()
        .map(|psi| spaces.iter().map(|s| h.eigen().project(s, psi)).collect())
        .collect();
    let carrying: Vec<usize> = (0..spaces.len())
        .filter(|&j| {
            components.iter().any(|c| c[j].iter().map(|z| z.norm_sqr()).sum::<f64>() > tol)
        })
        .collect();
    if carrying.len() != 2 {
        return Ok((false, None));
    }
    let (j1, j2) = (carrying[0], carrying[1]);

    for (k, ck) in components.iter().enumerate() {
        for (l, cl) in components.iter().enumerate() {
            for &je in &[j1, j2] {
                for &jn in &[j1, j2] {
                    let want = if k == l && je == jn { 0.5 } else { 0.0 };
                    if (inner(&ck[je], &cl[jn]) - want).norm() > tol {
                        return Ok((false, None));
                    }
                }
            }
        }
    }

    let sqrt2 = std::f64::consts::SQRT_2;
    let spec = MixedIntelligentSpec {
        dim: rho.dim(),
        omega1: spaces[j1].value,
        omega2: spaces[j2].value,
        weights: rho.weights().to_vec(),
        basis1: components.iter().map(|c| c[j1].iter().map(|z| z * sqrt2).collect()).collect(),
        basis2: components.iter().map(|c| c[j2].iter().map(|z| z * sqrt2).collect()).collect(),
    };
    Ok((true, Some(spec)))
}

/// Splits `(Δh)²_ρ` into the mean of the component variances and the
/// spread of the component means. `total` comes from the operator
/// variance, the other two from the spectral components of `ρ`.
pub fn variance_mixing(rho: &DensityOperator, h: &Hamiltonian) -> Result<VarianceMixing> {
    let total = variance(rho, h.matrix())?;
    let stats: Vec<(f64, f64)> = rho.vectors().iter().map(|psi| vector_mean_variance(h.matrix(), psi)).collect();
    let weights = rho.weights();
    let within: f64 = weights.iter().zip(&stats).map(|(l, (_, v))| l * v).sum();
    let mut between = 0.0;
    for (lk, (mk, _)) in weights.iter().zip(&stats) {
        for (ll, (ml, _)) in weights.iter().zip(&stats) {
            between += lk * ll * (mk - ml).powi(2);
        }
    }
    between *= 0.5;
    let mix = VarianceMixing {
        total,
        within,
        between,
        mean_per_component: stats.iter().map(|s| s.0).collect(),
    };
    let residual = mix.residual();
    if residual.abs() > tol::MIXING_REL * (1.0 + total.abs()) {
        return Err(Error::IdentityViolation { residual });
    }
    Ok(mix)
}
