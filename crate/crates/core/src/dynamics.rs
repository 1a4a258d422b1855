//! Unitary evolution and survival probabilities.
//!
//! All propagators are exact spectral exponentials built from the
//! cached eigendecomposition of the Hamiltonian, so nothing here has a
//! time-step error.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::fleming_bound;
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, inner, matmul, trace_of_product, unitary_from_hamiltonian, ComplexMatrix, Eigenspace,
    HermitianEigen, C64,
};
use crate::states::{vector_mean_variance, DensityOperator, PureState};
use crate::tol;

/// Validated Hermitian generator with its cached eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    matrix: ComplexMatrix,
    eigen: HermitianEigen,
    spaces: Vec<Eigenspace>,
}

impl Hamiltonian {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let eigen = hermitian_eig(&matrix)?;
        let spaces = eigen.eigenspaces();
        Ok(Self { matrix: matrix.hermitian_part(), eigen, spaces })
    }

    pub fn diagonal(omegas: &[f64]) -> Self {
        Self::new(ComplexMatrix::from_diagonal(omegas)).expect("real diagonal matrices are Hermitian")
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    /// Distinct eigenvalues with the columns spanning each eigenspace.
    pub fn eigenspaces(&self) -> &[Eigenspace] {
        &self.spaces
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `e^{-iht}`.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        unitary_from_hamiltonian(&self.eigen, t)
    }

    /// `h + cI` for real `c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self::new(self.matrix.shifted(c)).expect("shift preserves Hermiticity")
    }

    /// `-h`, which maps `t < 0` onto `t > 0`.
    pub fn negated(&self) -> Self {
        Self::new(self.matrix.scale_real(-1.0)).expect("negation preserves Hermiticity")
    }

    /// Index of the eigenspace whose eigenvalue is nearest to `omega`.
    pub fn nearest_eigenspace(&self, omega: f64) -> usize {
        let mut best = 0;
        for (i, s) in self.spaces.iter().enumerate() {
            if (s.value - omega).abs() < (self.spaces[best].value - omega).abs() {
                best = i;
            }
        }
        best
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: dim });
        }
        Ok(())
    }
}

/// `(Δh)_ρ`, the standard deviation of `h` in `ρ`.
pub fn energy_spread(rho: &DensityOperator, h: &Hamiltonian) -> Result<f64> {
    Ok(crate::states::variance(rho, h.matrix())?.sqrt())
}

/// `ρ_t = e^{-iht} ρ e^{iht}`.
///
/// The spectrum of `ρ_t` is carried over from `ρ` with evolved
/// eigenvectors instead of being recomputed.
pub fn evolve(rho: &DensityOperator, h: &Hamiltonian, t: f64) -> Result<DensityOperator> {
    h.check_dim(rho.dim())?;
    let u = h.propagator(t);
    let m = matmul(&matmul(&u, rho.matrix())?, &u.adjoint())?;
    let vectors = rho.vectors().iter().map(|psi| u.apply(psi)).collect();
    Ok(DensityOperator::from_parts(m.hermitian_part(), rho.weights().to_vec(), vectors))
}

/// `A_φ(t) = ⟨φ, e^{-iht} φ⟩`.
pub fn survival_amplitude(phi: &PureState, h: &Hamiltonian, t: f64) -> Result<C64> {
    h.check_dim(phi.dim())?;
    let u = h.propagator(t);
    Ok(inner(phi.vector(), &u.apply(phi.vector())))
}

/// `P_φ(t) = |A_φ(t)|²`.
pub fn survival_probability_pure(phi: &PureState, h: &Hamiltonian, t: f64) -> Result<f64> {
    Ok(survival_amplitude(phi, h, t)?.norm_sqr())
}

/// `P_ρ(t) = Tr(Π e^{-iht} ρ e^{iht})`, unclamped.
pub fn survival_probability_mixed(rho: &DensityOperator, h: &Hamiltonian, t: f64) -> Result<f64> {
    h.check_dim(rho.dim())?;
    let u = h.propagator(t);
    let rho_t = matmul(&matmul(&u, rho.matrix())?, &u.adjoint())?;
    let z = trace_of_product(&rho.projector().matrix, &rho_t)?;
    debug_assert!(z.im.abs() <= 1e-10, "Tr(Π ρ_t) has imaginary part {}", z.im);
    Ok(z.re)
}

/// One spectral term `λ_α e^{-iω_α t}` of the survival amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralTerm {
    pub frequency: f64,
    pub weight: f64,
}

/// `A_φ(t) = Σ_α λ_α e^{-iω_α t}` with distinct ascending `ω_α` and `λ_α = ‖φ_α‖² > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PureSpectralRep {
    pub terms: Vec<SpectralTerm>,
}

impl PureSpectralRep {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ_α λ_α e^{-iω_α t}`.
    pub fn amplitude(&self, t: f64) -> C64 {
        self.terms.iter().map(|s| C64::from_polar(s.weight, -s.frequency * t)).sum()
    }
}

/// Splits `φ` into its `h`-eigenspace components and records their weights.
pub fn pure_spectral_rep(phi: &PureState, h: &Hamiltonian) -> Result<PureSpectralRep> {
    h.check_dim(phi.dim())?;
    let terms = h
        .eigenspaces()
        .iter()
        .filter_map(|space| {
            let comp = h.eigen().project(space, phi.vector());
            let weight: f64 = comp.iter().map(|z| z.norm_sqr()).sum();
            (weight > tol::RANK_TOL).then_some(SpectralTerm { frequency: space.value, weight })
        })
        .collect();
    Ok(PureSpectralRep { terms })
}

/// `P_φ(t) = Σ_{α,β} λ_α λ_β cos((ω_α - ω_β) t)`.
pub fn spectral_rep_eval(rep: &PureSpectralRep, t: f64) -> f64 {
    let mut acc = 0.0;
    for a in &rep.terms {
        for b in &rep.terms {
            acc += a.weight * b.weight * ((a.frequency - b.frequency) * t).cos();
        }
    }
    acc
}

/// `P'_ρ(t) = i Tr([h, Π] ρ_t)`.
pub fn decay_derivative(rho: &DensityOperator, h: &Hamiltonian, t: f64) -> Result<f64> {
    h.check_dim(rho.dim())?;
    let comm = h.matrix().commutator(&rho.projector().matrix)?;
    let rho_t = evolve(rho, h, t)?;
    let z = trace_of_product(&comm, rho_t.matrix())? * C64::i();
    Ok(z.re)
}

/// Diagonal and cross contributions to `P_ρ(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossTerms {
    /// `Σ_k λ_k P_{ψ_k}(t)`.
    pub diagonal: f64,
    /// `Σ_{k≠l} λ_l |⟨ψ_k, e^{-iht} ψ_l⟩|²`.
    pub cross: f64,
}

impl CrossTerms {
    pub fn total(&self) -> f64 {
        self.diagonal + self.cross
    }
}

pub fn cross_term_decomposition(rho: &DensityOperator, h: &Hamiltonian, t: f64) -> Result<CrossTerms> {
    h.check_dim(rho.dim())?;
    let u = h.propagator(t);
    let evolved: Vec<Vec<C64>> = rho.vectors().iter().map(|psi| u.apply(psi)).collect();
    let mut diagonal = 0.0;
    let mut cross = 0.0;
    for (k, psi_k) in rho.vectors().iter().enumerate() {
        for (l, (lambda_l, u_psi_l)) in rho.weights().iter().zip(&evolved).enumerate() {
            let p = lambda_l * inner(psi_k, u_psi_l).norm_sqr();
            if k == l {
                diagonal += p;
            } else {
                cross += p;
            }
        }
    }
    Ok(CrossTerms { diagonal, cross })
}

/// `-P''_ρ(0)/2 = Σ_k λ_k (Δh)²_{ψ_k} - Σ_{k≠l} λ_l |⟨ψ_k, h ψ_l⟩|²`.
pub fn second_derivative_at_zero(rho: &DensityOperator, h: &Hamiltonian) -> Result<f64> {
    h.check_dim(rho.dim())?;
    let hm = h.matrix();
    let h_psi: Vec<Vec<C64>> = rho.vectors().iter().map(|psi| hm.apply(psi)).collect();
    let mut within = 0.0;
    let mut cross = 0.0;
    for (k, psi_k) in rho.vectors().iter().enumerate() {
        let (_, var_k) = vector_mean_variance(hm, psi_k);
        within += rho.weights()[k] * var_k;
        for (l, h_psi_l) in h_psi.iter().enumerate() {
            if k != l {
                cross += rho.weights()[l] * inner(psi_k, h_psi_l).norm_sqr();
            }
        }
    }
    Ok(within - cross)
}

/// `P_ρ(t)` in the eigenbasis of `h`:
/// `Σ_{r,s} e^{i(ω_r - ω_s)t} ⟨Φ_r, Π Φ_s⟩ ⟨Φ_s, ρ Φ_r⟩`.
///
/// Precomputes the coefficient matrix once so each evaluation costs
/// `O(q²)`; used for dense scans and as an independent route to `P_ρ`.
#[derive(Debug, Clone)]
pub struct SpectralDecay {
    omegas: Vec<f64>,
    coeffs: ComplexMatrix,
}

impl SpectralDecay {
    pub fn new(rho: &DensityOperator, h: &Hamiltonian) -> Result<Self> {
        h.check_dim(rho.dim())?;
        let v = &h.eigen().eigenvectors;
        let vd = v.adjoint();
        let pi = matmul(&matmul(&vd, &rho.projector().matrix)?, v)?;
        let r = matmul(&matmul(&vd, rho.matrix())?, v)?;
        let q = rho.dim();
        let mut coeffs = ComplexMatrix::zeros(q);
        for i in 0..q {
            for j in 0..q {
                coeffs[(i, j)] = pi[(i, j)] * r[(j, i)];
            }
        }
        Ok(Self { omegas: h.eigen().eigenvalues.clone(), coeffs })
    }

    fn phases(&self, t: f64) -> Vec<C64> {
        self.omegas.iter().map(|w| C64::from_polar(1.0, w * t)).collect()
    }

    pub fn value(&self, t: f64) -> f64 {
        let a = self.phases(t);
        let q = a.len();
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..q {
            for s in 0..q {
                acc += a[r] * a[s].conj() * self.coeffs[(r, s)];
            }
        }
        acc.re
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let a = self.phases(t);
        let q = a.len();
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..q {
            for s in 0..q {
                let w = self.omegas[r] - self.omegas[s];
                acc += a[r] * a[s].conj() * self.coeffs[(r, s)] * C64::new(0.0, w);
            }
        }
        acc.re
    }
}

/// Sampled decay curve with the matching Fleming bound.
///
/// `values` are raw; `bound` and `margin` are `None` outside the window
/// `Δh|t| <= π/2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub delta_h: f64,
    pub bound: Vec<Option<f64>>,
    pub margin: Vec<Option<f64>>,
}

impl DecayCurve {
    pub fn from_samples(times: Vec<f64>, values: Vec<f64>, delta_h: f64) -> Self {
        let bound: Vec<Option<f64>> = times.iter().map(|&t| fleming_bound(delta_h, t)).collect();
        let margin = values.iter().zip(&bound).map(|(p, b)| b.map(|b| p - b)).collect();
        Self { times, values, delta_h, bound, margin }
    }

    /// Evaluates `P_ρ` on `times`, in parallel with results kept in grid order.
    pub fn evaluate(rho: &DensityOperator, h: &Hamiltonian, times: &[f64]) -> Result<Self> {
        let delta_h = energy_spread(rho, h)?;
        let values = times
            .par_iter()
            .map(|&t| survival_probability_mixed(rho, h, t))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self::from_samples(times.to_vec(), values, delta_h))
    }

    /// Values clamped into `[0, 1]`, for reporting only.
    pub fn clamped_values(&self) -> Vec<f64> {
        self.values.iter().map(|p| p.clamp(0.0, 1.0)).collect()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `n >= 2` evenly spaced points from `a` to `b` with both endpoints exact.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    let step = (b - a) / (n - 1) as f64;
    let mut out: Vec<f64> = (0..n).map(|i| a + step * i as f64).collect();
    out[n - 1] = b;
    out
}

/// Central first difference of `P_ρ` with step `1e-5`.
pub fn finite_difference_derivative(rho: &DensityOperator, h: &Hamiltonian, t: f64) -> Result<f64> {
    let s = tol::FD_STEP_FIRST;
    let plus = survival_probability_mixed(rho, h, t + s)?;
    let minus = survival_probability_mixed(rho, h, t - s)?;
    Ok((plus - minus) / (2.0 * s))
}

/// `-P''_ρ(0)/2` from the symmetric second difference with step `1e-4`,
/// `(1 - (P(ε) + P(-ε))/2) / ε²`. For even `P` this is `(1 - P(ε))/ε²`.
pub fn finite_difference_curvature(rho: &DensityOperator, h: &Hamiltonian) -> Result<f64> {
    let e = tol::FD_STEP_SECOND;
    let plus = survival_probability_mixed(rho, h, e)?;
    let minus = survival_probability_mixed(rho, h, -e)?;
    Ok((1.0 - 0.5 * (plus + minus)) / (e * e))
}
