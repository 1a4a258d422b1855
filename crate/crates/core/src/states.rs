//! Validated pure states and density operators.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, inner, matmul, norm, trace_of_product, ComplexMatrix, C64};
use crate::tol;

/// Unit vector `φ` with `|‖φ‖ - 1| <= 1e-10`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    vector: Vec<C64>,
}

impl PureState {
    pub fn new(vector: Vec<C64>) -> Result<Self> {
        check_finite(&vector)?;
        let n = norm(&vector);
        if vector.is_empty() || (n - 1.0).abs() > tol::TRACE_TOL {
            return Err(Error::NotNormalized { norm: n });
        }
        Ok(Self { vector })
    }

    /// Rescales any nonzero vector to unit norm.
    pub fn normalized(vector: Vec<C64>) -> Result<Self> {
        check_finite(&vector)?;
        let n = norm(&vector);
        if vector.is_empty() || n == 0.0 {
            return Err(Error::NotNormalized { norm: n });
        }
        Ok(Self { vector: vector.into_iter().map(|z| z / n).collect() })
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn vector(&self) -> &[C64] {
        &self.vector
    }

    /// `φ φ†` as a validated density operator.
    pub fn to_density(&self) -> DensityOperator {
        let m = ComplexMatrix::outer(&self.vector, &self.vector);
        DensityOperator::new(&m, tol::RANK_TOL).expect("projector onto a unit vector is a state")
    }
}

fn check_finite(v: &[C64]) -> Result<()> {
    for (i, z) in v.iter().enumerate() {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite { row: i, col: 0 });
        }
    }
    Ok(())
}

/// Orthogonal projection with its rank.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    pub matrix: ComplexMatrix,
    pub rank: usize,
}

impl Projector {
    /// `Σ_k v_k v_k†` for orthonormal `v_k`.
    pub fn from_orthonormal(dim: usize, vectors: &[Vec<C64>]) -> Self {
        let mut m = ComplexMatrix::zeros(dim);
        for v in vectors {
            m = &m + &ComplexMatrix::outer(v, v);
        }
        Self { matrix: m.hermitian_part(), rank: vectors.len() }
    }
}

/// Density operator `ρ = Σ_k λ_k ψ_k ψ_k†` with its retained spectrum.
///
/// Weights are sorted descending; eigenvalues at or below the rank
/// cutoff are dropped from the spectrum but still enter the trace check.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    weights: Vec<f64>,
    vectors: Vec<Vec<C64>>,
    projector: Projector,
}

impl DensityOperator {
    pub fn new(matrix: &ComplexMatrix, rank_tol: f64) -> Result<Self> {
        validate_density(matrix, rank_tol)
    }

    /// Assembles an operator whose orthonormal eigendecomposition is
    /// already known, e.g. a unitarily evolved state.
    pub(crate) fn from_parts(matrix: ComplexMatrix, weights: Vec<f64>, vectors: Vec<Vec<C64>>) -> Self {
        let projector = Projector::from_orthonormal(matrix.dim(), &vectors);
        Self { matrix, weights, vectors, projector }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    /// Retained eigenvalues `λ_k`, descending.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Eigenvectors `ψ_k` matching [`weights`](Self::weights).
    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn spectrum(&self) -> impl Iterator<Item = (f64, &[C64])> {
        self.weights.iter().copied().zip(self.vectors.iter().map(Vec::as_slice))
    }

    pub fn projector(&self) -> &Projector {
        &self.projector
    }

    pub fn is_pure(&self) -> bool {
        self.rank() == 1
    }
}

pub fn validate_density(m: &ComplexMatrix, rank_tol: f64) -> Result<DensityOperator> {
    let tr = crate::linalg::trace(m).re;
    let eig = hermitian_eig(m)?;
    if let Some(&lowest) = eig.eigenvalues.first() {
        if lowest < -tol::NEGATIVE_EIGEN_TOL {
            return Err(Error::NotPositive { eigenvalue: lowest });
        }
    }
    let eigen_sum: f64 = eig.eigenvalues.iter().sum();
    if (tr - 1.0).abs() > tol::TRACE_TOL || (eigen_sum - 1.0).abs() > tol::TRACE_TOL {
        return Err(Error::TraceNotOne { trace: tr });
    }

    let mut weights = Vec::new();
    let mut vectors = Vec::new();
    for r in (0..eig.dim()).rev() {
        let lambda = eig.eigenvalues[r].max(0.0);
        if lambda > rank_tol {
            weights.push(lambda);
            vectors.push(eig.eigenvector(r));
        }
    }
    Ok(DensityOperator::from_parts(m.hermitian_part(), weights, vectors))
}

/// `Π = Σ_k ψ_k ψ_k†`, the projection onto the range of `ρ`.
pub fn range_projection(rho: &DensityOperator) -> Projector {
    rho.projector.clone()
}

fn check_operator(rho: &DensityOperator, a: &ComplexMatrix) -> Result<()> {
    if a.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: a.dim() });
    }
    a.check_hermitian(a.default_hermitian_tol())
}

fn expectation_unchecked(rho: &DensityOperator, a: &ComplexMatrix) -> Result<f64> {
    let z = trace_of_product(a, &rho.matrix)?;
    if z.im.abs() > tol::IMAG_EXPECTATION_REL * (1.0 + a.max_abs()) {
        return Err(Error::ImaginaryExpectation { imag: z.im });
    }
    Ok(z.re)
}

/// `⟨A⟩_ρ = Tr(Aρ)`.
pub fn expectation(rho: &DensityOperator, a: &ComplexMatrix) -> Result<f64> {
    check_operator(rho, a)?;
    expectation_unchecked(rho, a)
}

/// `(ΔA)²_ρ = ⟨A²⟩_ρ - ⟨A⟩²_ρ`, evaluated as `⟨(A - ⟨A⟩)²⟩_ρ`.
pub fn variance(rho: &DensityOperator, a: &ComplexMatrix) -> Result<f64> {
    check_operator(rho, a)?;
    let mean = expectation_unchecked(rho, a)?;
    let centered = a.shifted(-mean);
    let sq = matmul(&centered, &centered)?;
    let value = expectation_unchecked(rho, &sq)?;
    if value < 0.0 {
        if value < -tol::NEGATIVE_VARIANCE_TOL {
            return Err(Error::NegativeVariance { value });
        }
        return Ok(0.0);
    }
    Ok(value)
}

/// `⟨ψ, Aψ⟩` and `‖(A - ⟨A⟩_ψ)ψ‖²` for a unit vector.
pub(crate) fn vector_mean_variance(a: &ComplexMatrix, psi: &[C64]) -> (f64, f64) {
    let a_psi = a.apply(psi);
    let mean = inner(psi, &a_psi).re;
    let var = a_psi
        .iter()
        .zip(psi)
        .map(|(x, p)| (x - p * mean).norm_sqr())
        .sum::<f64>();
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble;
    use crate::linalg::matmul;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn validate_examples() {
        let pure = validate_density(&ComplexMatrix::from_diagonal(&[1., 0.]), tol::RANK_TOL).unwrap();
        assert_eq!(pure.rank(), 1);
        assert_eq!(pure.weights(), &[1.0]);

        let mixed = validate_density(&ComplexMatrix::from_diagonal(&[0.5, 0.5]), tol::RANK_TOL).unwrap();
        assert_eq!(mixed.rank(), 2);
        assert!(mixed.weights().iter().all(|&w| (w - 0.5).abs() < 1e-15));

        let cut = ComplexMatrix::from_diagonal(&[0.6, 0.4 - 1e-15, 1e-15]);
        assert_eq!(validate_density(&cut, 1e-12).unwrap().rank(), 2);
    }

    #[test]
    fn validate_errors() {
        let m = ComplexMatrix::from_rows(&[vec![c(0.5), c(0.1)], vec![c(0.0), c(0.5)]]).unwrap();
        assert!(matches!(validate_density(&m, tol::RANK_TOL), Err(Error::NotHermitian { .. })));

        let neg = ComplexMatrix::from_diagonal(&[1.1, -0.1]);
        assert!(matches!(validate_density(&neg, tol::RANK_TOL), Err(Error::NotPositive { .. })));

        let heavy = ComplexMatrix::from_diagonal(&[0.6, 0.5]);
        assert!(matches!(validate_density(&heavy, tol::RANK_TOL), Err(Error::TraceNotOne { .. })));

        // Roundoff-level negativity is tolerated.
        let tiny = ComplexMatrix::from_diagonal(&[1.0 + 1e-11, -1e-11]);
        assert_eq!(validate_density(&tiny, tol::RANK_TOL).unwrap().rank(), 1);
    }

    #[test]
    fn pure_state_norm_checks() {
        assert!(PureState::new(vec![c(1.0), c(1.0)]).is_err());
        let s = PureState::normalized(vec![c(1.0), c(1.0)]).unwrap();
        assert!((norm(s.vector()) - 1.0).abs() < 1e-15);
        assert!(PureState::normalized(vec![c(0.0)]).is_err());
    }

    #[test]
    fn range_projection_examples() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let phi = PureState::new(ensemble::random_unit_vector(&mut rng, 3)).unwrap();
        let rho = phi.to_density();
        let pi = range_projection(&rho);
        assert!(pi.matrix.max_abs_diff(rho.matrix()) <= 1e-12);

        let full = validate_density(&ComplexMatrix::from_diagonal(&[0.2, 0.3, 0.5]), tol::RANK_TOL).unwrap();
        assert!(range_projection(&full).matrix.max_abs_diff(&ComplexMatrix::identity(3)) <= 1e-12);

        let vs = ensemble::random_orthonormal(&mut rng, 4, 2);
        let m = &ComplexMatrix::outer(&vs[0], &vs[0]).scale_real(0.7)
            + &ComplexMatrix::outer(&vs[1], &vs[1]).scale_real(0.3);
        let rho = validate_density(&m, tol::RANK_TOL).unwrap();
        let pi = range_projection(&rho);
        assert_eq!(pi.rank, 2);
        assert!((crate::linalg::trace(&pi.matrix).re - 2.0).abs() <= 1e-9);
        for (_, psi) in rho.spectrum() {
            let img = pi.matrix.apply(psi);
            assert!(img.iter().zip(psi).all(|(a, b)| (a - b).norm() <= 1e-10));
        }
        assert!((trace_of_product(&pi.matrix, rho.matrix()).unwrap().re - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn projector_invariants_on_random_states() {
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        for dim in 2..=6 {
            for _ in 0..10 {
                let rho = ensemble::random_density(&mut rng, dim);
                let pi = &rho.projector().matrix;
                assert!(matmul(pi, pi).unwrap().max_abs_diff(pi) <= 1e-9);
                assert!(pi.hermiticity_defect() <= 1e-10);
                assert!((crate::linalg::trace(pi).re - rho.rank() as f64).abs() <= 1e-9);
                assert!(matmul(pi, rho.matrix()).unwrap().max_abs_diff(rho.matrix()) <= 1e-9);
                assert!(matmul(rho.matrix(), pi).unwrap().max_abs_diff(rho.matrix()) <= 1e-9);
                let gram_dev = rho
                    .vectors()
                    .iter()
                    .enumerate()
                    .flat_map(|(k, a)| {
                        rho.vectors().iter().enumerate().map(move |(l, b)| {
                            let want = if k == l { 1.0 } else { 0.0 };
                            (inner(a, b) - want).norm()
                        })
                    })
                    .fold(0.0, f64::max);
                assert!(gram_dev <= 1e-10);
            }
        }
    }

    #[test]
    fn expectation_examples() {
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let rho = ensemble::random_density(&mut rng, 4);
        assert!((expectation(&rho, &ComplexMatrix::identity(4)).unwrap() - 1.0).abs() < 1e-12);

        let half = validate_density(&ComplexMatrix::from_diagonal(&[0.5, 0.5]), tol::RANK_TOL).unwrap();
        let a = ComplexMatrix::from_diagonal(&[0., 1.]);
        assert_eq!(expectation(&half, &a).unwrap(), 0.5);

        let h = ensemble::random_hermitian(&mut rng, 4);
        let spectral: f64 = rho.spectrum().map(|(l, psi)| l * inner(psi, &h.apply(psi)).re).sum();
        assert!((expectation(&rho, &h).unwrap() - spectral).abs() <= 1e-12);

        let bad = ComplexMatrix::from_rows(&[vec![c(0.), c(1.)], vec![c(0.), c(0.)]]).unwrap();
        assert!(matches!(expectation(&half, &bad), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn variance_examples() {
        let a = ComplexMatrix::from_diagonal(&[0., 1.]);
        let eigen = validate_density(&ComplexMatrix::from_diagonal(&[0., 1.]), tol::RANK_TOL).unwrap();
        assert_eq!(variance(&eigen, &a).unwrap(), 0.0);

        let half = validate_density(&ComplexMatrix::from_diagonal(&[0.5, 0.5]), tol::RANK_TOL).unwrap();
        assert_eq!(variance(&half, &a).unwrap(), 0.25);

        // Values 0 and 2 with weights 1/4, 3/4: ⟨A²⟩ = 3, ⟨A⟩² = 9/4.
        let skew = validate_density(&ComplexMatrix::from_diagonal(&[0.25, 0.75]), tol::RANK_TOL).unwrap();
        let b = ComplexMatrix::from_diagonal(&[0., 2.]);
        assert!((variance(&skew, &b).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn zero_variance_means_common_eigenvector() {
        let h = ComplexMatrix::from_diagonal(&[1., 1., 3.]);
        let m = ComplexMatrix::from_rows(&[
            vec![c(0.5), c(0.2), c(0.)],
            vec![c(0.2), c(0.5), c(0.)],
            vec![c(0.), c(0.), c(0.)],
        ])
        .unwrap();
        let rho = validate_density(&m, tol::RANK_TOL).unwrap();
        assert!(variance(&rho, &h).unwrap() <= 1e-15);
        let mean = expectation(&rho, &h).unwrap();
        for (_, psi) in rho.spectrum() {
            let (_, v) = vector_mean_variance(&h.shifted(-mean), psi);
            assert!(v.sqrt() <= 1e-8);
        }
    }

    #[test]
    fn variance_shift_invariance() {
        let mut rng = ChaCha20Rng::seed_from_u64(14);
        for dim in 2..=6 {
            let rho = ensemble::random_density(&mut rng, dim);
            let h = ensemble::random_hermitian(&mut rng, dim);
            let base = variance(&rho, &h).unwrap();
            for shift in [-7.5, 0.3, 12.0] {
                assert!((variance(&rho, &h.shifted(shift)).unwrap() - base).abs() <= 1e-10);
            }
        }
    }
}
