//! Seeded random operators for property campaigns.
//!
//! Every generator draws only from the caller's RNG, so a fixed
//! generator state reproduces the same operator bit for bit. Campaigns
//! use [`instance_rng`]: ChaCha20 seeded by `seed_from_u64(seed)` with
//! the stream set to the global instance index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::linalg::{inner, norm, ComplexMatrix, C64};
use crate::states::DensityOperator;
use crate::tol;

/// Per-instance generator, independent of how instances are scheduled.
pub fn instance_rng(seed: u64, instance: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(instance);
    rng
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_ginibre<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let rows: Vec<Vec<C64>> =
        (0..dim).map(|_| (0..dim).map(|_| complex_normal(rng)).collect()).collect();
    ComplexMatrix::from_rows(&rows).expect("finite square matrix")
}

/// GUE-style Hermitian matrix: real N(0,1) diagonal, complex N(0,1) off-diagonal.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        let d: f64 = StandardNormal.sample(rng);
        m[(i, i)] = C64::new(d, 0.0);
        for j in i + 1..dim {
            let z = complex_normal(rng);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<C64> {
    (0..dim).map(|_| complex_normal(rng)).collect()
}

/// Unit vector drawn uniformly from the sphere.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<C64> {
    let v = random_vector(rng, dim);
    let n = norm(&v);
    v.into_iter().map(|z| z / n).collect()
}

/// `count` orthonormal vectors from modified Gram–Schmidt on Gaussian draws.
pub fn random_orthonormal<R: Rng + ?Sized>(rng: &mut R, dim: usize, count: usize) -> Vec<Vec<C64>> {
    assert!(count <= dim);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(count);
    while basis.len() < count {
        let mut v = random_vector(rng, dim);
        for _ in 0..2 {
            for b in &basis {
                let c = inner(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= y * c;
                }
            }
        }
        let n = norm(&v);
        if n < 1e-8 {
            continue;
        }
        basis.push(v.into_iter().map(|z| z / n).collect());
    }
    basis
}

/// Haar-random unitary (columns from Gram–Schmidt of a Ginibre draw).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let cols = random_orthonormal(rng, dim, dim);
    ComplexMatrix::from_columns(&cols).expect("square")
}

/// Flat (Dirichlet(1)) draw from the probability simplex.
pub fn simplex_weights<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..count).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// A random density operator together with the rank it was drawn with.
#[derive(Debug, Clone)]
pub struct RandomDensity {
    pub rank: usize,
    pub weights: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
    pub matrix: ComplexMatrix,
}

/// Rank uniform on `1..=dim`, orthonormal vectors by Gram–Schmidt,
/// simplex-flat weights.
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> RandomDensity {
    let rank = rng.random_range(1..=dim);
    let vectors = random_orthonormal(rng, dim, rank);
    let weights = simplex_weights(rng, rank);
    let mut matrix = ComplexMatrix::zeros(dim);
    for (w, v) in weights.iter().zip(&vectors) {
        matrix = &matrix + &ComplexMatrix::outer(v, v).scale_real(*w);
    }
    RandomDensity { rank, weights, vectors, matrix: matrix.hermitian_part() }
}

/// Validated random density operator.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityOperator {
    let raw = random_density_matrix(rng, dim);
    DensityOperator::new(&raw.matrix, tol::RANK_TOL).expect("generated density operator is valid")
}
