//! Dense complex matrices and the Hermitian eigensolver.
//!
//! Everything downstream is exact spectral calculus on top of
//! [`hermitian_eig`]: propagators are assembled from eigenpairs rather
//! than from a series or Padé approximant.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;

/// Dense square complex matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Real diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from rows, rejecting ragged, empty or non-finite input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Shape("matrix has no rows".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            for (j, z) in row.iter().enumerate() {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<C64>]) -> Result<Self> {
        let dim = cols.len();
        if dim == 0 {
            return Err(Error::Shape("matrix has no columns".into()));
        }
        let mut m = Self::zeros(dim);
        for (j, col) in cols.iter().enumerate() {
            if col.len() != dim {
                return Err(Error::Shape(format!(
                    "column {j} has {} entries, expected {dim}",
                    col.len()
                )));
            }
            for (i, &z) in col.iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        Ok(m)
    }

    /// `u v†`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        assert_eq!(u.len(), v.len());
        let mut m = Self::zeros(u.len());
        for (i, &ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                m[(i, j)] = ui * vj.conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        (0..self.dim).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        adjoint(self)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest entry modulus, `‖M‖_max`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max_{ij} |M_ij - conj(M_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Default Hermiticity tolerance `1e-10 (1 + ‖M‖_max)`.
    pub fn default_hermitian_tol(&self) -> f64 {
        tol::HERMITIAN_REL * (1.0 + self.max_abs())
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let deviation = self.hermiticity_defect();
        if deviation > tol {
            return Err(Error::NotHermitian { deviation, tol });
        }
        Ok(())
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            out[(i, i)] = C64::new(self[(i, i)].re, 0.0);
            for j in i + 1..self.dim {
                let z = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                out[(i, j)] = z;
                out[(j, i)] = z.conj();
            }
        }
        out
    }

    /// `self + c I` for real `c`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            out[(i, i)] += c;
        }
        out
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(&matmul(self, other)? - &matmul(other, self)?)
    }

    /// Entrywise `max |A_ij - B_ij|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on mismatched dimensions; use [`matmul`] for a fallible product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        matmul(self, rhs).expect("matrix dimensions must agree")
    }
}

/// Conjugate transpose.
pub fn adjoint(m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m.dim);
    for i in 0..m.dim {
        for j in 0..m.dim {
            out[(i, j)] = m[(j, i)].conj();
        }
    }
    out
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.check_same_dim(b)?;
    let n = a.dim;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a[(i, k)];
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out.data[i * n + j] += aik * b.data[k * n + j];
            }
        }
    }
    Ok(out)
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    (0..m.dim).map(|i| m[(i, i)]).sum()
}

/// `Tr(AB)` without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    a.check_same_dim(b)?;
    let n = a.dim;
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    Ok(acc)
}

/// `⟨u, v⟩ = Σ conj(u_i) v_i`, antilinear in the first slot.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Spectral decomposition `M = V diag(ω) V†` of a Hermitian matrix.
///
/// Eigenvalues are ascending with ties kept in the order the solver
/// produced them. Each eigenvector column carries a fixed phase: its
/// largest-magnitude component is real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

/// A cluster of (numerically) equal eigenvalues and the columns spanning it.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspace {
    /// Mean of the clustered eigenvalues.
    pub value: f64,
    pub columns: std::ops::Range<usize>,
}

impl Eigenspace {
    pub fn multiplicity(&self) -> usize {
        self.columns.len()
    }
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, r: usize) -> Vec<C64> {
        self.eigenvectors.column(r)
    }

    /// `V diag(ω) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.spectral_function(|w| C64::new(w, 0.0))
    }

    /// `Σ_r f(ω_r) Φ_r Φ_r†`.
    pub fn spectral_function(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let fw: Vec<C64> = self.eigenvalues.iter().map(|&w| f(w)).collect();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for r in 0..n {
                    acc += v[(i, r)] * fw[r] * v[(j, r)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// Groups consecutive eigenvalues whose gap is at most
    /// `1e-9 (1 + max|ω|)` into eigenspaces.
    pub fn eigenspaces(&self) -> Vec<Eigenspace> {
        let scale = 1.0 + self.eigenvalues.iter().fold(0.0_f64, |m, w| m.max(w.abs()));
        self.eigenspaces_with_tol(tol::EIGENSPACE_REL * scale)
    }

    pub fn eigenspaces_with_tol(&self, gap: f64) -> Vec<Eigenspace> {
        let w = &self.eigenvalues;
        let mut spaces = Vec::new();
        let mut start = 0;
        for r in 1..=w.len() {
            if r == w.len() || w[r] - w[r - 1] > gap {
                let value = w[start..r].iter().sum::<f64>() / (r - start) as f64;
                spaces.push(Eigenspace { value, columns: start..r });
                start = r;
            }
        }
        spaces
    }

    /// Orthogonal projection of `v` onto an eigenspace.
    pub fn project(&self, space: &Eigenspace, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for r in space.columns.clone() {
            let phi = self.eigenvector(r);
            let c = inner(&phi, v);
            for (o, p) in out.iter_mut().zip(&phi) {
                *o += p * c;
            }
        }
        out
    }
}

/// Eigendecomposition with the default tolerance `1e-10 (1 + ‖M‖_max)`.
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEigen> {
    hermitian_eig_with_tol(m, m.default_hermitian_tol())
}

/// Cyclic two-sided Jacobi for complex Hermitian matrices.
///
/// Each rotation first rephases the pivot `a_pq` to a real value and
/// then applies a real plane rotation, so the accumulated transform is
/// `V = V D R` with `D = diag(1, e^{-iφ})` on the pivot plane. Sweeps
/// run in row-major pivot order until the off-diagonal Frobenius norm
/// falls below `1e-13 ‖M‖_F`.
pub fn hermitian_eig_with_tol(m: &ComplexMatrix, tol_herm: f64) -> Result<HermitianEigen> {
    m.check_hermitian(tol_herm)?;
    let n = m.dim();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let threshold = tol::JACOBI_OFF_REL * m.frobenius();

    let mut converged = false;
    for _ in 0..tol::JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        let residual = off_diagonal_norm(&a);
        if residual > threshold {
            return Err(Error::ConvergenceFailure { sweeps: tol::JACOBI_MAX_SWEEPS, residual });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        let mut phi = v.column(src);
        fix_phase(&mut phi);
        for (i, z) in phi.into_iter().enumerate() {
            eigenvectors[(i, col)] = z;
        }
    }
    Ok(HermitianEigen { eigenvalues, eigenvectors })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = (apq / r).conj();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // Rotation block on the (p, q) plane.
    let vpp = C64::new(c, 0.0);
    let vpq = C64::new(s, 0.0);
    let vqp = phase * (-s);
    let vqq = phase * c;

    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * vpp + akq * vqp;
        a[(k, q)] = akp * vpq + akq * vqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = vpp.conj() * apk + vqp.conj() * aqk;
        a[(q, k)] = vpq.conj() * apk + vqq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    for k in 0..n {
        if k != p && k != q {
            a[(k, p)] = a[(p, k)].conj();
            a[(k, q)] = a[(q, k)].conj();
        }
    }

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * vpp + vkq * vqp;
        v[(k, q)] = vkp * vpq + vkq * vqq;
    }
}

/// Makes the first largest-magnitude component real and positive.
fn fix_phase(phi: &mut [C64]) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in phi.iter().enumerate() {
        let a = z.norm();
        if a > best_abs {
            best_abs = a;
            best = i;
        }
    }
    if best_abs <= 0.0 {
        return;
    }
    let rot = phi[best].conj() / best_abs;
    for z in phi.iter_mut() {
        *z *= rot;
    }
    phi[best] = C64::new(best_abs, 0.0);
}

/// `U(t) = Σ_r e^{-iω_r t} Φ_r Φ_r†` (units with ħ = 1).
pub fn unitary_from_hamiltonian(eig: &HermitianEigen, t: f64) -> ComplexMatrix {
    eig.spectral_function(|w| C64::from_polar(1.0, -w * t))
}
