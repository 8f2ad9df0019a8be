//! Dense complex Hermitian linear algebra.
//!
//! All matrix-valued quantities in this crate live in the real-linear space
//! of d×d complex Hermitian matrices. [`HermitianMatrix`] enforces the
//! symmetry invariant on construction; [`CMatrix`] is the general complex
//! workhorse used for products (a product of Hermitian matrices is not
//! Hermitian) and for the rectangular input of [`dilation`].
//!
//! Eigendecomposition is cyclic Jacobi on 2×2 subproblems, chosen for
//! unconditional convergence and high relative accuracy at the small
//! dimensions used here (d ≤ 64).

mod jacobi;
mod literal;

pub use literal::MatrixLiteral;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Complex64 = num_complex::Complex<f64>;

/// Errors from construction and spectral operations.
#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("matrix is not Hermitian: max asymmetry {max_asymmetry:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { max_asymmetry: f64, tolerance: f64 },
    #[error("entry ({row}, {col}) is not finite")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,
    #[error("entry table has wrong shape: expected {expected} entries, got {got}")]
    BadShape { expected: usize, got: usize },
    #[error(
        "eigensolver did not converge after {sweeps} sweeps: \
         off-diagonal norm {off_diagonal:.3e}, matrix scale {hs_norm:.3e}, dim {dim}"
    )]
    EigNonConvergence {
        dim: usize,
        sweeps: usize,
        off_diagonal: f64,
        hs_norm: f64,
    },
    #[error("scalar function undefined at eigenvalue {eigenvalue}")]
    FunctionDomain { eigenvalue: f64 },
    #[error("trace power requires p >= 1, got {p}")]
    InvalidPower { p: f64 },
}

pub type Result<T> = std::result::Result<T, MatrixError>;

/// General dense complex matrix, row-major. Supports rectangular shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::ONE;
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(MatrixError::BadShape {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions must agree");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == Complex64::ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn scale_re(&self, s: f64) -> CMatrix {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn add_assign_scaled(&mut self, w: f64, other: &CMatrix) {
        assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += w * b;
        }
    }

    pub fn trace(&self) -> Complex64 {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Hermitian part (A + A*)/2. Requires a square matrix.
    pub fn hermitian_part(&self) -> HermitianMatrix {
        assert_eq!(self.rows, self.cols);
        let d = self.rows;
        let mut data = vec![Complex64::ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                data[i * d + j] = (self.get(i, j) + self.get(j, i).conj()) * 0.5;
            }
        }
        HermitianMatrix { dim: d, data }
    }
}

impl std::ops::Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
        out
    }
}

impl std::ops::Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
        out
    }
}

impl std::ops::Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

/// Dense d×d complex Hermitian matrix.
///
/// The constructor checks `entries[i][j] == conj(entries[j][i])` within
/// `1e-12 * max|entry|` and then symmetrizes exactly as `(A + A*)/2`, so a
/// stored value always satisfies the invariant bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MatrixLiteral", try_from = "MatrixLiteral")]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

/// Relative asymmetry tolerated by the constructor before rejecting input.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-12;

impl HermitianMatrix {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(MatrixError::EmptyMatrix);
        }
        if entries.len() != dim * dim {
            return Err(MatrixError::BadShape {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        for (idx, v) in entries.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(MatrixError::NonFiniteEntry {
                    row: idx / dim,
                    col: idx % dim,
                });
            }
        }
        let scale = entries.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let tol = HERMITIAN_INPUT_TOL * scale;
        let mut max_asym = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                let asym = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
                max_asym = max_asym.max(asym);
            }
        }
        if max_asym > tol {
            return Err(MatrixError::NotHermitian {
                max_asymmetry: max_asym,
                tolerance: tol,
            });
        }
        let mut data = vec![Complex64::ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(entries[i * dim + i].re, 0.0);
            for j in i + 1..dim {
                let v = (entries[i * dim + j] + entries[j * dim + i].conj()) * 0.5;
                data[i * dim + j] = v;
                data[j * dim + i] = v.conj();
            }
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(MatrixError::BadShape {
                    expected: dim * dim,
                    got: row.len() * dim,
                });
            }
            entries.extend_from_slice(row);
        }
        Self::new(dim, entries)
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(MatrixError::BadShape {
                    expected: dim * dim,
                    got: row.len() * dim,
                });
            }
            entries.extend(row.iter().map(|&x| Complex64::new(x, 0.0)));
        }
        Self::new(dim, entries)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::ONE;
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        let mut m = Self::zeros(dim);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * dim + i] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        CMatrix {
            rows: self.dim,
            cols: self.dim,
            data: self.data.clone(),
        }
    }

    pub fn scale(&self, s: f64) -> HermitianMatrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn add_assign_scaled(&mut self, w: f64, other: &HermitianMatrix) {
        assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += w * b;
        }
    }

    /// Matrix product; not Hermitian in general.
    pub fn mul(&self, rhs: &HermitianMatrix) -> CMatrix {
        self.to_cmatrix().matmul(&rhs.to_cmatrix())
    }

    /// The square A², which is Hermitian (exactly so in floating point).
    pub fn square(&self) -> HermitianMatrix {
        let p = self.mul(self);
        HermitianMatrix {
            dim: self.dim,
            data: p.data,
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.entry(i, i).re).sum()
    }

    pub fn normalized_trace(&self) -> f64 {
        self.trace() / self.dim as f64
    }

    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Eigendecomposition `A = U diag(λ) U*`, eigenvalues ascending.
    pub fn eig(&self) -> Result<EigenDecomposition> {
        jacobi::jacobi_eig(self)
    }

    /// Standard matrix function `φ(A) = Σ φ(λ_i) u_i u_i*`.
    ///
    /// Fails with [`MatrixError::FunctionDomain`] when φ returns a non-finite
    /// value at some eigenvalue.
    pub fn matrix_function<F: Fn(f64) -> f64>(&self, phi: F) -> Result<HermitianMatrix> {
        let eig = self.eig()?;
        let mut phi_vals = Vec::with_capacity(self.dim);
        for &lam in &eig.eigenvalues {
            let v = phi(lam);
            if !v.is_finite() {
                return Err(MatrixError::FunctionDomain { eigenvalue: lam });
            }
            phi_vals.push(v);
        }
        Ok(eig.rebuild(&phi_vals))
    }

    /// Matrix exponential, via the spectral decomposition.
    pub fn expm(&self) -> Result<HermitianMatrix> {
        self.matrix_function(f64::exp)
    }

    /// `Σ_i |λ_i|^p` for p ≥ 1 (non-integer p allowed).
    pub fn trace_power_abs(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(MatrixError::InvalidPower { p });
        }
        let eig = self.eig()?;
        Ok(eig.eigenvalues.iter().map(|l| l.abs().powf(p)).sum())
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eig()?.eigenvalues)
    }

    /// Smallest eigenvalue; the signed margin of every semidefinite check.
    pub fn psd_margin(&self) -> Result<f64> {
        Ok(self.eig()?.eigenvalues[0])
    }

    /// True iff `λ_min(A) ≥ -tol · (1 + ‖A‖)` with ‖·‖ the operator norm.
    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        let eigs = self.eigenvalues()?;
        let lmin = eigs[0];
        let op = eigs
            .iter()
            .map(|l| l.abs())
            .fold(0.0, f64::max);
        Ok(lmin >= -tol * (1.0 + op))
    }

    pub fn op_norm(&self) -> Result<f64> {
        let eigs = self.eigenvalues()?;
        Ok(eigs.iter().map(|l| l.abs()).fold(0.0, f64::max))
    }

    pub fn norms(&self) -> Result<MatrixNorms> {
        let eigs = self.eigenvalues()?;
        Ok(MatrixNorms {
            op_norm: eigs.iter().map(|l| l.abs()).fold(0.0, f64::max),
            hs_norm: self.hs_norm(),
            trace: self.trace(),
            normalized_trace: self.normalized_trace(),
            lambda_max: *eigs.last().unwrap(),
            lambda_min: eigs[0],
        })
    }
}

impl std::ops::Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
        out
    }
}

impl std::ops::Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        assert_eq!(self.dim, rhs.dim);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
        out
    }
}

/// Scalar norms and trace functionals of one matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixNorms {
    pub op_norm: f64,
    pub hs_norm: f64,
    pub trace: f64,
    pub normalized_trace: f64,
    pub lambda_max: f64,
    pub lambda_min: f64,
}

/// Result of [`HermitianMatrix::eig`]: `A = U diag(λ) U*` with λ ascending
/// and U unitary (columns are eigenvectors).
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    /// `Σ values[i] · u_i u_i*`: reassemble with a substituted spectrum.
    pub fn rebuild(&self, values: &[f64]) -> HermitianMatrix {
        let d = self.eigenvalues.len();
        assert_eq!(values.len(), d);
        let u = &self.eigenvectors;
        let mut data = vec![Complex64::ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                let mut acc = Complex64::ZERO;
                for k in 0..d {
                    acc += values[k] * u.get(i, k) * u.get(j, k).conj();
                }
                data[i * d + j] = acc;
            }
        }
        HermitianMatrix { dim: d, data }
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.rebuild(&self.eigenvalues)
    }
}

/// `true` iff `B - A` is positive semidefinite per [`HermitianMatrix::is_psd`].
pub fn psd_order(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(MatrixError::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    (b - a).is_psd(tol)
}

/// Self-adjoint dilation `[[0, H], [H*, 0]]` of a rectangular matrix.
///
/// The operator norm of the dilation equals the largest singular value of H.
pub fn dilation(h: &CMatrix) -> HermitianMatrix {
    let (r, c) = (h.rows(), h.cols());
    let d = r + c;
    let mut data = vec![Complex64::ZERO; d * d];
    for i in 0..r {
        for j in 0..c {
            data[i * d + (r + j)] = h.get(i, j);
            data[(r + j) * d + i] = h.get(i, j).conj();
        }
    }
    HermitianMatrix { dim: d, data }
}
