//! The special orthogonal group SO(d) under Haar measure: sampling via QR
//! with sign correction, the unit skew-symmetric basis and its summation
//! identity, geodesic moves through the skew matrix exponential, and the
//! conjugation-orbit model `f(O_1..O_n) = Σ O_i A_i O_iᵀ`.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{ModelError, Result};
use crate::hermitian::{CMatrix, Complex64, HermitianMatrix};

/// Small dense real square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    d: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(d: usize) -> Self {
        Self {
            d,
            data: vec![0.0; d * d],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d);
        for i in 0..d {
            m.data[i * d + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let d = rows.len();
        let mut data = Vec::with_capacity(d * d);
        for r in rows {
            assert_eq!(r.len(), d);
            data.extend_from_slice(r);
        }
        Self { d, data }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(d: usize, mut f: F) -> Self {
        let mut m = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m.data[i * d + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.d + j] = v;
    }

    pub fn transpose(&self) -> RealMatrix {
        RealMatrix::from_fn(self.d, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, rhs: &RealMatrix) -> RealMatrix {
        assert_eq!(self.d, rhs.d);
        let d = self.d;
        let mut out = RealMatrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * rhs.data[k * d + j];
                }
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.d).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: f64) -> RealMatrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn add_assign_scaled(&mut self, w: f64, other: &RealMatrix) {
        assert_eq!(self.d, other.d);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += w * b;
        }
    }

    pub fn sub(&self, other: &RealMatrix) -> RealMatrix {
        let mut out = self.clone();
        out.add_assign_scaled(-1.0, other);
        out
    }

    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> f64 {
        let d = self.d;
        let mut m = self.data.clone();
        let mut det = 1.0;
        for col in 0..d {
            let mut pivot = col;
            for r in col + 1..d {
                if m[r * d + col].abs() > m[pivot * d + col].abs() {
                    pivot = r;
                }
            }
            if m[pivot * d + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for j in 0..d {
                    m.swap(col * d + j, pivot * d + j);
                }
                det = -det;
            }
            det *= m[col * d + col];
            for r in col + 1..d {
                let factor = m[r * d + col] / m[col * d + col];
                for j in col..d {
                    m[r * d + j] -= factor * m[col * d + j];
                }
            }
        }
        det
    }

    /// `‖OᵀO − I‖_HS`, the deviation from orthogonality.
    pub fn orthogonality_defect(&self) -> f64 {
        self.transpose()
            .matmul(self)
            .sub(&RealMatrix::identity(self.d))
            .hs_norm()
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        let d = self.d;
        let mut out = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                out.set(i, j, Complex64::new(self.get(i, j), 0.0));
            }
        }
        out
    }

    /// View a symmetric real matrix as Hermitian. Symmetrizes the rounding
    /// residue; callers validate genuine symmetry where it is an input
    /// contract.
    pub fn to_hermitian(&self) -> HermitianMatrix {
        self.to_cmatrix().hermitian_part()
    }
}

/// Haar-distributed rotation: QR of a Gaussian matrix with the R-diagonal
/// sign correction, then one column negated if the determinant is −1.
pub fn so_sample_haar<R: Rng>(d: usize, rng: &mut R) -> RealMatrix {
    assert!(d >= 2, "SO(d) sampling needs d >= 2");
    let g = RealMatrix::from_fn(d, |_, _| rng.sample(StandardNormal));
    let (mut q, r) = qr_householder(&g);
    for j in 0..d {
        if r.get(j, j) < 0.0 {
            for i in 0..d {
                q.set(i, j, -q.get(i, j));
            }
        }
    }
    if q.det() < 0.0 {
        let last = d - 1;
        for i in 0..d {
            q.set(i, last, -q.get(i, last));
        }
    }
    q
}

/// Householder QR: returns (Q, R) with A = Q·R and Q orthogonal.
fn qr_householder(a: &RealMatrix) -> (RealMatrix, RealMatrix) {
    let d = a.dim();
    let mut r = a.clone();
    let mut q = RealMatrix::identity(d);
    for col in 0..d {
        let mut v: Vec<f64> = (col..d).map(|i| r.get(i, col)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        v[0] += sign * norm;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // R <- H R with H = I − 2vvᵀ/(vᵀv) acting on rows col..d.
        for j in 0..d {
            let dot: f64 = (col..d).map(|i| v[i - col] * r.get(i, j)).sum();
            let coef = 2.0 * dot / vnorm2;
            for i in col..d {
                r.set(i, j, r.get(i, j) - coef * v[i - col]);
            }
        }
        // Q <- Q H (accumulate the product of reflectors).
        for i in 0..d {
            let dot: f64 = (col..d).map(|j| q.get(i, j) * v[j - col]).sum();
            let coef = 2.0 * dot / vnorm2;
            for j in col..d {
                q.set(i, j, q.get(i, j) - coef * v[j - col]);
            }
        }
    }
    (q, r)
}

/// Unit skew-symmetric basis element: `(S_kl)_kl = 1/√2`, `(S_kl)_lk = −1/√2`.
pub fn skew_basis_element(d: usize, k: usize, l: usize) -> RealMatrix {
    assert!(k < l && l < d);
    let mut s = RealMatrix::zeros(d);
    let v = 1.0 / 2f64.sqrt();
    s.set(k, l, v);
    s.set(l, k, -v);
    s
}

/// `Σ_{k<l} S_kl · M · S_kl`, summed directly over the basis.
pub fn skew_basis_sum(m: &RealMatrix) -> RealMatrix {
    let d = m.dim();
    let mut acc = RealMatrix::zeros(d);
    for k in 0..d {
        for l in k + 1..d {
            let s = skew_basis_element(d, k, l);
            acc.add_assign_scaled(1.0, &s.matmul(m).matmul(&s));
        }
    }
    acc
}

/// The identity the basis sum collapses to: `−½(tr[M]·I − Mᵀ)`.
pub fn skew_basis_sum_closed_form(m: &RealMatrix) -> RealMatrix {
    let d = m.dim();
    let mut out = RealMatrix::identity(d).scale(-0.5 * m.trace());
    out.add_assign_scaled(0.5, &m.transpose());
    out
}

/// Matrix exponential of a real skew-symmetric matrix, through the Hermitian
/// eigendecomposition of i·S (so the dense eigensolver is reused).
pub fn expm_skew(s: &RealMatrix) -> Result<RealMatrix> {
    let d = s.dim();
    let mut h_entries = vec![Complex64::ZERO; d * d];
    for i in 0..d {
        for j in 0..d {
            h_entries[i * d + j] = Complex64::new(0.0, s.get(i, j));
        }
    }
    let h = HermitianMatrix::new(d, h_entries)?;
    let eig = h.eig()?;
    // S = −iH, so exp(S) = U diag(e^{−iλ}) U*.
    let u = &eig.eigenvectors;
    let mut out = RealMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = Complex64::ZERO;
            for k in 0..d {
                let phase = Complex64::new(0.0, -eig.eigenvalues[k]).exp();
                acc += u.get(i, k) * phase * u.get(j, k).conj();
            }
            out.set(i, j, acc.re);
        }
    }
    Ok(out)
}

/// Conjugation-orbit model `f(O_1, …, O_n) = Σ O_i A_i O_iᵀ` with fixed real
/// symmetric coefficients.
#[derive(Debug, Clone)]
pub struct SOConjugationModel {
    coefficients: Vec<RealMatrix>,
    d: usize,
}

impl SOConjugationModel {
    pub fn new(coefficients: Vec<RealMatrix>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(ModelError::TooFewCoefficients { min: 1, got: 0 });
        }
        let d = coefficients[0].dim();
        for (index, a) in coefficients.iter().enumerate() {
            if a.dim() != d {
                return Err(ModelError::MixedDimensions {
                    left: d,
                    right: a.dim(),
                });
            }
            if a.sub(&a.transpose()).max_abs() > 1e-12 * (1.0 + a.max_abs()) {
                return Err(ModelError::NotRealSymmetric { index });
            }
        }
        Ok(Self { coefficients, d })
    }

    pub fn coefficients(&self) -> &[RealMatrix] {
        &self.coefficients
    }

    pub fn copies(&self) -> usize {
        self.coefficients.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Vec<RealMatrix> {
        (0..self.copies())
            .map(|_| so_sample_haar(self.d, rng))
            .collect()
    }

    fn check_rotations(&self, rotations: &[RealMatrix]) -> Result<()> {
        if rotations.len() != self.copies() {
            return Err(ModelError::PointDimension {
                expected: self.copies(),
                got: rotations.len(),
            });
        }
        for (index, o) in rotations.iter().enumerate() {
            if o.dim() != self.d {
                return Err(ModelError::MixedDimensions {
                    left: self.d,
                    right: o.dim(),
                });
            }
            let deviation = o.orthogonality_defect();
            if deviation > 1e-10 * self.d as f64 {
                return Err(ModelError::NotOrthogonal { index, deviation });
            }
        }
        Ok(())
    }

    pub fn eval(&self, rotations: &[RealMatrix]) -> Result<HermitianMatrix> {
        self.check_rotations(rotations)?;
        Ok(self.eval_unchecked(rotations))
    }

    fn eval_unchecked(&self, rotations: &[RealMatrix]) -> HermitianMatrix {
        let mut acc = RealMatrix::zeros(self.d);
        for (o, a) in rotations.iter().zip(&self.coefficients) {
            acc.add_assign_scaled(1.0, &o.matmul(a).matmul(&o.transpose()));
        }
        acc.to_hermitian()
    }

    /// Closed-form carré du champ:
    /// `½ Σ_i O_i [ (tr A_i² − tr[A_i]²/d)·I + d (A_i − tr[A_i]/d·I)² ] O_iᵀ`.
    pub fn gamma(&self, rotations: &[RealMatrix]) -> Result<HermitianMatrix> {
        self.check_rotations(rotations)?;
        let d = self.d as f64;
        let mut acc = RealMatrix::zeros(self.d);
        for (o, a) in rotations.iter().zip(&self.coefficients) {
            let tr_a = a.trace();
            let tr_a2 = a.matmul(a).trace();
            let mut centered = a.clone();
            centered.add_assign_scaled(-tr_a / d, &RealMatrix::identity(self.d));
            let mut core = RealMatrix::identity(self.d).scale(tr_a2 - tr_a * tr_a / d);
            core.add_assign_scaled(d, &centered.matmul(&centered));
            acc.add_assign_scaled(0.5, &o.matmul(&core).matmul(&o.transpose()));
        }
        Ok(acc.to_hermitian())
    }

    /// Carré du champ by geodesic finite differences: squared directional
    /// derivatives `(f(e^{hS_kl}O_i, …) − f(…))/h` summed over the skew
    /// basis directions of every copy. First-order in h; the oracle for
    /// [`Self::gamma`].
    pub fn gamma_geodesic_fd(&self, rotations: &[RealMatrix], h: f64) -> Result<HermitianMatrix> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(ModelError::InvalidStep { h });
        }
        self.check_rotations(rotations)?;
        let base = self.eval_unchecked(rotations);
        let mut acc = HermitianMatrix::zeros(self.d);
        let mut moved = rotations.to_vec();
        for i in 0..self.copies() {
            for k in 0..self.d {
                for l in k + 1..self.d {
                    let step = expm_skew(&skew_basis_element(self.d, k, l).scale(h))?;
                    moved[i] = step.matmul(&rotations[i]);
                    let perturbed = self.eval_unchecked(&moved);
                    let derivative = (&perturbed - &base).scale(1.0 / h);
                    acc.add_assign_scaled(1.0, &derivative.square());
                }
            }
            moved[i] = rotations[i].clone();
        }
        Ok(acc)
    }

    /// Closed-form variance proxy bound
    /// `½ Σ_i [tr A_i² − tr[A_i]²/d + d·‖A_i − tr[A_i]/d·I‖²]`.
    pub fn variance_proxy_bound(&self) -> Result<f64> {
        let d = self.d as f64;
        let mut acc = 0.0;
        for a in &self.coefficients {
            let tr_a = a.trace();
            let tr_a2 = a.matmul(a).trace();
            let mut centered = a.clone();
            centered.add_assign_scaled(-tr_a / d, &RealMatrix::identity(self.d));
            let norm = centered.to_hermitian().op_norm()?;
            acc += 0.5 * (tr_a2 - tr_a * tr_a / d + d * norm * norm);
        }
        Ok(acc)
    }
}
