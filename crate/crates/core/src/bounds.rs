//! Pure calculators for the concentration bounds and trace inequalities:
//! polynomial moment bounds, exponential moment and tail bounds, the matrix
//! Chebyshev and Laplace-transform machinery, the mean value trace
//! inequality, and Young's inequality for matrix entropy.
//!
//! Everything here is a stateless function of scalars plus the occasional
//! matrix triple; the verification harness supplies the empirical or exact
//! left-hand sides.

use std::sync::Arc;

use thiserror::Error;

use crate::hermitian::{HermitianMatrix, MatrixError};

#[derive(Debug, Error)]
pub enum BoundError {
    #[error("moment order q must be 1 or at least 1.5, got {q} (orders in (1, 1.5) are unsupported)")]
    InadmissibleOrder { q: f64 },
    #[error("theta {theta} outside the admissible interval (-{limit}, {limit})")]
    ThetaOutOfRange { theta: f64, limit: f64 },
    #[error("grid is empty")]
    EmptyGrid,
    #[error("parameter {name} must be {requirement}, got {value}")]
    BadParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("psi takes negative value {value} at eigenvalue {eigenvalue}")]
    InvalidPsi { eigenvalue: f64, value: f64 },
    #[error("Y is not a density: {reason}")]
    InvalidDensity { reason: String },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

pub type Result<T> = std::result::Result<T, BoundError>;

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(BoundError::BadParameter {
            name,
            requirement: "positive and finite",
            value,
        });
    }
    Ok(())
}

fn check_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if !(value >= 0.0) || !value.is_finite() {
        return Err(BoundError::BadParameter {
            name,
            requirement: "non-negative and finite",
            value,
        });
    }
    Ok(())
}

fn check_order(q: f64) -> Result<()> {
    if q == 1.0 || q >= 1.5 {
        Ok(())
    } else {
        Err(BoundError::InadmissibleOrder { q })
    }
}

/// `√(c(2q−1)) · gamma_moment^{1/(2q)}`, the moment bound driven by
/// `E tr Γ(f)^q`. Orders in (1, 1.5) are rejected.
pub fn poly_moment_bound(c: f64, q: f64, gamma_moment: f64) -> Result<f64> {
    check_positive("c", c)?;
    check_order(q)?;
    check_nonnegative("gamma_moment", gamma_moment)?;
    Ok((c * (2.0 * q - 1.0)).sqrt() * gamma_moment.powf(1.0 / (2.0 * q)))
}

/// Uniform variant `d^{1/(2q)} · √(c(2q−1)v)` using the variance proxy.
pub fn poly_moment_bound_uniform(c: f64, q: f64, d: usize, v: f64) -> Result<f64> {
    check_positive("c", c)?;
    check_order(q)?;
    check_nonnegative("v", v)?;
    Ok((d as f64).powf(1.0 / (2.0 * q)) * (c * (2.0 * q - 1.0) * v).sqrt())
}

/// The r-curve β ↦ r_f(β): a constant majorant or an arbitrary callable.
#[derive(Clone)]
pub enum RCurve {
    Constant(f64),
    Curve(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl RCurve {
    pub fn eval(&self, beta: f64) -> f64 {
        match self {
            RCurve::Constant(v) => *v,
            RCurve::Curve(f) => f(beta),
        }
    }
}

/// Tail bound `d · inf_β exp(−t² / (2c·r(β) + 2t√(c/β)))`, minimized over
/// the supplied β grid. A constant r-curve also contributes its β → ∞ limit
/// `d·exp(−t²/(2cv))`, so the grid infimum never loses to the analytic one.
pub fn exp_tail_bound(
    d: usize,
    c: f64,
    r_curve: &RCurve,
    t: f64,
    beta_grid: &[f64],
) -> Result<f64> {
    check_positive("c", c)?;
    check_nonnegative("t", t)?;
    if beta_grid.is_empty() {
        return Err(BoundError::EmptyGrid);
    }
    if t == 0.0 {
        return Ok(d as f64);
    }
    let mut best = f64::INFINITY;
    for &beta in beta_grid {
        check_positive("beta", beta)?;
        let r = r_curve.eval(beta);
        let denom = 2.0 * c * r + 2.0 * t * (c / beta).sqrt();
        let value = if denom > 0.0 {
            (-(t * t) / denom).exp()
        } else {
            0.0
        };
        best = best.min(value);
    }
    if let RCurve::Constant(v) = r_curve {
        let denom = 2.0 * c * v;
        let limit = if denom > 0.0 {
            (-(t * t) / denom).exp()
        } else {
            0.0
        };
        best = best.min(limit);
    }
    Ok((d as f64 * best).clamp(0.0, d as f64))
}

/// Subgaussian tail `d·exp(−t²/(2cv))`, the β → ∞ limit under a finite
/// variance proxy.
pub fn subgaussian_tail(d: usize, c: f64, v: f64, t: f64) -> Result<f64> {
    check_positive("c", c)?;
    check_nonnegative("v", v)?;
    check_nonnegative("t", t)?;
    if t == 0.0 {
        return Ok(d as f64);
    }
    let denom = 2.0 * c * v;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(d as f64 * (-(t * t) / denom).exp())
}

/// Expectation bound `√(2cv·log d)` for the largest eigenvalue.
pub fn expectation_bound(d: usize, c: f64, v: f64) -> Result<f64> {
    check_positive("c", c)?;
    check_nonnegative("v", v)?;
    Ok((2.0 * c * v * (d as f64).ln()).sqrt())
}

/// Exponential moment bound `cθ²r(β) / (2(1 − cθ²/β))` on the admissible
/// open interval |θ| < √(β/c).
pub fn mgf_bound(c: f64, theta: f64, beta: f64, r: f64) -> Result<f64> {
    check_positive("c", c)?;
    check_positive("beta", beta)?;
    check_nonnegative("r", r)?;
    let limit = (beta / c).sqrt();
    if theta.abs() >= limit {
        return Err(BoundError::ThetaOutOfRange { theta, limit });
    }
    Ok(c * theta * theta * r / (2.0 * (1.0 - c * theta * theta / beta)))
}

/// One Chebyshev term `t^{−p} · E tr|X|^p`.
pub fn matrix_chebyshev(t: f64, p: f64, pth_moment: f64) -> Result<f64> {
    check_nonnegative("t", t)?;
    check_nonnegative("pth_moment", pth_moment)?;
    if !(p >= 1.0) {
        return Err(BoundError::BadParameter {
            name: "p",
            requirement: "at least 1",
            value: p,
        });
    }
    if pth_moment == 0.0 {
        return Ok(0.0);
    }
    Ok(t.powf(-p) * pth_moment)
}

/// The infimum of [`matrix_chebyshev`] over a moment table `(p, E tr|X|^p)`.
pub fn matrix_chebyshev_table(t: f64, moments: &[(f64, f64)]) -> Result<f64> {
    if moments.is_empty() {
        return Err(BoundError::EmptyGrid);
    }
    let mut best = f64::INFINITY;
    for &(p, m) in moments {
        best = best.min(matrix_chebyshev(t, p, m)?);
    }
    Ok(best)
}

/// Default Chebyshev order grid, matching the moments the polynomial
/// theorem provides.
pub const CHEBYSHEV_ORDERS: [f64; 7] = [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0];

/// Laplace-transform tail `d·exp(−t²/(2c₁ + 2c₂t))`.
pub fn laplace_tail(d: usize, c1: f64, c2: f64, t: f64) -> Result<f64> {
    check_nonnegative("c1", c1)?;
    check_nonnegative("c2", c2)?;
    check_nonnegative("t", t)?;
    if t == 0.0 {
        return Ok(d as f64);
    }
    let denom = 2.0 * c1 + 2.0 * c2 * t;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(d as f64 * (-(t * t) / denom).exp())
}

/// Laplace-transform expectation bound `√(2c₁·log d) + c₂·log d`.
pub fn laplace_expectation(d: usize, c1: f64, c2: f64) -> Result<f64> {
    check_nonnegative("c1", c1)?;
    check_nonnegative("c2", c2)?;
    let logd = (d as f64).ln();
    Ok((2.0 * c1 * logd).sqrt() + c2 * logd)
}

/// Two-sided wrapper over a one-sided eigenvalue tail: `min(1, 2·tail)`.
pub fn two_sided(one_sided_tail: f64) -> f64 {
    (2.0 * one_sided_tail).min(1.0)
}

/// Right-hand side of the mean value trace inequality,
/// `inf_{s>0} ¼ tr[(s(A−B)² + s⁻¹C²)(ψ(A) + ψ(B))]`, evaluated in closed
/// form at `s* = √(tr[C²K] / tr[(A−B)²K])` with `K = ψ(A) + ψ(B)`:
/// `½ √(tr[(A−B)²K] · tr[C²K])`. Either trace factor vanishing gives 0.
pub fn mean_value_rhs<F: Fn(f64) -> f64>(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    c: &HermitianMatrix,
    psi: F,
) -> Result<f64> {
    let psi_a = psi_checked(a, &psi)?;
    let psi_b = psi_checked(b, &psi)?;
    let kernel = &psi_a + &psi_b;
    let t_diff = trace_product(&(a - b).square(), &kernel);
    let t_c = trace_product(&c.square(), &kernel);
    if t_diff <= 0.0 || t_c <= 0.0 {
        return Ok(0.0);
    }
    Ok(0.5 * (t_diff * t_c).sqrt())
}

/// Same infimum approximated on an explicit s grid; the oracle guarding the
/// closed-form optimizer.
pub fn mean_value_rhs_grid<F: Fn(f64) -> f64>(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    c: &HermitianMatrix,
    psi: F,
    s_grid: &[f64],
) -> Result<f64> {
    if s_grid.is_empty() {
        return Err(BoundError::EmptyGrid);
    }
    let psi_a = psi_checked(a, &psi)?;
    let psi_b = psi_checked(b, &psi)?;
    let kernel = &psi_a + &psi_b;
    let t_diff = trace_product(&(a - b).square(), &kernel);
    let t_c = trace_product(&c.square(), &kernel);
    let mut best = f64::INFINITY;
    for &s in s_grid {
        check_positive("s", s)?;
        best = best.min(0.25 * (s * t_diff + t_c / s));
    }
    Ok(best)
}

/// Left-hand side of the mean value trace inequality, `tr[C(φ(A) − φ(B))]`.
pub fn mean_value_lhs<F: Fn(f64) -> f64>(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    c: &HermitianMatrix,
    phi: F,
) -> Result<f64> {
    let fa = a.matrix_function(&phi)?;
    let fb = b.matrix_function(&phi)?;
    Ok(trace_product(c, &(&fa - &fb)))
}

fn psi_checked<F: Fn(f64) -> f64>(m: &HermitianMatrix, psi: &F) -> Result<HermitianMatrix> {
    let eig = m.eig()?;
    let mut values = Vec::with_capacity(eig.eigenvalues.len());
    for &lam in &eig.eigenvalues {
        let v = psi(lam);
        if !v.is_finite() {
            return Err(BoundError::Matrix(MatrixError::FunctionDomain {
                eigenvalue: lam,
            }));
        }
        if v < 0.0 {
            return Err(BoundError::InvalidPsi {
                eigenvalue: lam,
                value: v,
            });
        }
        values.push(v);
    }
    Ok(eig.rebuild(&values))
}

/// `tr[X·Y]` for Hermitian X, Y (a real number).
pub fn trace_product(x: &HermitianMatrix, y: &HermitianMatrix) -> f64 {
    x.mul(y).trace().re
}

/// Both sides of Young's inequality for matrix entropy:
/// `tr̄[XY] ≤ log tr̄ e^X + tr̄[Y log Y]` for psd Y with `tr̄ Y = 1`.
///
/// Returns `(lhs, rhs)`; asserting the inequality is the caller's job.
pub fn young_entropy_sides(x: &HermitianMatrix, y: &HermitianMatrix) -> Result<(f64, f64)> {
    if x.dim() != y.dim() {
        return Err(BoundError::Matrix(MatrixError::DimensionMismatch {
            left: x.dim(),
            right: y.dim(),
        }));
    }
    let d = y.dim() as f64;
    let y_eigs = y.eig()?;
    let lambda_min = y_eigs.eigenvalues[0];
    if lambda_min < -1e-10 * (1.0 + y.op_norm()?) {
        return Err(BoundError::InvalidDensity {
            reason: format!("smallest eigenvalue {lambda_min} is negative"),
        });
    }
    let norm_trace = y.normalized_trace();
    if (norm_trace - 1.0).abs() > 1e-10 {
        return Err(BoundError::InvalidDensity {
            reason: format!("normalized trace is {norm_trace}, expected 1"),
        });
    }
    let lhs = trace_product(x, y) / d;
    // x log x extended by 0 at 0; tiny negative eigenvalues are rounding.
    let ylogy: f64 = y_eigs
        .eigenvalues
        .iter()
        .map(|&l| if l > 0.0 { l * l.ln() } else { 0.0 })
        .sum::<f64>()
        / d;
    let log_mgf = x.expm()?.normalized_trace().ln();
    Ok((lhs, log_mgf + ylogy))
}

/// The Gibbs density `e^X / tr̄ e^X`, which saturates Young's inequality.
pub fn gibbs_density(x: &HermitianMatrix) -> Result<HermitianMatrix> {
    let e = x.expm()?;
    Ok(e.scale(1.0 / e.normalized_trace()))
}

/// Log-spaced β grid spanning `[1e-3, 1e6]·(1/c)`, the default search grid
/// for the tail-bound infimum.
pub fn default_beta_grid(c: f64) -> Vec<f64> {
    let lo = 1e-3 / c;
    let hi = 1e6 / c;
    let count = 64;
    let ratio = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (ratio * i as f64).exp()).collect()
}
