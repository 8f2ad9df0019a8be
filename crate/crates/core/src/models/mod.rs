//! Continuous random matrix models: log-concave diffusions (with the
//! Ornstein–Uhlenbeck process as the exact special case), the unit sphere,
//! and conjugation orbits on the special orthogonal group.
//!
//! Each model couples a sampler for its stationary measure with a closed-form
//! carré du champ evaluator, plus the curvature constant and variance-proxy
//! bound that feed the tail calculators in [`crate::bounds`]. Generic
//! derivative-based evaluators (tangential gradients, geodesic finite
//! differences) serve as independent oracles for the closed forms.

pub mod log_concave;
pub mod sphere;
pub mod so_group;

pub use log_concave::{gamma2_euclidean, gamma_euclidean, LogConcaveModel};
pub use so_group::{
    expm_skew, skew_basis_sum, skew_basis_sum_closed_form, so_sample_haar, RealMatrix,
    SOConjugationModel,
};
pub use sphere::{
    sphere_brownian_step, sphere_sample, sphere_tangential_gradient, SphereLinearModel,
    SphereQuadraticModel,
};

use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

use crate::hermitian::{HermitianMatrix, MatrixError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("operation requires the exact-gaussian model")]
    NotGaussian,
    #[error("point has {got} coordinates, model expects {expected}")]
    PointDimension { expected: usize, got: usize },
    #[error("need at least {min} coefficient matrices, got {got}")]
    TooFewCoefficients { min: usize, got: usize },
    #[error("coefficient matrices must share one dimension: found {left} and {right}")]
    MixedDimensions { left: usize, right: usize },
    #[error("coefficient {index} must be real symmetric")]
    NotRealSymmetric { index: usize },
    #[error("matrix {index} is not orthogonal: deviation {deviation:.3e}")]
    NotOrthogonal { index: usize, deviation: f64 },
    #[error("step size must be positive and finite, got {h}")]
    InvalidStep { h: f64 },
    #[error("map provides no partial derivatives and no evaluator to difference")]
    MissingPartials,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Domain tag of a matrix-valued map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// `R^n`.
    Euclidean { n: usize },
    /// The unit sphere `S^n` embedded in `R^{n+1}`.
    Sphere { n: usize },
    /// `copies` independent SO(d) matrices, flattened row-major.
    SOProduct { d: usize, copies: usize },
}

impl Domain {
    /// Number of ambient coordinates a point carries.
    pub fn coordinate_count(&self) -> usize {
        match self {
            Domain::Euclidean { n } => *n,
            Domain::Sphere { n } => n + 1,
            Domain::SOProduct { d, copies } => d * d * copies,
        }
    }
}

type EvalFn = dyn Fn(&[f64]) -> HermitianMatrix + Send + Sync;
type PartialsFn = dyn Fn(&[f64]) -> Vec<HermitianMatrix> + Send + Sync;

/// A matrix-valued map on one of the model domains, with optional analytic
/// partial derivatives. When partials are absent they are approximated by
/// central differences with step `1e-5·(1 + |coordinate|)`.
#[derive(Clone)]
pub struct MatrixValuedMap {
    domain: Domain,
    dim: usize,
    eval: Arc<EvalFn>,
    partials: Option<Arc<PartialsFn>>,
}

impl MatrixValuedMap {
    pub fn new<F>(domain: Domain, dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> HermitianMatrix + Send + Sync + 'static,
    {
        Self {
            domain,
            dim,
            eval: Arc::new(eval),
            partials: None,
        }
    }

    pub fn with_partials<F>(mut self, partials: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<HermitianMatrix> + Send + Sync + 'static,
    {
        self.partials = Some(Arc::new(partials));
        self
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_analytic_partials(&self) -> bool {
        self.partials.is_some()
    }

    pub fn eval(&self, z: &[f64]) -> Result<HermitianMatrix> {
        self.check_point(z)?;
        Ok((self.eval)(z))
    }

    /// Ambient partial derivatives, analytic when available and central
    /// finite differences otherwise.
    pub fn partials(&self, z: &[f64]) -> Result<Vec<HermitianMatrix>> {
        self.check_point(z)?;
        if let Some(p) = &self.partials {
            return Ok(p(z));
        }
        let mut out = Vec::with_capacity(z.len());
        let mut probe = z.to_vec();
        for i in 0..z.len() {
            let h = 1e-5 * (1.0 + z[i].abs());
            probe[i] = z[i] + h;
            let plus = (self.eval)(&probe);
            probe[i] = z[i] - h;
            let minus = (self.eval)(&probe);
            probe[i] = z[i];
            out.push((&plus - &minus).scale(1.0 / (2.0 * h)));
        }
        Ok(out)
    }

    /// Second partials `∂_i ∂_j f`, as central differences of [`Self::partials`].
    pub fn second_partials(&self, z: &[f64]) -> Result<Vec<Vec<HermitianMatrix>>> {
        self.check_point(z)?;
        let n = z.len();
        let mut columns = Vec::with_capacity(n);
        let mut probe = z.to_vec();
        for j in 0..n {
            let h = 1e-5 * (1.0 + z[j].abs());
            probe[j] = z[j] + h;
            let plus = self.partials(&probe)?;
            probe[j] = z[j] - h;
            let minus = self.partials(&probe)?;
            probe[j] = z[j];
            let col: Vec<HermitianMatrix> = plus
                .iter()
                .zip(&minus)
                .map(|(p, m)| (p - m).scale(1.0 / (2.0 * h)))
                .collect();
            columns.push(col);
        }
        // columns[j][i] = ∂_j ∂_i f; reindex to out[i][j].
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push((0..n).map(|j| columns[j][i].clone()).collect());
        }
        Ok(out)
    }

    fn check_point(&self, z: &[f64]) -> Result<()> {
        let expected = self.domain.coordinate_count();
        if z.len() != expected {
            return Err(ModelError::PointDimension {
                expected,
                got: z.len(),
            });
        }
        Ok(())
    }
}

pub(crate) fn validate_coefficients(
    coefficients: &[HermitianMatrix],
    min: usize,
) -> Result<usize> {
    if coefficients.len() < min {
        return Err(ModelError::TooFewCoefficients {
            min,
            got: coefficients.len(),
        });
    }
    let dim = coefficients[0].dim();
    for c in coefficients {
        if c.dim() != dim {
            return Err(ModelError::MixedDimensions {
                left: dim,
                right: c.dim(),
            });
        }
    }
    Ok(dim)
}

/// One of the concrete models with a known Bakry–Émery constant and a
/// closed-form variance-proxy bound; the sampling interface used by the
/// Monte Carlo dominance checks.
#[derive(Clone)]
pub enum ConcentrationModel {
    /// `f(z) = Σ z_i A_i` with z standard normal on R^n.
    GaussianSeries { coefficients: Vec<HermitianMatrix> },
    SphereLinear(SphereLinearModel),
    SphereQuadratic(SphereQuadraticModel),
    SOConjugation(SOConjugationModel),
}

impl ConcentrationModel {
    pub fn gaussian_series(coefficients: Vec<HermitianMatrix>) -> Result<Self> {
        validate_coefficients(&coefficients, 1)?;
        Ok(Self::GaussianSeries { coefficients })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::GaussianSeries { .. } => "gaussian-series",
            Self::SphereLinear(_) => "sphere-linear",
            Self::SphereQuadratic(_) => "sphere-quadratic",
            Self::SOConjugation(_) => "so-conjugation",
        }
    }

    /// Matrix dimension of the model's values.
    pub fn dim(&self) -> usize {
        match self {
            Self::GaussianSeries { coefficients } => coefficients[0].dim(),
            Self::SphereLinear(m) => m.dim(),
            Self::SphereQuadratic(m) => m.dim(),
            Self::SOConjugation(m) => m.dim(),
        }
    }

    /// The Bakry–Émery constant c of the model's semigroup: 1 for the
    /// Ornstein–Uhlenbeck driver, (n-1)^{-1} on the sphere S^n, 4/(d-1) on
    /// SO(d) products.
    pub fn bakry_emery_constant(&self) -> f64 {
        match self {
            Self::GaussianSeries { .. } => 1.0,
            Self::SphereLinear(m) => 1.0 / (m.sphere_dim() as f64 - 1.0),
            Self::SphereQuadratic(m) => 1.0 / (m.sphere_dim() as f64 - 1.0),
            Self::SOConjugation(m) => 4.0 / (m.dim() as f64 - 1.0),
        }
    }

    /// Closed-form upper bound on the variance proxy `sup ‖Γ(f)‖`.
    pub fn variance_proxy_bound(&self) -> Result<f64> {
        match self {
            Self::GaussianSeries { coefficients } => {
                let mut acc = HermitianMatrix::zeros(coefficients[0].dim());
                for a in coefficients {
                    acc.add_assign_scaled(1.0, &a.square());
                }
                Ok(acc.op_norm()?)
            }
            Self::SphereLinear(m) => m.variance_proxy_bound(),
            Self::SphereQuadratic(m) => m.variance_proxy_bound(),
            Self::SOConjugation(m) => m.variance_proxy_bound(),
        }
    }

    /// Draw one stationary sample and evaluate the model's matrix function.
    pub fn sample_value<R: Rng>(&self, rng: &mut R) -> HermitianMatrix {
        match self {
            Self::GaussianSeries { coefficients } => {
                let mut acc = HermitianMatrix::zeros(coefficients[0].dim());
                for a in coefficients {
                    let z: f64 = rng.sample(rand_distr::StandardNormal);
                    acc.add_assign_scaled(z, a);
                }
                acc
            }
            Self::SphereLinear(m) => {
                let x = sphere_sample(m.sphere_dim(), rng);
                m.eval(&x)
            }
            Self::SphereQuadratic(m) => {
                let x = sphere_sample(m.sphere_dim(), rng);
                m.eval(&x)
            }
            Self::SOConjugation(m) => {
                let os = m.sample_point(rng);
                m.eval(&os).expect("sampled rotations are orthogonal")
            }
        }
    }

    /// The exact mean of the model's random matrix, where available.
    ///
    /// The linear models are symmetric (mean zero); Sphere II has mean
    /// `(Σ A_i)/(n+1)`; the SO conjugation orbit's mean is left to the
    /// pilot estimate (`None`).
    pub fn exact_mean(&self) -> Option<HermitianMatrix> {
        match self {
            Self::GaussianSeries { coefficients } => {
                Some(HermitianMatrix::zeros(coefficients[0].dim()))
            }
            Self::SphereLinear(m) => Some(HermitianMatrix::zeros(m.dim())),
            Self::SphereQuadratic(m) => {
                let mut acc = HermitianMatrix::zeros(m.dim());
                for a in m.coefficients() {
                    acc.add_assign_scaled(1.0 / m.coefficients().len() as f64, a);
                }
                Some(acc)
            }
            Self::SOConjugation(_) => None,
        }
    }
}

#[cfg(test)]
mod tests;
