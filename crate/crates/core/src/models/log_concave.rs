//! Log-concave diffusion models `dZ = -∇W(Z) dt + √2 dB` with uniformly
//! strongly convex potential, and the Ornstein–Uhlenbeck special case
//! `W(z) = zᵀz/2`, which admits exact stationary sampling and the Mehler
//! form of the semigroup.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{MatrixValuedMap, ModelError, Result};
use crate::hermitian::{CMatrix, HermitianMatrix};

type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type HessFn = dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync;

/// A log-concave measure `dμ ∝ e^{-W(z)} dz` described by its potential
/// gradient, with strong-convexity parameter η (Hess W ⪰ η·I).
#[derive(Clone)]
pub struct LogConcaveModel {
    n: usize,
    eta: f64,
    exact_gaussian: bool,
    grad_potential: Arc<GradFn>,
    hess_potential: Option<Arc<HessFn>>,
}

impl LogConcaveModel {
    /// The standard Gaussian: `W(z) = zᵀz/2`, η = 1, exact sampling.
    pub fn gaussian(n: usize) -> Self {
        Self {
            n,
            eta: 1.0,
            exact_gaussian: true,
            grad_potential: Arc::new(|z: &[f64]| z.to_vec()),
            hess_potential: Some(Arc::new(|z: &[f64]| {
                let n = z.len();
                let mut h = vec![vec![0.0; n]; n];
                for (i, row) in h.iter_mut().enumerate() {
                    row[i] = 1.0;
                }
                h
            })),
        }
    }

    /// A general potential given by its gradient; η must lower-bound the
    /// Hessian eigenvalues everywhere.
    pub fn new<G>(n: usize, eta: f64, grad_potential: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            n,
            eta,
            exact_gaussian: false,
            grad_potential: Arc::new(grad_potential),
            hess_potential: None,
        }
    }

    pub fn with_hessian<H>(mut self, hess: H) -> Self
    where
        H: Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    {
        self.hess_potential = Some(Arc::new(hess));
        self
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn is_exact_gaussian(&self) -> bool {
        self.exact_gaussian
    }

    /// Bakry–Émery constant c = η⁻¹.
    pub fn bakry_emery_constant(&self) -> f64 {
        1.0 / self.eta
    }

    pub fn grad_potential(&self, z: &[f64]) -> Vec<f64> {
        (self.grad_potential)(z)
    }

    /// Hessian of the potential; analytic when provided, otherwise central
    /// differences of the gradient.
    pub fn hess_potential(&self, z: &[f64]) -> Vec<Vec<f64>> {
        if let Some(h) = &self.hess_potential {
            return h(z);
        }
        let n = self.n;
        let mut probe = z.to_vec();
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let h = 1e-5 * (1.0 + z[j].abs());
            probe[j] = z[j] + h;
            let plus = (self.grad_potential)(&probe);
            probe[j] = z[j] - h;
            let minus = (self.grad_potential)(&probe);
            probe[j] = z[j];
            cols.push(
                plus.iter()
                    .zip(&minus)
                    .map(|(p, m)| (p - m) / (2.0 * h))
                    .collect::<Vec<f64>>(),
            );
        }
        (0..n)
            .map(|i| (0..n).map(|j| cols[j][i]).collect())
            .collect()
    }

    /// One Euler–Maruyama step `z − h∇W(z) + √(2h)·ξ`.
    pub fn langevin_step<R: Rng>(&self, z: &[f64], h: f64, rng: &mut R) -> Result<Vec<f64>> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(ModelError::InvalidStep { h });
        }
        let grad = (self.grad_potential)(z);
        let noise = (2.0 * h).sqrt();
        Ok(z.iter()
            .zip(&grad)
            .map(|(&zi, &gi)| zi - h * gi + noise * rng.sample::<f64, _>(StandardNormal))
            .collect())
    }

    /// Stationary sampler. Exact for the Gaussian model; otherwise an
    /// Euler–Maruyama chain with burn-in `10/(η·h)` steps and thinning every
    /// `⌈1/h⌉` steps (heuristics, overridable through [`LangevinChain`]).
    pub fn sample_stationary<R: Rng>(&self, count: usize, h: f64, rng: &mut R) -> Result<Vec<Vec<f64>>> {
        if self.exact_gaussian {
            return Ok((0..count)
                .map(|_| {
                    (0..self.n)
                        .map(|_| rng.sample::<f64, _>(StandardNormal))
                        .collect()
                })
                .collect());
        }
        let mut chain = LangevinChain::new(self.clone(), h)?;
        chain.burn_in(rng)?;
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(chain.next_sample(rng)?);
        }
        Ok(out)
    }

    /// Monte Carlo estimate of the Ornstein–Uhlenbeck semigroup action via
    /// the Mehler interpolation `f(e^{-t} z + √(1-e^{-2t}) ξ)`.
    ///
    /// Requires the exact-gaussian model; `t = 0` returns `f(z)` exactly,
    /// with no sampling.
    pub fn ou_semigroup_estimate(
        &self,
        f: &MatrixValuedMap,
        z: &[f64],
        t: f64,
        samples: usize,
        seed: u64,
    ) -> Result<HermitianMatrix> {
        if !self.exact_gaussian {
            return Err(ModelError::NotGaussian);
        }
        if z.len() != self.n {
            return Err(ModelError::PointDimension {
                expected: self.n,
                got: z.len(),
            });
        }
        if t == 0.0 {
            return f.eval(z);
        }
        let decay = (-t).exp();
        let spread = (1.0 - (-2.0 * t).exp()).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut acc = HermitianMatrix::zeros(f.dim());
        let mut point = vec![0.0; self.n];
        for _ in 0..samples {
            for (p, &zi) in point.iter_mut().zip(z) {
                let xi: f64 = rng.sample(StandardNormal);
                *p = decay * zi + spread * xi;
            }
            acc.add_assign_scaled(1.0 / samples as f64, &f.eval(&point)?);
        }
        Ok(acc)
    }
}

/// Euler–Maruyama chain with the model's default burn-in and thinning.
pub struct LangevinChain {
    model: LogConcaveModel,
    h: f64,
    thin: usize,
    state: Vec<f64>,
}

impl LangevinChain {
    pub fn new(model: LogConcaveModel, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(ModelError::InvalidStep { h });
        }
        let state = vec![0.0; model.ambient_dim()];
        let thin = (1.0 / h).ceil() as usize;
        Ok(Self {
            model,
            h,
            thin,
            state,
        })
    }

    pub fn burn_in<R: Rng>(&mut self, rng: &mut R) -> Result<()> {
        let steps = (10.0 / (self.model.eta * self.h)).ceil() as usize;
        for _ in 0..steps {
            self.state = self.model.langevin_step(&self.state, self.h, rng)?;
        }
        Ok(())
    }

    pub fn next_sample<R: Rng>(&mut self, rng: &mut R) -> Result<Vec<f64>> {
        for _ in 0..self.thin {
            self.state = self.model.langevin_step(&self.state, self.h, rng)?;
        }
        Ok(self.state.clone())
    }
}

/// Carré du champ of the diffusion: `Γ(f)(z) = Σ_i (∂_i f(z))²`.
pub fn gamma_euclidean(f: &MatrixValuedMap, z: &[f64]) -> Result<HermitianMatrix> {
    let partials = f.partials(z)?;
    let mut acc = HermitianMatrix::zeros(f.dim());
    for p in &partials {
        acc.add_assign_scaled(1.0, &p.square());
    }
    Ok(acc)
}

/// Iterated carré du champ of the diffusion:
/// `Γ₂(f)(z) = Σ_{ij} ∂_{ij}W · ∂_i f · ∂_j f + Σ_{ij} (∂_{ij} f)²`.
pub fn gamma2_euclidean(
    f: &MatrixValuedMap,
    model: &LogConcaveModel,
    z: &[f64],
) -> Result<HermitianMatrix> {
    let partials = f.partials(z)?;
    let second = f.second_partials(z)?;
    let hess = model.hess_potential(z);
    let n = partials.len();
    let mut acc = CMatrix::zeros(f.dim(), f.dim());
    for i in 0..n {
        for j in 0..n {
            let w = hess[i][j];
            if w != 0.0 {
                acc.add_assign_scaled(w, &partials[i].mul(&partials[j]));
            }
            acc.add_assign_scaled(1.0, &second[i][j].square().to_cmatrix());
        }
    }
    // The exact value is Hermitian; averaging removes rounding asymmetry.
    Ok(acc.hermitian_part())
}
