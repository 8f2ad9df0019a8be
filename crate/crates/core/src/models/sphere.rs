//! The unit sphere S^n ⊂ R^{n+1} with its uniform measure: sampling,
//! geodesic Brownian steps, tangential gradients, and the two coefficient
//! models with closed-form carré du champ.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{validate_coefficients, Domain, MatrixValuedMap, Result};
use crate::hermitian::HermitianMatrix;

/// Uniform point on S^n: a normalized (n+1)-dimensional standard normal.
pub fn sphere_sample<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..n + 1).map(|_| rng.sample(StandardNormal)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return g.iter().map(|x| x / norm).collect();
        }
    }
}

/// One geodesic Brownian-motion step: sample a tangent Gaussian v ⊥ x with
/// per-direction variance 2h and move along the geodesic
/// `x·cos‖v‖ + (v/‖v‖)·sin‖v‖`. The step stays on the sphere exactly.
pub fn sphere_brownian_step<R: Rng>(x: &[f64], h: f64, rng: &mut R) -> Vec<f64> {
    debug_assert!((x.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-9);
    if h == 0.0 {
        return x.to_vec();
    }
    let scale = (2.0 * h).sqrt();
    let g: Vec<f64> = (0..x.len())
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let radial: f64 = g.iter().zip(x).map(|(gi, xi)| gi * xi).sum();
    let v: Vec<f64> = g.iter().zip(x).map(|(gi, xi)| gi - radial * xi).collect();
    let r = v.iter().map(|vi| vi * vi).sum::<f64>().sqrt();
    if r < 1e-300 {
        return x.to_vec();
    }
    let (sin_r, cos_r) = r.sin_cos();
    let mut out: Vec<f64> = x
        .iter()
        .zip(&v)
        .map(|(xi, vi)| xi * cos_r + vi / r * sin_r)
        .collect();
    let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
    for o in &mut out {
        *o /= norm;
    }
    out
}

/// Ambient components of the tangential gradient: the ordinary gradient
/// projected by `I − xxᵀ` onto the tangent space at x.
pub fn sphere_tangential_gradient(
    f: &MatrixValuedMap,
    x: &[f64],
) -> Result<Vec<HermitianMatrix>> {
    let grads = f.partials(x)?;
    let dim = f.dim();
    let mut radial = HermitianMatrix::zeros(dim);
    for (g, &xi) in grads.iter().zip(x) {
        radial.add_assign_scaled(xi, g);
    }
    Ok(grads
        .iter()
        .zip(x)
        .map(|(g, &xi)| {
            let mut out = g.clone();
            out.add_assign_scaled(-xi, &radial);
            out
        })
        .collect())
}

/// Carré du champ from tangential components: `Σ_i G_i²` where G are the
/// ambient components of the projected gradient. Independent of the models'
/// closed forms; used as their oracle.
pub fn gamma_from_tangential_gradient(
    f: &MatrixValuedMap,
    x: &[f64],
) -> Result<HermitianMatrix> {
    let tangential = sphere_tangential_gradient(f, x)?;
    let mut acc = HermitianMatrix::zeros(f.dim());
    for g in &tangential {
        acc.add_assign_scaled(1.0, &g.square());
    }
    Ok(acc)
}

/// `f(x) = Σ_{i=1}^{n+1} x_i A_i` on S^n.
#[derive(Debug, Clone)]
pub struct SphereLinearModel {
    coefficients: Vec<HermitianMatrix>,
    dim: usize,
}

impl SphereLinearModel {
    pub fn new(coefficients: Vec<HermitianMatrix>) -> Result<Self> {
        // n ≥ 2 means at least three ambient coordinates.
        let dim = validate_coefficients(&coefficients, 3)?;
        Ok(Self { coefficients, dim })
    }

    pub fn coefficients(&self) -> &[HermitianMatrix] {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The n of S^n (one less than the coefficient count).
    pub fn sphere_dim(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, x: &[f64]) -> HermitianMatrix {
        let mut acc = HermitianMatrix::zeros(self.dim);
        for (a, &xi) in self.coefficients.iter().zip(x) {
            acc.add_assign_scaled(xi, a);
        }
        acc
    }

    /// Sum of squared coefficients `Σ A_i²`.
    pub fn coefficient_square_sum(&self) -> HermitianMatrix {
        let mut acc = HermitianMatrix::zeros(self.dim);
        for a in &self.coefficients {
            acc.add_assign_scaled(1.0, &a.square());
        }
        acc
    }

    /// Closed-form carré du champ `Γ(f)(x) = Σ A_i² − (Σ x_i A_i)²`.
    pub fn gamma(&self, x: &[f64]) -> HermitianMatrix {
        let mut acc = self.coefficient_square_sum();
        acc.add_assign_scaled(-1.0, &self.eval(x).square());
        acc
    }

    /// Variance proxy bound `‖Σ A_i²‖`.
    pub fn variance_proxy_bound(&self) -> Result<f64> {
        Ok(self.coefficient_square_sum().op_norm()?)
    }

    pub fn as_map(&self) -> MatrixValuedMap {
        let coeffs = self.coefficients.clone();
        let partial_coeffs = self.coefficients.clone();
        let dim = self.dim;
        MatrixValuedMap::new(
            Domain::Sphere {
                n: self.sphere_dim(),
            },
            dim,
            move |x: &[f64]| {
                let mut acc = HermitianMatrix::zeros(dim);
                for (a, &xi) in coeffs.iter().zip(x) {
                    acc.add_assign_scaled(xi, a);
                }
                acc
            },
        )
        .with_partials(move |_x: &[f64]| partial_coeffs.clone())
    }
}

/// `f(x) = Σ_{i=1}^{n+1} x_i² A_i` on S^n.
#[derive(Debug, Clone)]
pub struct SphereQuadraticModel {
    coefficients: Vec<HermitianMatrix>,
    dim: usize,
}

impl SphereQuadraticModel {
    pub fn new(coefficients: Vec<HermitianMatrix>) -> Result<Self> {
        let dim = validate_coefficients(&coefficients, 3)?;
        Ok(Self { coefficients, dim })
    }

    pub fn coefficients(&self) -> &[HermitianMatrix] {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sphere_dim(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, x: &[f64]) -> HermitianMatrix {
        let mut acc = HermitianMatrix::zeros(self.dim);
        for (a, &xi) in self.coefficients.iter().zip(x) {
            acc.add_assign_scaled(xi * xi, a);
        }
        acc
    }

    /// Closed-form carré du champ `Γ(f)(x) = 2 Σ_{ij} x_i² x_j² (A_i − A_j)²`.
    pub fn gamma(&self, x: &[f64]) -> HermitianMatrix {
        let mut acc = HermitianMatrix::zeros(self.dim);
        for i in 0..self.coefficients.len() {
            for j in i + 1..self.coefficients.len() {
                let diff = &self.coefficients[i] - &self.coefficients[j];
                let w = 4.0 * x[i] * x[i] * x[j] * x[j];
                acc.add_assign_scaled(w, &diff.square());
            }
        }
        acc
    }

    /// Variance proxy bound `min(2a², 4b²)` with `a = max ‖A_i − A_j‖` and
    /// `b = min_B max_i ‖A_i − B‖`.
    ///
    /// The min over B is approximated: start from the midpoint of the
    /// farthest pair and refine with a few subgradient steps. Any B gives a
    /// valid upper bound, so the result is always a true bound on the proxy.
    pub fn variance_proxy_bound(&self) -> Result<f64> {
        let k = self.coefficients.len();
        let mut a = 0.0f64;
        let mut far_pair = (0, 1);
        for i in 0..k {
            for j in i + 1..k {
                let dist = (&self.coefficients[i] - &self.coefficients[j]).op_norm()?;
                if dist > a {
                    a = dist;
                    far_pair = (i, j);
                }
            }
        }

        let radius = |b: &HermitianMatrix| -> Result<(f64, usize)> {
            let mut worst = (0.0f64, 0usize);
            for (i, ai) in self.coefficients.iter().enumerate() {
                let r = (ai - b).op_norm()?;
                if r > worst.0 {
                    worst = (r, i);
                }
            }
            Ok(worst)
        };

        let mut center = {
            let mut c = self.coefficients[far_pair.0].clone();
            c.add_assign_scaled(1.0, &self.coefficients[far_pair.1]);
            c.scale(0.5)
        };
        let (mut best_b, _) = radius(&center)?;
        for step in 0..25 {
            let (r, worst_idx) = radius(&center)?;
            if r < best_b {
                best_b = r;
            }
            let rate = 0.5 / (step + 2) as f64;
            let mut next = center.scale(1.0 - rate);
            next.add_assign_scaled(rate, &self.coefficients[worst_idx]);
            center = next;
        }

        Ok((2.0 * a * a).min(4.0 * best_b * best_b))
    }

    pub fn as_map(&self) -> MatrixValuedMap {
        let coeffs = self.coefficients.clone();
        let partial_coeffs = self.coefficients.clone();
        let dim = self.dim;
        MatrixValuedMap::new(
            Domain::Sphere {
                n: self.sphere_dim(),
            },
            dim,
            move |x: &[f64]| {
                let mut acc = HermitianMatrix::zeros(dim);
                for (a, &xi) in coeffs.iter().zip(x) {
                    acc.add_assign_scaled(xi * xi, a);
                }
                acc
            },
        )
        .with_partials(move |x: &[f64]| {
            partial_coeffs
                .iter()
                .zip(x)
                .map(|(a, &xi)| a.scale(2.0 * xi))
                .collect()
        })
    }
}

