//! Randomized fuzz over the standalone trace inequalities (no Markov
//! structure involved): the mean value trace inequality, Young's inequality
//! for matrix entropy, and the structural identities of the SO(d) and
//! sphere models against their derivative oracles.

use serde_json::json;

use super::finite_checks::PhiFamily;
use super::{random_hermitian, stream_rng, timed, CheckKind, Result, VerificationReport, WorstCase};
use crate::bounds;
use crate::hermitian::HermitianMatrix;
use crate::models::{
    gamma2_euclidean, gamma_euclidean, so_group, sphere, Domain, LogConcaveModel, MatrixValuedMap,
    RealMatrix, SOConjugationModel, SphereLinearModel, SphereQuadraticModel,
};
use rand::Rng;
use rand_distr::StandardNormal;

pub const DEFAULT_MEAN_VALUE_FAMILIES: [PhiFamily; 8] = [
    PhiFamily::Cube,
    PhiFamily::SignedPower { q: 1.5 },
    PhiFamily::SignedPower { q: 2.0 },
    PhiFamily::SignedPower { q: 3.0 },
    PhiFamily::Exp { theta: 0.5 },
    PhiFamily::Exp { theta: -0.5 },
    PhiFamily::Exp { theta: 1.0 },
    PhiFamily::Exp { theta: -1.0 },
];

/// Mean value trace inequality `tr[C(φ(A) − φ(B))] ≤ mean_value_rhs` on
/// random triples. With [`PhiFamily::ConcaveProbe`] the convexity premise
/// fails and violations are expected: the negative control.
pub fn mean_value_trace(
    trials: usize,
    dim: usize,
    families: &[PhiFamily],
    tolerance: f64,
    seed: u64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = stream_rng(seed, "mean-value-trace");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..trials {
            let a = random_hermitian(dim, &mut rng);
            let b = random_hermitian(dim, &mut rng);
            let c = random_hermitian(dim, &mut rng);
            for family in families {
                let lhs = bounds::mean_value_lhs(&a, &b, &c, family.phi())?;
                let rhs = bounds::mean_value_rhs(&a, &b, &c, family.psi())?;
                worst.observe(rhs - lhs, tolerance * (1.0 + rhs.abs()), || {
                    json!({"trial": trial, "phi": family.label()})
                });
            }
        }
        Ok(worst.into_report("mean-value-trace", kind, trials as u64, seed))
    })
}

/// Counterexample search for the convexity premise of the mean value trace
/// inequality: with φ(x) = x·|x|^{1/2} the derivative magnitude is concave,
/// and aligned triples (A, B psd, C = A − B) violate the bound. A passing
/// run of this control would mean the check cannot detect violations.
pub fn mean_value_concave_control(
    trials: usize,
    dim: usize,
    tolerance: f64,
    seed: u64,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = stream_rng(seed, "mean-value-concave");
        let mut worst = WorstCase::new(tolerance);
        let family = PhiFamily::ConcaveProbe;
        for trial in 0..trials {
            let a = random_hermitian(dim, &mut rng).square();
            let b = random_hermitian(dim, &mut rng).square();
            let c = &a - &b;
            let lhs = bounds::mean_value_lhs(&a, &b, &c, family.phi())?;
            let rhs = bounds::mean_value_rhs(&a, &b, &c, family.psi())?;
            worst.observe(rhs - lhs, tolerance * (1.0 + rhs.abs()), || {
                json!({"trial": trial, "phi": family.label()})
            });
        }
        Ok(worst.into_report(
            "mean-value-concave-psi",
            CheckKind::NegativeControl,
            trials as u64,
            seed,
        ))
    })
}

/// Young's inequality for matrix entropy on random (X, Y) pairs with Y a
/// random density (normalized square of a random Hermitian matrix).
pub fn young_entropy(
    trials: usize,
    dim: usize,
    tolerance: f64,
    seed: u64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = stream_rng(seed, "young-entropy");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..trials {
            let x = random_hermitian(dim, &mut rng);
            let g = random_hermitian(dim, &mut rng);
            let sq = g.square();
            let y = sq.scale(1.0 / sq.normalized_trace());
            let (lhs, rhs) = bounds::young_entropy_sides(&x, &y)?;
            worst.observe(rhs - lhs, tolerance * (1.0 + rhs.abs()), || {
                json!({"trial": trial})
            });
        }
        Ok(worst.into_report("young-entropy", kind, trials as u64, seed))
    })
}

/// Gibbs tightness: with `Y = e^X / tr̄ e^X` Young's inequality is an
/// equality, within tolerance.
pub fn young_gibbs_tightness(
    trials: usize,
    dim: usize,
    tolerance: f64,
    seed: u64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = stream_rng(seed, "young-gibbs");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..trials {
            let x = random_hermitian(dim, &mut rng);
            let y = bounds::gibbs_density(&x)?;
            let (lhs, rhs) = bounds::young_entropy_sides(&x, &y)?;
            worst.observe(-(lhs - rhs).abs(), tolerance * (1.0 + rhs.abs()), || {
                json!({"trial": trial})
            });
        }
        Ok(worst.into_report("young-gibbs-tightness", kind, trials as u64, seed))
    })
}

/// The skew-basis summation identity
/// `Σ_{k<l} S_kl M S_kl = −½(tr[M]·I − Mᵀ)` on random real matrices.
pub fn skew_basis_identity(
    trials: usize,
    dims: &[usize],
    tolerance: f64,
    seed: u64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = stream_rng(seed, "skew-basis");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..trials {
            let d = dims[trial % dims.len()];
            let m = RealMatrix::from_fn(d, |_, _| rng.sample(StandardNormal));
            let direct = so_group::skew_basis_sum(&m);
            let closed = so_group::skew_basis_sum_closed_form(&m);
            let deviation = direct.sub(&closed).max_abs();
            worst.observe(-deviation, tolerance * (1.0 + m.max_abs()), || {
                json!({"trial": trial, "d": d})
            });
        }
        Ok(worst.into_report("skew-basis-identity", kind, trials as u64, seed))
    })
}

/// Haar sampler invariants: orthogonality to 1e-12-scale and det = +1.
pub fn haar_invariants(
    trials: usize,
    d: usize,
    tolerance: f64,
    seed: u64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = stream_rng(seed, "haar");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..trials {
            let o = so_group::so_sample_haar(d, &mut rng);
            let orth = o.orthogonality_defect();
            let det_dev = (o.det() - 1.0).abs();
            worst.observe(-orth.max(det_dev), tolerance * d as f64, || {
                json!({"trial": trial})
            });
        }
        Ok(worst.into_report("haar-invariants", kind, trials as u64, seed))
    })
}

/// Analytic Bakry–Émery check for a strongly log-concave diffusion:
/// `Γ(f) ⪯ c·Γ₂(f)` with `c = 1/η`, probed pointwise on random matrix
/// polynomials of degree ≤ 2 (partials taken by central differences, hence
/// the looser default tolerance).
pub fn log_concave_bakry_emery(
    model: &LogConcaveModel,
    maps: usize,
    points_per_map: usize,
    c_override: Option<f64>,
    tolerance: f64,
    seed: u64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = stream_rng(seed, "log-concave-bakry-emery");
        let mut worst = WorstCase::new(tolerance);
        let n = model.ambient_dim();
        let c = c_override.unwrap_or_else(|| model.bakry_emery_constant());
        let matrix_dim = 2;
        for map_idx in 0..maps {
            let constant = random_hermitian(matrix_dim, &mut rng);
            let linear: Vec<HermitianMatrix> = (0..n)
                .map(|_| random_hermitian(matrix_dim, &mut rng))
                .collect();
            let quadratic: Vec<Vec<HermitianMatrix>> = (0..n)
                .map(|_| {
                    (0..n)
                        .map(|_| random_hermitian(matrix_dim, &mut rng))
                        .collect()
                })
                .collect();
            let f = MatrixValuedMap::new(Domain::Euclidean { n }, matrix_dim, move |z| {
                let mut acc = constant.clone();
                for (i, b) in linear.iter().enumerate() {
                    acc.add_assign_scaled(z[i], b);
                }
                for (i, row) in quadratic.iter().enumerate() {
                    for (j, q) in row.iter().enumerate() {
                        acc.add_assign_scaled(z[i] * z[j], q);
                    }
                }
                acc
            });
            for point in 0..points_per_map {
                let z: Vec<f64> = (0..n)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let gamma = gamma_euclidean(&f, &z)?;
                let gamma2 = gamma2_euclidean(&f, model, &z)?;
                let slack = &gamma2.scale(c) - &gamma;
                let scale = 1.0 + gamma2.op_norm()?;
                worst.observe(slack.psd_margin()?, tolerance * scale, || {
                    json!({"map": map_idx, "point": point})
                });
            }
        }
        Ok(worst.into_report("bakry-emery", kind, maps as u64, seed))
    })
}

/// Sphere models: the closed-form Γ matches the tangential-projection
/// oracle at random points.
pub enum SphereGammaModel<'a> {
    Linear(&'a SphereLinearModel),
    Quadratic(&'a SphereQuadraticModel),
}

pub fn sphere_gamma_oracle(
    model: &SphereGammaModel<'_>,
    points: usize,
    tolerance: f64,
    seed: u64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = stream_rng(seed, "sphere-gamma");
        let mut worst = WorstCase::new(tolerance);
        let (n, map) = match model {
            SphereGammaModel::Linear(m) => (m.sphere_dim(), m.as_map()),
            SphereGammaModel::Quadratic(m) => (m.sphere_dim(), m.as_map()),
        };
        for point in 0..points {
            let x = sphere::sphere_sample(n, &mut rng);
            let closed = match model {
                SphereGammaModel::Linear(m) => m.gamma(&x),
                SphereGammaModel::Quadratic(m) => m.gamma(&x),
            };
            let oracle = sphere::gamma_from_tangential_gradient(&map, &x)?;
            let deviation = (&closed - &oracle).hs_norm();
            worst.observe(-deviation, tolerance * (1.0 + closed.hs_norm()), || {
                json!({"point": point})
            });
        }
        Ok(worst.into_report("sphere-gamma-oracle", kind, points as u64, seed))
    })
}

/// SO(d) conjugation model: the closed-form Γ matches the geodesic
/// finite-difference oracle within `rel_tolerance` at step h.
pub fn so_gamma_oracle(
    model: &SOConjugationModel,
    configurations: usize,
    h: f64,
    rel_tolerance: f64,
    seed: u64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = stream_rng(seed, "so-gamma");
        let mut worst = WorstCase::new(rel_tolerance);
        for config in 0..configurations {
            let rotations = model.sample_point(&mut rng);
            let closed = model.gamma(&rotations)?;
            let fd = model.gamma_geodesic_fd(&rotations, h)?;
            let scale = closed.hs_norm().max(1e-12);
            let relative = (&closed - &fd).hs_norm() / scale;
            worst.observe(-relative, rel_tolerance, || json!({"config": config}));
        }
        Ok(worst.into_report("so-gamma-oracle", kind, configurations as u64, seed))
    })
}
