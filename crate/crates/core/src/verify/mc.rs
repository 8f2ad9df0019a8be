//! Monte Carlo side of the harness: empirical tail curves for the
//! continuous models and dominance checks against the closed-form bounds.
//!
//! Estimates are deterministic given the seed. The centering matrix E_μ f
//! comes from an independent pilot run of equal size; its statistical error
//! is why auto-generated t grids start at `5·pilot-stderr·√d`. Dominance is
//! asserted one-sided: `empirical − 4·stderr ≤ bound` at every grid point.

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{stream_rng, timed, CheckKind, Result, VerificationReport, VerifyError, WorstCase};
use crate::bounds;
use crate::hermitian::HermitianMatrix;
use crate::models::ConcentrationModel;

/// One Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MCEstimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Which eigenvalue statistic of `f − E f` the tail curve tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailStatistic {
    /// `λ_max(f − Ef) ≥ t`.
    LambdaMax,
    /// `λ_min(f − Ef) ≤ −t`, measured as `−λ_min ≥ t`.
    LambdaMin,
    /// `‖f − Ef‖ ≥ t`, the two-sided branch.
    OpNorm,
}

impl TailStatistic {
    fn evaluate(&self, lambda_min: f64, lambda_max: f64) -> f64 {
        match self {
            TailStatistic::LambdaMax => lambda_max,
            TailStatistic::LambdaMin => -lambda_min,
            TailStatistic::OpNorm => lambda_max.max(-lambda_min),
        }
    }

    /// One-sided bounds get doubled on the two-sided branch.
    pub fn sides(&self) -> f64 {
        match self {
            TailStatistic::OpNorm => 2.0,
            _ => 1.0,
        }
    }
}

/// An empirical tail curve plus the mean of the tracked statistic.
#[derive(Debug, Clone)]
pub struct TailCurve {
    pub statistic: TailStatistic,
    pub points: Vec<(f64, MCEstimate)>,
    pub mean: MCEstimate,
    pub pilot_mean: HermitianMatrix,
    /// Sample standard error of the pilot mean, in Hilbert–Schmidt norm.
    pub pilot_stderr: f64,
}

fn pilot_run(
    model: &ConcentrationModel,
    samples: usize,
    seed: u64,
) -> (HermitianMatrix, f64) {
    let mut rng = stream_rng(seed, "pilot");
    let d = model.dim();
    let mut mean = HermitianMatrix::zeros(d);
    let mut draws = Vec::with_capacity(samples);
    for _ in 0..samples {
        let x = model.sample_value(&mut rng);
        mean.add_assign_scaled(1.0 / samples as f64, &x);
        draws.push(x);
    }
    let mut var_hs = 0.0;
    for x in &draws {
        var_hs += (x - &mean).hs_norm().powi(2) / samples as f64;
    }
    let stderr = (var_hs / samples as f64).sqrt();
    (mean, stderr)
}

/// Empirical exceedance frequencies `P{stat(f − Ef) ≥ t}` over a t grid,
/// with binomial standard errors; `E f` comes from an equal-size pilot run.
pub fn mc_tail_curve(
    model: &ConcentrationModel,
    samples: usize,
    t_grid: &[f64],
    statistic: TailStatistic,
    seed: u64,
) -> Result<TailCurve> {
    let pilot = pilot_run(model, samples, seed);
    tail_curve_with_pilot(model, samples, t_grid, statistic, seed, pilot)
}

/// Tail curve with an automatically constructed t grid when none is given:
/// runs the pilot first, then spans `[5·pilot-stderr·√d, t(bound = 1e-4)]`.
pub fn tail_curve_auto(
    model: &ConcentrationModel,
    samples: usize,
    statistic: TailStatistic,
    t_grid: Option<&[f64]>,
    grid_points: usize,
    c: f64,
    v: f64,
    seed: u64,
) -> Result<TailCurve> {
    let pilot = pilot_run(model, samples, seed);
    let grid = match t_grid {
        Some(g) => g.to_vec(),
        None => default_t_grid(model.dim(), c, v.max(1e-12), pilot.1, grid_points),
    };
    tail_curve_with_pilot(model, samples, &grid, statistic, seed, pilot)
}

fn tail_curve_with_pilot(
    model: &ConcentrationModel,
    samples: usize,
    t_grid: &[f64],
    statistic: TailStatistic,
    seed: u64,
    (pilot_mean, pilot_stderr): (HermitianMatrix, f64),
) -> Result<TailCurve> {
    if samples < 2 {
        return Err(VerifyError::BadParams {
            need: "at least 2 samples",
            got: samples.to_string(),
        });
    }
    let mut rng = stream_rng(seed, "main");
    let mut counts = vec![0u64; t_grid.len()];
    let mut stat_sum = 0.0;
    let mut stat_sq_sum = 0.0;
    for _ in 0..samples {
        let x = model.sample_value(&mut rng);
        let centered = &x - &pilot_mean;
        let eigs = centered.eigenvalues()?;
        let stat = statistic.evaluate(eigs[0], *eigs.last().unwrap());
        stat_sum += stat;
        stat_sq_sum += stat * stat;
        for (slot, &t) in counts.iter_mut().zip(t_grid) {
            if stat >= t {
                *slot += 1;
            }
        }
    }
    let n = samples as f64;
    let points = t_grid
        .iter()
        .zip(&counts)
        .map(|(&t, &count)| {
            let p = count as f64 / n;
            let stderr = (p * (1.0 - p) / n).sqrt();
            (
                t,
                MCEstimate {
                    value: p,
                    stderr,
                    samples: samples as u64,
                    seed,
                },
            )
        })
        .collect();
    let mean_val = stat_sum / n;
    let variance = (stat_sq_sum / n - mean_val * mean_val).max(0.0);
    let mean = MCEstimate {
        value: mean_val,
        stderr: (variance / n).sqrt(),
        samples: samples as u64,
        seed,
    };
    Ok(TailCurve {
        statistic,
        points,
        mean,
        pilot_mean,
        pilot_stderr,
    })
}

/// Evenly spaced t grid for a dominance run: starts at
/// `5·pilot-stderr·√d` (below that the pilot bias dominates) and ends where
/// the subgaussian bound reaches `1e-4`.
pub fn default_t_grid(
    d: usize,
    c: f64,
    v: f64,
    pilot_stderr: f64,
    points: usize,
) -> Vec<f64> {
    let t_min = 5.0 * pilot_stderr * (d as f64).sqrt();
    let t_max = (2.0 * c * v * (1e4 * d as f64).ln()).sqrt().max(t_min * 2.0);
    (0..points)
        .map(|i| t_min + (t_max - t_min) * i as f64 / (points.max(2) - 1) as f64)
        .collect()
}

/// The subgaussian reference curve for one tail branch:
/// `sides · d · exp(−t²/(2cv))`.
pub fn subgaussian_curve(
    statistic: TailStatistic,
    d: usize,
    c: f64,
    v: f64,
) -> impl Fn(f64) -> f64 {
    move |t: f64| statistic.sides() * bounds::subgaussian_tail(d, c, v, t).unwrap_or(f64::NAN)
}

/// Dominance check: `empirical − 4·stderr ≤ bound(t)` at every grid point.
///
/// `v_scale` shrinks the variance proxy fed to the bound; values below 1
/// are the negative-control knob (the bound becomes false).
pub struct TailDominanceCheck<'a> {
    pub model: &'a ConcentrationModel,
    pub samples: usize,
    pub statistic: TailStatistic,
    pub t_grid: Option<Vec<f64>>,
    pub grid_points: usize,
    pub v_scale: f64,
}

pub fn tail_dominance(
    check: &TailDominanceCheck<'_>,
    seed: u64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let d = check.model.dim();
        let c = check.model.bakry_emery_constant();
        let v = check.model.variance_proxy_bound()? * check.v_scale;
        let curve = tail_curve_auto(
            check.model,
            check.samples,
            check.statistic,
            check.t_grid.as_deref(),
            check.grid_points,
            c,
            v,
            seed,
        )?;
        let bound = subgaussian_curve(check.statistic, d, c, v);
        let mut worst = WorstCase::new(0.0);
        for (t, est) in &curve.points {
            let margin = bound(*t) + 4.0 * est.stderr - est.value;
            worst.observe(margin, 0.0, || {
                json!({"t": t, "empirical": est.value, "stderr": est.stderr, "bound": bound(*t)})
            });
        }
        Ok(worst.into_report("tail-dominance", kind, check.samples as u64, seed))
    })
}

/// Expectation dominance: `empirical mean − 4·stderr ≤ √(2cv·log d)` for the
/// λ_max statistic.
pub fn expectation_dominance(
    model: &ConcentrationModel,
    samples: usize,
    v_scale: f64,
    seed: u64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let d = model.dim();
        let c = model.bakry_emery_constant();
        let v = model.variance_proxy_bound()? * v_scale;
        let curve = mc_tail_curve(model, samples, &[], TailStatistic::LambdaMax, seed)?;
        let bound = bounds::expectation_bound(d, c, v)?;
        let margin = bound + 4.0 * curve.mean.stderr - curve.mean.value;
        let mut worst = WorstCase::new(0.0);
        worst.observe(margin, 0.0, || {
            json!({"empirical_mean": curve.mean.value, "stderr": curve.mean.stderr, "bound": bound})
        });
        Ok(worst.into_report("expectation-dominance", kind, samples as u64, seed))
    })
}

/// Exceedance of the *norm of the pilot mean* over the exact model mean,
/// exposed for bias diagnostics in tests.
pub fn pilot_bias(model: &ConcentrationModel, samples: usize, seed: u64) -> Result<f64> {
    let (pilot, _) = pilot_run(model, samples, seed);
    match model.exact_mean() {
        Some(exact) => Ok((&pilot - &exact).hs_norm()),
        None => Ok(f64::NAN),
    }
}

/// Draw `count` values of the model under the given seed stream; the raw
/// material for custom empirical statistics in tests.
pub fn sample_values(
    model: &ConcentrationModel,
    count: usize,
    seed: u64,
    label: &str,
) -> Vec<HermitianMatrix> {
    let mut rng = stream_rng(seed, label);
    (0..count).map(|_| model.sample_value(&mut rng)).collect()
}

/// Convenience: empirical exceedance of a scalar statistic list at level t.
pub fn empirical_tail(stats: &[f64], t: f64) -> MCEstimate {
    let n = stats.len() as f64;
    let p = stats.iter().filter(|&&s| s >= t).count() as f64 / n;
    MCEstimate {
        value: p,
        stderr: (p * (1.0 - p) / n).sqrt(),
        samples: stats.len() as u64,
        seed: 0,
    }
}

/// Sample a scalar function of the model's centered value.
pub fn sample_statistics<R: Rng>(
    model: &ConcentrationModel,
    center: &HermitianMatrix,
    statistic: TailStatistic,
    count: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let x = model.sample_value(rng);
        let eigs = (&x - center).eigenvalues()?;
        out.push(statistic.evaluate(eigs[0], *eigs.last().unwrap()));
    }
    Ok(out)
}
