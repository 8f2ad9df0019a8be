//! The inequality and identity checking harness.
//!
//! Checks come in three flavors: exact enumeration checks on the finite
//! engine ([`finite_checks`]), randomized trace-inequality fuzz
//! ([`trace_checks`]), and Monte Carlo dominance checks on the continuous
//! models ([`mc`]). Every check consumes an explicit seed, derives its
//! random streams from it, and reports a signed worst-case margin with the
//! witness where it occurred, so reruns are bit-identical and failures are
//! quantitative.
//!
//! Negative controls, runs with a knob set where the inequality *should*
//! break, carry [`CheckKind::NegativeControl`] and never gate a campaign;
//! they exist to prove the corresponding check can fail at all.

pub mod finite_checks;
pub mod mc;
pub mod trace_checks;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bounds::BoundError;
use crate::finite::{FiniteError, FiniteProductSpace, MatrixField};
use crate::hermitian::{CMatrix, Complex64, HermitianMatrix, MatrixError};
use crate::models::ModelError;
use std::sync::Arc;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Finite(#[from] FiniteError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("check needs {need}, got {got}")]
    BadParams { need: &'static str, got: String },
}

pub type Result<T> = std::result::Result<T, VerifyError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    /// Margin inside (−tolerance, 0): passing, but only thanks to tolerance.
    PassMarginal,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Check,
    NegativeControl,
}

/// Outcome of one inequality or identity check.
///
/// `margin` is signed: the smallest eigenvalue of the slack matrix for
/// semidefinite checks, `rhs − lhs` for scalar inequalities, and minus the
/// deviation for identities. `status` is pass iff `margin ≥ −tolerance`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub status: CheckStatus,
    pub kind: CheckKind,
    pub margin: f64,
    pub tolerance: f64,
    pub trials: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
    pub elapsed_s: f64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        matches!(self.status, CheckStatus::Pass | CheckStatus::PassMarginal)
    }

    /// Whether this report gates a campaign: negative controls never do.
    pub fn gating_failure(&self) -> bool {
        self.kind == CheckKind::Check && !self.passed()
    }
}

/// Accumulates the worst (margin, tolerance) pair across points of a check,
/// "worst" meaning smallest slack margin + tolerance.
pub(crate) struct WorstCase {
    slack: f64,
    margin: f64,
    tolerance: f64,
    witness: Option<serde_json::Value>,
    observations: u64,
}

impl WorstCase {
    pub fn new(default_tolerance: f64) -> Self {
        Self {
            slack: f64::INFINITY,
            margin: f64::INFINITY,
            tolerance: default_tolerance,
            witness: None,
            observations: 0,
        }
    }

    pub fn observe<W: FnOnce() -> serde_json::Value>(
        &mut self,
        margin: f64,
        tolerance: f64,
        witness: W,
    ) {
        self.observations += 1;
        let slack = margin + tolerance;
        if slack < self.slack {
            self.slack = slack;
            self.margin = margin;
            self.tolerance = tolerance;
            self.witness = Some(witness());
        }
    }

    pub fn into_report(self, name: &str, kind: CheckKind, trials: u64, seed: u64) -> VerificationReport {
        let (margin, tolerance) = if self.observations == 0 {
            (0.0, 0.0)
        } else {
            (self.margin, self.tolerance)
        };
        let status = if margin >= 0.0 {
            CheckStatus::Pass
        } else if margin >= -tolerance {
            CheckStatus::PassMarginal
        } else {
            CheckStatus::Fail
        };
        VerificationReport {
            name: name.to_string(),
            status,
            kind,
            margin,
            tolerance,
            trials,
            seed,
            witness: self.witness,
            elapsed_s: 0.0,
        }
    }
}

/// Runs `body` and stamps the elapsed wall time on its report.
pub(crate) fn timed<F: FnOnce() -> Result<VerificationReport>>(body: F) -> Result<VerificationReport> {
    let start = std::time::Instant::now();
    let mut report = body()?;
    report.elapsed_s = start.elapsed().as_secs_f64();
    Ok(report)
}

/// 64-bit FNV-1a; stable across platforms, used to derive named RNG streams.
pub fn fnv1a64(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in text.as_bytes() {
        hash ^= *byte as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Deterministic RNG for the named stream of a seeded campaign.
pub fn stream_rng(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a64(label))
}

/// Random Hermitian matrix: i.i.d. standard normal entries (real and
/// imaginary), then Hermitized as (G + G*)/2.
pub fn random_hermitian<R: Rng>(dim: usize, rng: &mut R) -> HermitianMatrix {
    let mut g = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            g.set(
                i,
                j,
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)),
            );
        }
    }
    g.hermitian_part()
}

/// Random field: an independent random Hermitian value per state.
pub fn random_field<R: Rng>(
    space: &Arc<FiniteProductSpace>,
    dim: usize,
    rng: &mut R,
) -> MatrixField {
    let values = (0..space.total_states())
        .map(|_| random_hermitian(dim, rng))
        .collect();
    MatrixField::new(Arc::clone(space), values).expect("random field construction")
}

/// Random unit vector in C^d.
pub fn random_unit_vector<R: Rng>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.iter().map(|z| z / norm).collect();
        }
    }
}

/// The default exact-check arena: three coordinates with 2, 3, 3 states and
/// non-uniform weights: small enough to enumerate instantly, non-uniform
/// and non-commutative enough to be a meaningful probe.
pub fn standard_space() -> Arc<FiniteProductSpace> {
    use crate::finite::Factor;
    Arc::new(
        FiniteProductSpace::new(vec![
            Factor::new(vec![-1.0, 1.0], vec![0.5, 0.5]).expect("factor"),
            Factor::new(vec![0.0, 1.0, 2.0], vec![0.2, 0.5, 0.3]).expect("factor"),
            Factor::new(vec![-1.0, 0.0, 1.0], vec![0.25, 0.4, 0.35]).expect("factor"),
        ])
        .expect("standard space"),
    )
}

#[cfg(test)]
mod tests;
