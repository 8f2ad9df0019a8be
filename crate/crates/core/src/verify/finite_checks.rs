//! Exact checks on the finite product-measure engine. Every quantity here
//! is computed by full enumeration, so the tolerances are rounding-noise
//! scale (1e-10 and below), not statistical.

use std::sync::Arc;

use serde_json::json;

use super::{
    random_field, random_unit_vector, stream_rng, timed, CheckKind, Result, VerificationReport,
    WorstCase,
};
use crate::bounds;
use crate::finite::{FiniteProductSpace, GeneralField, MatrixField};
use crate::hermitian::{CMatrix, Complex64, HermitianMatrix};

/// Shared setup for the exact checks: the enumeration arena, the matrix
/// dimension of the random probe fields, how many fields to draw, and the
/// campaign seed. A pinned field replaces the random primary probe.
#[derive(Debug, Clone)]
pub struct ExactCheckContext {
    pub space: Arc<FiniteProductSpace>,
    pub dim: usize,
    pub fields: usize,
    pub seed: u64,
    pub pinned: Option<MatrixField>,
}

impl ExactCheckContext {
    pub fn new(space: Arc<FiniteProductSpace>, dim: usize, fields: usize, seed: u64) -> Self {
        Self {
            space,
            dim,
            fields,
            seed,
            pinned: None,
        }
    }

    /// Pin the primary probe to an explicit field (taken from its own
    /// space); secondary probes in two-field checks stay random.
    pub fn with_pinned(field: MatrixField, fields: usize, seed: u64) -> Self {
        Self {
            space: Arc::clone(field.space()),
            dim: field.dim(),
            fields,
            seed,
            pinned: Some(field),
        }
    }

    fn rng(&self, label: &str) -> rand_chacha::ChaCha8Rng {
        stream_rng(self.seed, label)
    }

    fn draw<R: rand::Rng>(&self, rng: &mut R) -> MatrixField {
        match &self.pinned {
            Some(f) => f.clone(),
            None => random_field(&self.space, self.dim, rng),
        }
    }
}

pub const DEFAULT_EXACT_TOL: f64 = 1e-10;
pub const DEFAULT_T_GRID: [f64; 3] = [0.25, 1.0, 4.0];
pub const SEMIGROUP_LAW_GRID: [f64; 3] = [0.1, 0.5, 1.0];

fn quadratic_form(u: &[Complex64], m: &HermitianMatrix) -> f64 {
    let d = m.dim();
    let mut acc = Complex64::ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += u[i].conj() * m.entry(i, j) * u[j];
        }
    }
    acc.re
}

/// Expectation under deliberately perturbed weights
/// `w'(z) ∝ w(z)·(1 + skew·(−1)^z)`; `skew = 0` is the true measure.
fn skewed_expectation(space: &FiniteProductSpace, values: &[CMatrix], skew: f64) -> CMatrix {
    let dim = values[0].rows();
    let mut total = 0.0;
    let mut acc = CMatrix::zeros(dim, dim);
    for (s, v) in values.iter().enumerate() {
        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
        let w = space.state_weight(s) * (1.0 + skew * sign);
        total += w;
        acc.add_assign_scaled(w, v);
    }
    acc.scale_re(1.0 / total)
}

/// Pointwise Bakry–Émery criterion: `c·Γ₂(f) − Γ(f) ⪰ 0` at every state.
pub fn bakry_emery(
    ctx: &ExactCheckContext,
    c: f64,
    tolerance: f64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = ctx.rng("bakry-emery");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..ctx.fields {
            let f = ctx.draw(&mut rng);
            let gamma = f.gamma();
            let gamma2 = f.gamma2();
            for s in 0..ctx.space.total_states() {
                let slack = &gamma2.value(s).scale(c) - gamma.value(s);
                let margin = slack.psd_margin()?;
                let scale = 1.0 + gamma2.value(s).op_norm()?;
                worst.observe(margin, tolerance * scale, || {
                    json!({"field": trial, "state": s})
                });
            }
        }
        Ok(worst.into_report("bakry-emery", kind, ctx.fields as u64, ctx.seed))
    })
}

/// Local ergodicity: `Γ(P_t f) ⪯ e^{−2t/c}·P_t Γ(f)` pointwise on a t grid.
pub fn local_ergodicity(
    ctx: &ExactCheckContext,
    c: f64,
    t_grid: &[f64],
    tolerance: f64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = ctx.rng("local-ergodicity");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..ctx.fields {
            let f = ctx.draw(&mut rng);
            let gamma = f.gamma();
            for &t in t_grid {
                let decay = (-2.0 * t / c).exp();
                let lhs = f.semigroup_apply(t)?.gamma();
                let rhs = gamma.semigroup_apply(t)?;
                for s in 0..ctx.space.total_states() {
                    let slack = &rhs.value(s).scale(decay) - lhs.value(s);
                    let scale = 1.0 + rhs.value(s).op_norm()?;
                    worst.observe(slack.psd_margin()?, tolerance * scale, || {
                        json!({"field": trial, "state": s, "t": t})
                    });
                }
            }
        }
        Ok(worst.into_report("local-ergodicity", kind, ctx.fields as u64, ctx.seed))
    })
}

/// Local Poincaré: `P_t(f²) − (P_t f)² ⪯ c(1 − e^{−2t/c})·P_t Γ(f)`.
pub fn local_poincare(
    ctx: &ExactCheckContext,
    c: f64,
    t_grid: &[f64],
    tolerance: f64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = ctx.rng("local-poincare");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..ctx.fields {
            let f = ctx.draw(&mut rng);
            let gamma = f.gamma();
            for &t in t_grid {
                let coef = c * (1.0 - (-2.0 * t / c).exp());
                let pt_sq = f.square_field().semigroup_apply(t)?;
                let pt_f = f.semigroup_apply(t)?;
                let pt_gamma = gamma.semigroup_apply(t)?;
                for s in 0..ctx.space.total_states() {
                    let mut local_var = pt_sq.value(s).clone();
                    local_var.add_assign_scaled(-1.0, &pt_f.value(s).square());
                    let slack = &pt_gamma.value(s).scale(coef) - &local_var;
                    let scale = 1.0 + pt_gamma.value(s).op_norm()?;
                    worst.observe(slack.psd_margin()?, tolerance * scale, || {
                        json!({"field": trial, "state": s, "t": t})
                    });
                }
            }
        }
        Ok(worst.into_report("local-poincare", kind, ctx.fields as u64, ctx.seed))
    })
}

/// Matrix Poincaré inequality `Var(f) ⪯ α·E(f)`.
pub fn poincare(
    ctx: &ExactCheckContext,
    alpha: f64,
    tolerance: f64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = ctx.rng("poincare");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..ctx.fields {
            let f = ctx.draw(&mut rng);
            let energy = f.dirichlet_energy();
            let slack = &energy.scale(alpha) - &f.matrix_variance();
            let scale = 1.0 + energy.op_norm()?;
            worst.observe(slack.psd_margin()?, tolerance * scale, || {
                json!({"field": trial})
            });
        }
        Ok(worst.into_report("poincare", kind, ctx.fields as u64, ctx.seed))
    })
}

/// Exponential variance ergodicity `Var(P_t f) ⪯ e^{−2t/α}·Var(f)`.
pub fn variance_ergodicity(
    ctx: &ExactCheckContext,
    alpha: f64,
    t_grid: &[f64],
    tolerance: f64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = ctx.rng("variance-ergodicity");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..ctx.fields {
            let f = ctx.draw(&mut rng);
            let var = f.matrix_variance();
            for &t in t_grid {
                let slack =
                    &var.scale((-2.0 * t / alpha).exp()) - &f.semigroup_apply(t)?.matrix_variance();
                let scale = 1.0 + var.op_norm()?;
                worst.observe(slack.psd_margin()?, tolerance * scale, || {
                    json!({"field": trial, "t": t})
                });
            }
        }
        Ok(worst.into_report("variance-ergodicity", kind, ctx.fields as u64, ctx.seed))
    })
}

/// Reversibility `E[(P_t f)·g] = E[f·(P_t g)]`. A non-zero `measure_skew`
/// computes the right side under perturbed weights (the negative control).
pub fn reversibility(
    ctx: &ExactCheckContext,
    t_grid: &[f64],
    measure_skew: f64,
    tolerance: f64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = ctx.rng("reversibility");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..ctx.fields {
            let f = ctx.draw(&mut rng);
            let g = random_field(&ctx.space, ctx.dim, &mut rng);
            for &t in t_grid {
                let lhs = f.semigroup_apply(t)?.pointwise_mul(&g)?.expectation();
                let rhs_field = f.pointwise_mul(&g.semigroup_apply(t)?)?;
                let rhs = skewed_expectation(&ctx.space, rhs_field.values(), measure_skew);
                let scale = 1.0 + lhs.hs_norm().max(rhs.hs_norm());
                let deviation = (&lhs - &rhs).hs_norm();
                worst.observe(-deviation, tolerance * scale, || {
                    json!({"field": trial, "t": t})
                });
            }
        }
        Ok(worst.into_report("reversibility", kind, ctx.fields as u64, ctx.seed))
    })
}

/// Generator symmetry `E[(Lf)·g] = E[f·(Lg)]`.
pub fn generator_symmetry(
    ctx: &ExactCheckContext,
    measure_skew: f64,
    tolerance: f64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = ctx.rng("generator-symmetry");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..ctx.fields {
            let f = ctx.draw(&mut rng);
            let g = random_field(&ctx.space, ctx.dim, &mut rng);
            let lhs = f.generator_apply().pointwise_mul(&g)?.expectation();
            let rhs_field = f.pointwise_mul(&g.generator_apply())?;
            let rhs = skewed_expectation(&ctx.space, rhs_field.values(), measure_skew);
            let scale = 1.0 + lhs.hs_norm().max(rhs.hs_norm());
            worst.observe(-(&lhs - &rhs).hs_norm(), tolerance * scale, || {
                json!({"field": trial})
            });
        }
        Ok(worst.into_report("generator-symmetry", kind, ctx.fields as u64, ctx.seed))
    })
}

/// The triple-product identity: the μ-expectation of
/// `tr[L(fgh) − L(fg)h − L(hf)g − L(gh)f + L(f)gh + L(g)hf + L(h)fg]`
/// vanishes for a reversible generator.
pub fn triple_product(
    ctx: &ExactCheckContext,
    measure_skew: f64,
    tolerance: f64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = ctx.rng("triple-product");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..ctx.fields {
            let f = ctx.draw(&mut rng);
            let g = random_field(&ctx.space, ctx.dim, &mut rng);
            let h = random_field(&ctx.space, ctx.dim, &mut rng);

            let fg = f.pointwise_mul(&g)?;
            let gh = g.pointwise_mul(&h)?;
            let hf = h.pointwise_mul(&f)?;
            let fgh = fg.pointwise_mul_field(&h)?;

            let terms: Vec<GeneralField> = vec![
                fgh.generator_apply(),
                fg.generator_apply().pointwise_mul_field(&h)?.scale(-1.0),
                hf.generator_apply().pointwise_mul_field(&g)?.scale(-1.0),
                gh.generator_apply().pointwise_mul_field(&f)?.scale(-1.0),
                f.generator_apply().pointwise_mul(&g)?.pointwise_mul_field(&h)?,
                g.generator_apply().pointwise_mul(&h)?.pointwise_mul_field(&f)?,
                h.generator_apply().pointwise_mul(&f)?.pointwise_mul_field(&g)?,
            ];
            let mut value = 0.0;
            let mut scale = 1.0;
            for term in &terms {
                let e = skewed_expectation(&ctx.space, term.values(), measure_skew);
                let tr = e.trace().re;
                value += tr;
                scale += tr.abs();
            }
            worst.observe(-value.abs(), tolerance * scale, || json!({"field": trial}));
        }
        Ok(worst.into_report("triple-product", kind, ctx.fields as u64, ctx.seed))
    })
}

/// Dimension reduction: `u*Γ(f)u = Σ_j [Γ(Re(u*f e_j)) + Γ(Im(u*f e_j))]`
/// pointwise, for a random unit vector u.
pub fn dimension_reduction(
    ctx: &ExactCheckContext,
    tolerance: f64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = ctx.rng("dimension-reduction");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..ctx.fields {
            let f = ctx.draw(&mut rng);
            let u = random_unit_vector(ctx.dim, &mut rng);
            let gamma = f.gamma();

            // Scalar component fields Re/Im(u* f e_j) as 1×1 Hermitian fields.
            let mut component_gammas: Vec<MatrixField> = Vec::new();
            for j in 0..ctx.dim {
                for part in 0..2 {
                    let u_ref = u.clone();
                    let scalar = MatrixField::from_fn(Arc::clone(&ctx.space), |s| {
                        let mut acc = Complex64::ZERO;
                        for (i, ui) in u_ref.iter().enumerate() {
                            acc += ui.conj() * f.value(s).entry(i, j);
                        }
                        let x = if part == 0 { acc.re } else { acc.im };
                        HermitianMatrix::diagonal(&[x])
                    })?;
                    component_gammas.push(scalar.gamma());
                }
            }

            for s in 0..ctx.space.total_states() {
                let lhs = quadratic_form(&u, gamma.value(s));
                let rhs: f64 = component_gammas
                    .iter()
                    .map(|g| g.value(s).entry(0, 0).re)
                    .sum();
                let scale = 1.0 + gamma.value(s).op_norm()?;
                worst.observe(-(lhs - rhs).abs(), tolerance * scale, || {
                    json!({"field": trial, "state": s})
                });
            }
        }
        Ok(worst.into_report("dimension-reduction", kind, ctx.fields as u64, ctx.seed))
    })
}

/// Dissipation of variance: the central difference of `t ↦ Var(P_t f)`
/// equals `−2·E(P_t f)` within the finite-difference tolerance.
pub fn dissipation(
    ctx: &ExactCheckContext,
    t: f64,
    fd_step: f64,
    measure_skew: f64,
    tolerance: f64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = ctx.rng("dissipation");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..ctx.fields {
            let f = ctx.draw(&mut rng);
            let plus = f.semigroup_apply(t + fd_step)?.matrix_variance();
            let minus = f.semigroup_apply(t - fd_step)?.matrix_variance();
            let mut derivative = &plus - &minus;
            derivative = derivative.scale(1.0 / (2.0 * fd_step));

            let pt = f.semigroup_apply(t)?;
            let gamma_vals: Vec<CMatrix> =
                pt.gamma().values().iter().map(|v| v.to_cmatrix()).collect();
            let energy = skewed_expectation(&ctx.space, &gamma_vals, measure_skew);

            let deviation = (&derivative.to_cmatrix() + &energy.scale_re(2.0)).hs_norm();
            let scale = 1.0 + energy.hs_norm();
            worst.observe(-deviation, tolerance * scale, || {
                json!({"field": trial, "t": t})
            });
        }
        Ok(worst.into_report("dissipation", kind, ctx.fields as u64, ctx.seed))
    })
}

/// Semigroup law `P_s P_t = P_{s+t}` on a (s, t) grid.
pub fn semigroup_law(
    ctx: &ExactCheckContext,
    grid: &[f64],
    tolerance: f64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = ctx.rng("semigroup-law");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..ctx.fields {
            let f = ctx.draw(&mut rng);
            let scale = 1.0
                + f.values()
                    .iter()
                    .map(|v| v.hs_norm())
                    .fold(0.0, f64::max);
            for &s in grid {
                let ps = f.semigroup_apply(s)?;
                for &t in grid {
                    let chained = ps.semigroup_apply(t)?;
                    let direct = f.semigroup_apply(s + t)?;
                    let deviation: f64 = chained
                        .values()
                        .iter()
                        .zip(direct.values())
                        .map(|(a, b)| (a - b).hs_norm())
                        .fold(0.0, f64::max);
                    worst.observe(-deviation, tolerance * scale, || {
                        json!({"field": trial, "s": s, "t": t})
                    });
                }
            }
        }
        Ok(worst.into_report("semigroup-law", kind, ctx.fields as u64, ctx.seed))
    })
}

/// Semigroup Jensen inequality `E tr (P_t Γ(f))^q ≤ E tr Γ(f)^q`.
pub fn jensen(
    ctx: &ExactCheckContext,
    q_list: &[f64],
    t_grid: &[f64],
    tolerance: f64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = ctx.rng("jensen");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..ctx.fields {
            let f = ctx.draw(&mut rng);
            let gamma = f.gamma();
            for &t in t_grid {
                let pt_gamma = gamma.semigroup_apply(t)?;
                for &q in q_list {
                    let mut lhs = 0.0;
                    let mut rhs = 0.0;
                    for s in 0..ctx.space.total_states() {
                        let w = ctx.space.state_weight(s);
                        lhs += w * pt_gamma.value(s).trace_power_abs(q)?;
                        rhs += w * gamma.value(s).trace_power_abs(q)?;
                    }
                    worst.observe(rhs - lhs, tolerance * (1.0 + rhs), || {
                        json!({"field": trial, "t": t, "q": q})
                    });
                }
            }
        }
        Ok(worst.into_report("jensen", kind, ctx.fields as u64, ctx.seed))
    })
}

/// The resampling formula for Γ agrees with `½[L(fg) − f·Lg − Lf·g]`.
pub fn gamma_consistency(
    ctx: &ExactCheckContext,
    tolerance: f64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = ctx.rng("gamma-consistency");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..ctx.fields {
            let f = ctx.draw(&mut rng);
            let g = random_field(&ctx.space, ctx.dim, &mut rng);
            let formula = f.carre_du_champ(&g)?;
            let l_fg = f.pointwise_mul(&g)?.generator_apply();
            let f_lg = f.pointwise_mul(&g.generator_apply())?;
            let lf_g = f.generator_apply().pointwise_mul(&g)?;
            let definition = l_fg.sub(&f_lg).sub(&lf_g).scale(0.5);
            let deviation = formula.sub(&definition).max_hs_norm();
            let scale = 1.0 + formula.max_hs_norm();
            worst.observe(-deviation, tolerance * scale, || json!({"field": trial}));
        }
        Ok(worst.into_report("gamma-consistency", kind, ctx.fields as u64, ctx.seed))
    })
}

/// The double-resampling formula for Γ₂ agrees with
/// `½[LΓ(f,g) − Γ(f, Lg) − Γ(Lf, g)]`.
pub fn gamma2_consistency(
    ctx: &ExactCheckContext,
    tolerance: f64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = ctx.rng("gamma2-consistency");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..ctx.fields {
            let f = ctx.draw(&mut rng);
            let g = random_field(&ctx.space, ctx.dim, &mut rng);
            let formula = f.carre_du_champ2(&g)?;
            let l_gamma = f.carre_du_champ(&g)?.generator_apply();
            let gamma_f_lg = f.carre_du_champ(&g.generator_apply())?;
            let gamma_lf_g = f.generator_apply().carre_du_champ(&g)?;
            let definition = l_gamma.sub(&gamma_f_lg).sub(&gamma_lf_g).scale(0.5);
            let deviation = formula.sub(&definition).max_hs_norm();
            let scale = 1.0 + formula.max_hs_norm();
            worst.observe(-deviation, tolerance * scale, || json!({"field": trial}));
        }
        Ok(worst.into_report("gamma2-consistency", kind, ctx.fields as u64, ctx.seed))
    })
}

/// Scalar φ families with convex |φ′| used by the chain-rule and mean-value
/// checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiFamily {
    /// φ(x) = x, ψ ≡ 1.
    Identity,
    /// φ(x) = x³, ψ(x) = 3x².
    Cube,
    /// φ(x) = sgn(x)|x|^{2q−1}, ψ(x) = (2q−1)|x|^{2q−2}; needs q = 1 or q ≥ 1.5.
    SignedPower { q: f64 },
    /// φ(x) = e^{θx}, ψ(x) = |θ|e^{θx}.
    Exp { theta: f64 },
    /// φ(x) = x·|x|^{1/2}: |φ′| is *concave*, the mean-value negative control.
    ConcaveProbe,
}

impl PhiFamily {
    pub fn phi(&self) -> impl Fn(f64) -> f64 + '_ {
        move |x: f64| match self {
            PhiFamily::Identity => x,
            PhiFamily::Cube => x * x * x,
            PhiFamily::SignedPower { q } => x.signum() * x.abs().powf(2.0 * q - 1.0),
            PhiFamily::Exp { theta } => (theta * x).exp(),
            PhiFamily::ConcaveProbe => x * x.abs().sqrt(),
        }
    }

    pub fn psi(&self) -> impl Fn(f64) -> f64 + '_ {
        move |x: f64| match self {
            PhiFamily::Identity => 1.0,
            PhiFamily::Cube => 3.0 * x * x,
            PhiFamily::SignedPower { q } => (2.0 * q - 1.0) * x.abs().powf(2.0 * q - 2.0),
            PhiFamily::Exp { theta } => theta.abs() * (theta * x).exp(),
            PhiFamily::ConcaveProbe => 1.5 * x.abs().sqrt(),
        }
    }

    pub fn label(&self) -> String {
        match self {
            PhiFamily::Identity => "identity".into(),
            PhiFamily::Cube => "cube".into(),
            PhiFamily::SignedPower { q } => format!("signed-power-{q}"),
            PhiFamily::Exp { theta } => format!("exp-{theta}"),
            PhiFamily::ConcaveProbe => "concave-probe".into(),
        }
    }
}

pub const DEFAULT_CHAIN_RULE_FAMILIES: [PhiFamily; 4] = [
    PhiFamily::Identity,
    PhiFamily::Cube,
    PhiFamily::SignedPower { q: 2.0 },
    PhiFamily::Exp { theta: 0.5 },
];

/// Chain rule inequality
/// `E tr Γ(g, φ(f)) ≤ √(E tr[Γ(f)ψ(f)] · E tr[Γ(g)ψ(f)])`.
pub fn chain_rule(
    ctx: &ExactCheckContext,
    families: &[PhiFamily],
    tolerance: f64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = ctx.rng("chain-rule");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..ctx.fields {
            let f = ctx.draw(&mut rng);
            let g = random_field(&ctx.space, ctx.dim, &mut rng);
            let gamma_f = f.gamma();
            let gamma_g = g.gamma();
            for family in families {
                let phi_f = f.map_matrix_function(family.phi())?;
                let psi_f = f.map_matrix_function(family.psi())?;
                let lhs = g.carre_du_champ(&phi_f)?.expectation().trace().re;
                let mut factor_f = 0.0;
                let mut factor_g = 0.0;
                for s in 0..ctx.space.total_states() {
                    let w = ctx.space.state_weight(s);
                    factor_f += w * bounds::trace_product(gamma_f.value(s), psi_f.value(s));
                    factor_g += w * bounds::trace_product(gamma_g.value(s), psi_f.value(s));
                }
                let rhs = (factor_f.max(0.0) * factor_g.max(0.0)).sqrt();
                worst.observe(rhs - lhs, tolerance * (1.0 + rhs.abs()), || {
                    json!({"field": trial, "phi": family.label()})
                });
            }
        }
        Ok(worst.into_report("chain-rule", kind, ctx.fields as u64, ctx.seed))
    })
}

/// Polynomial moment theorem: exact
/// `[E tr|f−Ef|^{2q}]^{1/(2q)} ≤ √(c(2q−1))·(E tr Γ(f)^q)^{1/(2q)}`.
///
/// The witness records the fraction of trials with strictly positive slack.
pub fn poly_moment_theorem(
    ctx: &ExactCheckContext,
    c: f64,
    q_list: &[f64],
    tolerance: f64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = ctx.rng("poly-moment");
        let mut worst = WorstCase::new(tolerance);
        let mut positive = 0u64;
        let mut total = 0u64;
        for trial in 0..ctx.fields {
            let f = ctx.draw(&mut rng);
            let gamma = f.gamma();
            for &q in q_list {
                let lhs = f.trace_moment(2.0 * q)?.powf(1.0 / (2.0 * q));
                let mut gamma_moment = 0.0;
                for s in 0..ctx.space.total_states() {
                    gamma_moment +=
                        ctx.space.state_weight(s) * gamma.value(s).trace_power_abs(q)?;
                }
                let rhs = bounds::poly_moment_bound(c, q, gamma_moment)?;
                let margin = rhs - lhs;
                total += 1;
                if margin > 0.0 {
                    positive += 1;
                }
                worst.observe(margin, tolerance * (1.0 + rhs), || {
                    json!({"field": trial, "q": q})
                });
            }
        }
        let fraction = positive as f64 / total.max(1) as f64;
        let mut report = worst.into_report("poly-moment", kind, ctx.fields as u64, ctx.seed);
        let extra = json!({"positive_slack_fraction": fraction, "worst": report.witness});
        report.witness = Some(extra);
        Ok(report)
    })
}

/// Exponential moment theorem: exact
/// `log E tr̄ e^{θ(f−Ef)} ≤ cθ²r_f(β)/(2(1−cθ²/β))` over a θ grid inside
/// the admissible interval, for each β.
pub fn exp_moment_theorem(
    ctx: &ExactCheckContext,
    c: f64,
    beta_grid: &[f64],
    theta_points: usize,
    tolerance: f64,
    kind: CheckKind,
) -> Result<VerificationReport> {
    timed(|| {
        let mut rng = ctx.rng("exp-moment");
        let mut worst = WorstCase::new(tolerance);
        for trial in 0..ctx.fields {
            let f = ctx.draw(&mut rng);
            for &beta in beta_grid {
                let r = f.r_beta(beta)?;
                let limit = (beta / c).sqrt();
                for k in 0..theta_points {
                    // Symmetric grid strictly inside (−limit, limit).
                    let frac = if theta_points == 1 {
                        0.0
                    } else {
                        -0.9 + 1.8 * k as f64 / (theta_points - 1) as f64
                    };
                    let theta = frac * limit;
                    let lhs = f.trace_mgf(theta)?.ln();
                    let rhs = bounds::mgf_bound(c, theta, beta, r)?;
                    worst.observe(rhs - lhs, tolerance * (1.0 + rhs.abs()), || {
                        json!({"field": trial, "beta": beta, "theta": theta})
                    });
                }
            }
        }
        Ok(worst.into_report("exp-moment", kind, ctx.fields as u64, ctx.seed))
    })
}
