//! Turns a parsed [`ExperimentConfig`] into verification reports and
//! tail-curve tables: builds the arena and models, dispatches each check by
//! name with its parameters, and fans the independent checks out over a
//! bounded worker pool when asked to.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::config::{CheckSpec, ExperimentConfig, FunctionSpec, ModelSpec, TailExperimentSpec};
use crate::finite::{Factor, FiniteProductSpace, MatrixField};
use crate::hermitian::HermitianMatrix;
use crate::models::{
    ConcentrationModel, LogConcaveModel, RealMatrix, SOConjugationModel, SphereLinearModel,
    SphereQuadraticModel,
};
use crate::verify::finite_checks::{self, ExactCheckContext};
use crate::verify::mc::{self, TailDominanceCheck, TailStatistic};
use crate::verify::trace_checks::{self, SphereGammaModel};
use crate::verify::{standard_space, CheckKind, VerificationReport, VerifyError};

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Verify(#[from] VerifyError),
}

pub type Result<T> = std::result::Result<T, RunnerError>;

fn config_err<T>(message: impl Into<String>) -> Result<T> {
    Err(RunnerError::Config(message.into()))
}

/// Everything a dispatched check may need, built once per campaign.
struct Environment {
    ctx: ExactCheckContext,
    model: Option<ConcentrationModel>,
    /// The diffusion driver, for checks with an analytic Γ₂ (gaussian
    /// series and langevin models).
    log_concave: Option<LogConcaveModel>,
}

impl Environment {
    fn build(config: &ExperimentConfig) -> Result<Self> {
        let model = match &config.model {
            Some(spec) => build_concentration_model(spec)?,
            None => None,
        };

        let log_concave = match &config.model {
            Some(ModelSpec::Langevin { n, eta }) => {
                if !(*eta > 0.0) {
                    return config_err(format!("langevin eta must be positive, got {eta}"));
                }
                if *eta == 1.0 {
                    Some(LogConcaveModel::gaussian(*n))
                } else {
                    // Quadratic potential W(z) = η·zᵀz/2.
                    let e = *eta;
                    let n_copy = *n;
                    Some(
                        LogConcaveModel::new(n_copy, e, move |z: &[f64]| {
                            z.iter().map(|v| e * v).collect()
                        })
                        .with_hessian(move |_z: &[f64]| {
                            let mut h = vec![vec![0.0; n_copy]; n_copy];
                            for (i, row) in h.iter_mut().enumerate() {
                                row[i] = e;
                            }
                            h
                        }),
                    )
                }
            }
            Some(ModelSpec::GaussianSeries { coefficients }) => {
                Some(LogConcaveModel::gaussian(coefficients.len()))
            }
            _ => None,
        };

        let (space, dim) = match &config.model {
            Some(ModelSpec::FiniteProduct { factors, d }) => {
                let factors: Vec<Factor> =
                    factors.iter().map(|w| Factor::from_weights(w)).collect();
                let space = FiniteProductSpace::new(factors)
                    .map_err(|e| RunnerError::Config(e.to_string()))?;
                (Arc::new(space), *d)
            }
            _ => (standard_space(), 2),
        };

        let default_fields = match &config.function {
            Some(FunctionSpec::RandomFields { count }) => *count,
            _ => 100,
        };

        let ctx = match &config.function {
            Some(FunctionSpec::Field { field }) => {
                let parsed: MatrixField = serde_json::from_value(field.clone())
                    .map_err(|e| RunnerError::Config(format!("function.field: {e}")))?;
                ExactCheckContext::with_pinned(parsed, 1, config.seed)
            }
            _ => ExactCheckContext::new(space, dim, default_fields, config.seed),
        };

        Ok(Self {
            ctx,
            model,
            log_concave,
        })
    }

    fn require_model(&self, check: &str) -> Result<&ConcentrationModel> {
        self.model.as_ref().ok_or_else(|| {
            RunnerError::Config(format!(
                "check `{check}` needs a continuous model in the config"
            ))
        })
    }
}

fn literal_to_real(
    lit: &crate::hermitian::MatrixLiteral,
    index: usize,
) -> Result<RealMatrix> {
    if lit.im.is_some() {
        return config_err(format!(
            "so-conjugation coefficient {index} must be real (no \"im\" block)"
        ));
    }
    Ok(RealMatrix::from_rows(&lit.re))
}

fn build_concentration_model(spec: &ModelSpec) -> Result<Option<ConcentrationModel>> {
    let model = match spec {
        ModelSpec::FiniteProduct { .. } | ModelSpec::Langevin { .. } => None,
        ModelSpec::GaussianSeries { coefficients } => {
            let coeffs = parse_hermitian_list(coefficients)?;
            Some(
                ConcentrationModel::gaussian_series(coeffs)
                    .map_err(|e| RunnerError::Config(e.to_string()))?,
            )
        }
        ModelSpec::SphereLinear { coefficients } => {
            let coeffs = parse_hermitian_list(coefficients)?;
            Some(ConcentrationModel::SphereLinear(
                SphereLinearModel::new(coeffs).map_err(|e| RunnerError::Config(e.to_string()))?,
            ))
        }
        ModelSpec::SphereQuadratic { coefficients } => {
            let coeffs = parse_hermitian_list(coefficients)?;
            Some(ConcentrationModel::SphereQuadratic(
                SphereQuadraticModel::new(coeffs)
                    .map_err(|e| RunnerError::Config(e.to_string()))?,
            ))
        }
        ModelSpec::SoConjugation { coefficients } => {
            let mut coeffs = Vec::with_capacity(coefficients.len());
            for (i, lit) in coefficients.iter().enumerate() {
                coeffs.push(literal_to_real(lit, i)?);
            }
            Some(ConcentrationModel::SOConjugation(
                SOConjugationModel::new(coeffs).map_err(|e| RunnerError::Config(e.to_string()))?,
            ))
        }
    };
    Ok(model)
}

fn parse_hermitian_list(
    literals: &[crate::hermitian::MatrixLiteral],
) -> Result<Vec<HermitianMatrix>> {
    let mut out = Vec::with_capacity(literals.len());
    for (i, lit) in literals.iter().enumerate() {
        out.push(
            HermitianMatrix::try_from(lit.clone())
                .map_err(|e| RunnerError::Config(format!("coefficient {i}: {e}")))?,
        );
    }
    Ok(out)
}

fn dispatch(spec: &CheckSpec, env: &Environment) -> Result<VerificationReport> {
    // The concave-psi probe is a counterexample search by construction; it
    // never gates, whatever the config says.
    let kind = if spec.negative_control || spec.name == "mean-value-concave-psi" {
        CheckKind::NegativeControl
    } else {
        CheckKind::Check
    };
    let mut ctx = env.ctx.clone();
    if let Some(fields) = spec.fields {
        ctx.fields = fields;
    }
    let tol = |default: f64| spec.tolerance.unwrap_or(default);
    let c = spec.c.unwrap_or(2.0);
    let alpha = spec.alpha.unwrap_or(1.0);
    let t_grid = spec
        .t_grid
        .clone()
        .unwrap_or_else(|| finite_checks::DEFAULT_T_GRID.to_vec());
    let trials = spec.trials.unwrap_or(2000);
    let dim = spec.dim.unwrap_or(3);
    let points = spec.points.unwrap_or(100);
    let samples = spec.samples.unwrap_or(10_000);
    let skew = spec.measure_skew.unwrap_or(0.0);
    let statistic = spec.statistic.unwrap_or(TailStatistic::LambdaMax);
    let seed = env.ctx.seed;

    let mut report = match spec.name.as_str() {
        // Γ₂ is evaluable exactly on the finite engine and analytically for
        // the diffusion models; the constant-curvature manifold models carry
        // their Bakry–Émery constant as an input instead.
        "bakry-emery" => match (&env.model, &env.log_concave) {
            (Some(ConcentrationModel::SphereLinear(_)), _)
            | (Some(ConcentrationModel::SphereQuadratic(_)), _)
            | (Some(ConcentrationModel::SOConjugation(_)), _) => {
                return config_err(
                    "bakry-emery needs an evaluable iterated carre du champ: the sphere and \
                     so-conjugation models take their curvature constant as an input, so run \
                     this check on a finite-product, gaussian-series, or langevin model",
                )
            }
            (_, Some(diffusion)) => trace_checks::log_concave_bakry_emery(
                diffusion,
                spec.fields.unwrap_or(20),
                spec.points.unwrap_or(5),
                spec.c,
                tol(1e-9),
                seed,
                kind,
            )?,
            _ => finite_checks::bakry_emery(&ctx, c, tol(1e-10), kind)?,
        },
        "local-ergodicity" => finite_checks::local_ergodicity(&ctx, c, &t_grid, tol(1e-10), kind)?,
        "local-poincare" => finite_checks::local_poincare(&ctx, c, &t_grid, tol(1e-10), kind)?,
        "poincare" => finite_checks::poincare(&ctx, alpha, tol(1e-10), kind)?,
        "variance-ergodicity" => {
            finite_checks::variance_ergodicity(&ctx, alpha, &t_grid, tol(1e-10), kind)?
        }
        "reversibility" => finite_checks::reversibility(&ctx, &t_grid, skew, tol(1e-10), kind)?,
        "generator-symmetry" => finite_checks::generator_symmetry(&ctx, skew, tol(1e-10), kind)?,
        "triple-product" => finite_checks::triple_product(&ctx, skew, tol(1e-10), kind)?,
        "dimension-reduction" => finite_checks::dimension_reduction(&ctx, tol(1e-10), kind)?,
        "dissipation" => finite_checks::dissipation(
            &ctx,
            spec.t.unwrap_or(0.3),
            spec.h.unwrap_or(1e-5),
            skew,
            tol(1e-6),
            kind,
        )?,
        "semigroup-law" => finite_checks::semigroup_law(
            &ctx,
            &spec
                .t_grid
                .clone()
                .unwrap_or_else(|| finite_checks::SEMIGROUP_LAW_GRID.to_vec()),
            tol(1e-10),
            kind,
        )?,
        "jensen" => finite_checks::jensen(
            &ctx,
            &spec.q_list.clone().unwrap_or_else(|| vec![1.0, 2.0, 3.0]),
            &t_grid,
            tol(1e-10),
            kind,
        )?,
        "gamma-consistency" => finite_checks::gamma_consistency(&ctx, tol(1e-10), kind)?,
        "gamma2-consistency" => finite_checks::gamma2_consistency(&ctx, tol(1e-10), kind)?,
        "chain-rule" => finite_checks::chain_rule(
            &ctx,
            &finite_checks::DEFAULT_CHAIN_RULE_FAMILIES,
            tol(1e-10),
            kind,
        )?,
        "poly-moment" => finite_checks::poly_moment_theorem(
            &ctx,
            c,
            &spec
                .q_list
                .clone()
                .unwrap_or_else(|| vec![1.0, 1.5, 2.0, 3.0]),
            tol(1e-12),
            kind,
        )?,
        "exp-moment" => finite_checks::exp_moment_theorem(
            &ctx,
            c,
            &spec
                .beta_grid
                .clone()
                .unwrap_or_else(|| vec![1.0, 10.0, 100.0]),
            spec.theta_points.unwrap_or(11),
            tol(1e-12),
            kind,
        )?,
        "mean-value-trace" => trace_checks::mean_value_trace(
            trials,
            dim,
            &trace_checks::DEFAULT_MEAN_VALUE_FAMILIES,
            tol(1e-9),
            seed,
            kind,
        )?,
        "mean-value-concave-psi" => {
            trace_checks::mean_value_concave_control(trials, dim, tol(1e-9), seed)?
        }
        "young-entropy" => trace_checks::young_entropy(trials, dim, tol(1e-9), seed, kind)?,
        "young-gibbs-tightness" => {
            trace_checks::young_gibbs_tightness(trials, dim, tol(1e-9), seed, kind)?
        }
        "skew-basis-identity" => trace_checks::skew_basis_identity(
            trials,
            &spec.dims.clone().unwrap_or_else(|| vec![2, 3, 4, 5]),
            tol(1e-12),
            seed,
            kind,
        )?,
        "haar-invariants" => {
            trace_checks::haar_invariants(trials, spec.dim.unwrap_or(3), tol(1e-10), seed, kind)?
        }
        "sphere-gamma-oracle" => {
            let model = env.require_model("sphere-gamma-oracle")?;
            let gamma_model = match model {
                ConcentrationModel::SphereLinear(m) => SphereGammaModel::Linear(m),
                ConcentrationModel::SphereQuadratic(m) => SphereGammaModel::Quadratic(m),
                _ => {
                    return config_err(
                        "sphere-gamma-oracle needs a sphere-linear or sphere-quadratic model",
                    )
                }
            };
            trace_checks::sphere_gamma_oracle(&gamma_model, points, tol(1e-9), seed, kind)?
        }
        "so-gamma-oracle" => {
            let model = env.require_model("so-gamma-oracle")?;
            let ConcentrationModel::SOConjugation(m) = model else {
                return config_err("so-gamma-oracle needs an so-conjugation model");
            };
            trace_checks::so_gamma_oracle(
                m,
                points,
                spec.h.unwrap_or(1e-5),
                tol(1e-3),
                seed,
                kind,
            )?
        }
        "tail-dominance" => {
            let model = env.require_model("tail-dominance")?;
            let check = TailDominanceCheck {
                model,
                samples,
                statistic,
                t_grid: spec.t_grid.clone(),
                grid_points: spec.grid_points.unwrap_or(20),
                v_scale: spec.v_scale.unwrap_or(1.0),
            };
            mc::tail_dominance(&check, seed, kind)?
        }
        "expectation-dominance" => {
            let model = env.require_model("expectation-dominance")?;
            mc::expectation_dominance(model, samples, spec.v_scale.unwrap_or(1.0), seed, kind)?
        }
        unknown => {
            return config_err(format!(
                "unknown check `{unknown}`; run `carre list` for the catalog"
            ))
        }
    };
    report.name = spec.name.clone();
    report.kind = kind;
    Ok(report)
}

/// Run every configured check, fanning out over at most `jobs` workers.
/// Reports come back in config order regardless of scheduling.
pub fn run_checks(config: &ExperimentConfig, jobs: usize) -> Result<Vec<VerificationReport>> {
    validate_names(config)?;
    let env = Environment::build(config)?;
    let specs = &config.checks;
    if jobs <= 1 || specs.len() <= 1 {
        return specs.iter().map(|s| dispatch(s, &env)).collect();
    }

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<VerificationReport>>>> =
        Mutex::new((0..specs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(specs.len()) {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= specs.len() {
                    break;
                }
                let outcome = dispatch(&specs[index], &env);
                results.lock().expect("worker poisoned the results")[index] = Some(outcome);
            });
        }
    });
    results
        .into_inner()
        .expect("workers done")
        .into_iter()
        .map(|slot| slot.expect("every index visited"))
        .collect()
}

fn validate_names(config: &ExperimentConfig) -> Result<()> {
    let known = check_names();
    for spec in &config.checks {
        if !known.contains(&spec.name.as_str()) {
            return config_err(format!(
                "unknown check `{}`; run `carre list` for the catalog",
                spec.name
            ));
        }
    }
    Ok(())
}

/// One row of a tail-curve experiment; `pass` is recomputable from the
/// other columns as `empirical − 4·stderr ≤ bound`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ExperimentRow {
    pub t: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentTable {
    pub rows: Vec<ExperimentRow>,
    pub statistic: TailStatistic,
    pub samples: usize,
    pub seed: u64,
}

impl ExperimentTable {
    pub fn all_rows_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Run the configured tail-curve experiment.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentTable> {
    let spec: &TailExperimentSpec = config
        .experiment
        .as_ref()
        .ok_or_else(|| RunnerError::Config("config has no \"experiment\" section".into()))?;
    let env = Environment::build(config)?;
    let model = env.require_model("experiment")?;
    let c = model.bakry_emery_constant();
    let v = model.variance_proxy_bound().map_err(VerifyError::from)? * spec.v_scale;
    let curve = mc::tail_curve_auto(
        model,
        spec.samples,
        spec.statistic,
        spec.t_grid.as_deref(),
        spec.grid_points,
        c,
        v,
        config.seed,
    )?;
    let bound = mc::subgaussian_curve(spec.statistic, model.dim(), c, v);
    let rows = curve
        .points
        .iter()
        .map(|(t, est)| ExperimentRow {
            t: *t,
            empirical: est.value,
            stderr: est.stderr,
            bound: bound(*t),
            pass: est.value - 4.0 * est.stderr <= bound(*t),
        })
        .collect();
    Ok(ExperimentTable {
        rows,
        statistic: spec.statistic,
        samples: spec.samples,
        seed: config.seed,
    })
}

/// Names of every check the runner can dispatch.
pub fn check_names() -> Vec<&'static str> {
    catalog()
        .iter()
        .filter(|e| e.category == "check" || e.category == "negative-control")
        .map(|e| e.name)
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    /// "check", "negative-control", "model", or "preset".
    pub category: &'static str,
    pub summary: &'static str,
}

/// The catalog behind `carre list`: built-in models, checks, and presets.
pub fn catalog() -> &'static [CatalogEntry] {
    &[
        // Models.
        CatalogEntry { name: "finite-product", category: "model", summary: "finite product space with explicit factor weights; the exact-enumeration arena" },
        CatalogEntry { name: "gaussian-series", category: "model", summary: "f(z) = sum z_i A_i with standard normal coefficients (c = 1)" },
        CatalogEntry { name: "sphere-linear", category: "model", summary: "f(x) = sum x_i A_i on the unit sphere S^n (c = 1/(n-1))" },
        CatalogEntry { name: "sphere-quadratic", category: "model", summary: "f(x) = sum x_i^2 A_i on the unit sphere S^n (c = 1/(n-1))" },
        CatalogEntry { name: "so-conjugation", category: "model", summary: "f(O_1..O_n) = sum O_i A_i O_i^T under Haar rotations (c = 4/(d-1))" },
        CatalogEntry { name: "langevin", category: "model", summary: "Euler-Maruyama sampler for a strongly log-concave potential" },
        // Exact checks on the finite engine.
        CatalogEntry { name: "bakry-emery", category: "check", summary: "pointwise Gamma(f) <= c*Gamma2(f) with c = 2 on product spaces" },
        CatalogEntry { name: "local-ergodicity", category: "check", summary: "Gamma(P_t f) <= e^{-2t/c} P_t Gamma(f) pointwise on a t grid" },
        CatalogEntry { name: "local-poincare", category: "check", summary: "P_t(f^2) - (P_t f)^2 <= c(1-e^{-2t/c}) P_t Gamma(f)" },
        CatalogEntry { name: "poincare", category: "check", summary: "Var(f) <= alpha * E(f) with alpha = 1" },
        CatalogEntry { name: "variance-ergodicity", category: "check", summary: "Var(P_t f) <= e^{-2t/alpha} Var(f)" },
        CatalogEntry { name: "reversibility", category: "check", summary: "E[(P_t f) g] = E[f (P_t g)] exactly" },
        CatalogEntry { name: "generator-symmetry", category: "check", summary: "E[(Lf) g] = E[f (Lg)] exactly" },
        CatalogEntry { name: "triple-product", category: "check", summary: "the reversible triple-product trace identity integrates to zero" },
        CatalogEntry { name: "dimension-reduction", category: "check", summary: "u*Gamma(f)u equals the summed scalar carre du champ of the components" },
        CatalogEntry { name: "dissipation", category: "check", summary: "d/dt Var(P_t f) = -2 E(P_t f) by central difference" },
        CatalogEntry { name: "semigroup-law", category: "check", summary: "P_s P_t = P_{s+t} on a grid" },
        CatalogEntry { name: "jensen", category: "check", summary: "E tr (P_t Gamma)^q <= E tr Gamma^q for q in {1,2,3}" },
        CatalogEntry { name: "gamma-consistency", category: "check", summary: "resampling Gamma agrees with (1/2)[L(fg) - f Lg - Lf g]" },
        CatalogEntry { name: "gamma2-consistency", category: "check", summary: "double-resampling Gamma2 agrees with its generator definition" },
        CatalogEntry { name: "chain-rule", category: "check", summary: "E tr Gamma(g, phi(f)) <= sqrt(E tr[Gamma(f) psi(f)] E tr[Gamma(g) psi(f)])" },
        CatalogEntry { name: "poly-moment", category: "check", summary: "exact trace moments vs sqrt(c(2q-1)) (E tr Gamma^q)^{1/2q}" },
        CatalogEntry { name: "exp-moment", category: "check", summary: "exact log trace mgf vs c theta^2 r(beta) / (2(1 - c theta^2/beta))" },
        CatalogEntry { name: "mean-value-trace", category: "check", summary: "tr[C(phi(A)-phi(B))] vs the closed-form mean value bound, fuzzed" },
        CatalogEntry { name: "young-entropy", category: "check", summary: "tr[XY] <= log tr e^X + tr[Y log Y] on random densities" },
        CatalogEntry { name: "young-gibbs-tightness", category: "check", summary: "Young's inequality is tight at the Gibbs density" },
        CatalogEntry { name: "skew-basis-identity", category: "check", summary: "sum of S M S over the skew basis equals -(tr M I - M^T)/2" },
        CatalogEntry { name: "haar-invariants", category: "check", summary: "Haar sampler orthogonality and determinant invariants" },
        CatalogEntry { name: "sphere-gamma-oracle", category: "check", summary: "closed-form sphere Gamma vs the tangential-projection oracle" },
        CatalogEntry { name: "so-gamma-oracle", category: "check", summary: "closed-form SO(d) Gamma vs the geodesic finite-difference oracle" },
        CatalogEntry { name: "tail-dominance", category: "check", summary: "empirical tail minus 4 stderr below the subgaussian bound" },
        CatalogEntry { name: "expectation-dominance", category: "check", summary: "empirical mean of lambda_max below sqrt(2 c v log d)" },
        // Negative controls.
        CatalogEntry { name: "mean-value-concave-psi", category: "negative-control", summary: "concave |phi'| probe; violations expected" },
        // Presets.
        CatalogEntry { name: "finite_suite", category: "preset", summary: "full exact-identity and moment suite on the standard finite arena" },
        CatalogEntry { name: "gaussian_series", category: "preset", summary: "gaussian series dominance campaign" },
        CatalogEntry { name: "sphere_i", category: "preset", summary: "sphere linear model: oracle + dominance campaign" },
        CatalogEntry { name: "sphere_ii", category: "preset", summary: "sphere quadratic model: oracle + dominance campaign" },
        CatalogEntry { name: "so_conjugation", category: "preset", summary: "SO(d) conjugation model: structure + dominance campaign" },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::CheckSpec;

    fn config_from(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(text).unwrap()
    }

    #[test]
    fn unknown_check_is_a_config_error() {
        let cfg = config_from(r#"{"seed": 1, "checks": [{"name": "no-such-check"}]}"#);
        match run_checks(&cfg, 1) {
            Err(RunnerError::Config(m)) => assert!(m.contains("no-such-check")),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn parallel_run_matches_sequential() {
        let cfg = config_from(
            r#"{"seed": 17, "checks": [
                {"name": "poincare", "fields": 10},
                {"name": "jensen", "fields": 5},
                {"name": "young-entropy", "trials": 50},
                {"name": "skew-basis-identity", "trials": 50}
            ]}"#,
        );
        let sequential = run_checks(&cfg, 1).unwrap();
        let parallel = run_checks(&cfg, 4).unwrap();
        assert_eq!(sequential.len(), parallel.len());
        for (a, b) in sequential.iter().zip(&parallel) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.margin.to_bits(), b.margin.to_bits());
            assert_eq!(a.witness, b.witness);
        }
    }

    #[test]
    fn bakry_emery_dispatch_by_model() {
        // Finite engine by default.
        let cfg = config_from(r#"{"seed": 2, "checks": [{"name": "bakry-emery", "fields": 5}]}"#);
        assert!(run_checks(&cfg, 1).unwrap()[0].passed());

        // Analytic route for the diffusion models.
        let cfg = config_from(
            r#"{"seed": 2, "model": {"kind": "langevin", "n": 2, "eta": 0.5},
                "checks": [{"name": "bakry-emery", "fields": 4, "points": 3}]}"#,
        );
        assert!(run_checks(&cfg, 1).unwrap()[0].passed());

        // Constant-curvature models are rejected with an explanation.
        let cfg = config_from(
            r#"{"seed": 2,
                "model": {"kind": "sphere-linear", "coefficients": [
                    {"d": 2, "re": [[1.0, 0.0], [0.0, -1.0]]},
                    {"d": 2, "re": [[0.0, 1.0], [1.0, 0.0]]},
                    {"d": 2, "re": [[1.0, 0.0], [0.0, 1.0]]}
                ]},
                "checks": [{"name": "bakry-emery"}]}"#,
        );
        match run_checks(&cfg, 1) {
            Err(RunnerError::Config(m)) => assert!(m.contains("carre du champ")),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn pinned_field_runs_exact_checks() {
        let field = serde_json::json!({
            "space": {"factors": [[0.5, 0.5], [0.25, 0.75]]},
            "d": 2,
            "values": [
                {"d": 2, "re": [[1.0, 0.0], [0.0, -1.0]]},
                {"d": 2, "re": [[0.0, 1.0], [1.0, 0.0]]},
                {"d": 2, "re": [[0.5, 0.0], [0.0, 0.5]]},
                {"d": 2, "re": [[0.0, 0.0], [0.0, 2.0]]}
            ]
        });
        let cfg = config_from(&format!(
            r#"{{"seed": 3, "function": {{"kind": "field", "field": {field}}},
                 "checks": [{{"name": "bakry-emery"}}, {{"name": "poincare"}}]}}"#
        ));
        let reports = run_checks(&cfg, 1).unwrap();
        assert!(reports.iter().all(|r| r.passed()));
        assert_eq!(reports[0].trials, 1);
    }

    #[test]
    fn experiment_requires_model_and_section() {
        let cfg = config_from(r#"{"seed": 1}"#);
        assert!(matches!(run_experiment(&cfg), Err(RunnerError::Config(_))));

        let mut cfg = config_from(
            r#"{"seed": 9,
                "model": {"kind": "gaussian-series", "coefficients": [
                    {"d": 2, "re": [[1.0, 0.0], [0.0, -1.0]]}
                ]},
                "experiment": {"samples": 400, "grid_points": 6}}"#,
        );
        let table = run_experiment(&cfg).unwrap();
        assert_eq!(table.rows.len(), 6);
        assert!(table.all_rows_pass());
        for row in &table.rows {
            assert_eq!(row.pass, row.empirical - 4.0 * row.stderr <= row.bound);
        }

        // Same seed, same table.
        let again = run_experiment(&cfg).unwrap();
        assert_eq!(
            table.rows.iter().map(|r| r.empirical.to_bits()).collect::<Vec<_>>(),
            again.rows.iter().map(|r| r.empirical.to_bits()).collect::<Vec<_>>()
        );

        // Different seed, (almost surely) different empirical values.
        cfg.seed = 10;
        let shifted = run_experiment(&cfg).unwrap();
        assert_ne!(
            table.rows.iter().map(|r| r.empirical.to_bits()).collect::<Vec<_>>(),
            shifted.rows.iter().map(|r| r.empirical.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn catalog_has_at_least_twelve_checks() {
        let checks = catalog()
            .iter()
            .filter(|e| e.category == "check")
            .count();
        assert!(checks >= 12, "{checks} checks");
        assert!(check_names().contains(&"mean-value-trace"));
    }

    #[test]
    fn negative_control_flag_never_gates() {
        let mut spec = CheckSpec::named("bakry-emery");
        spec.c = Some(0.05);
        spec.fields = Some(10);
        spec.negative_control = true;
        let cfg = ExperimentConfig {
            v: 1,
            seed: 30,
            model: None,
            function: None,
            checks: vec![spec],
            experiment: None,
            output: None,
        };
        let reports = run_checks(&cfg, 1).unwrap();
        assert!(!reports[0].passed());
        assert!(!reports[0].gating_failure());
    }
}
