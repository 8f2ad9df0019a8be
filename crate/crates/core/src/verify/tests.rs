use super::finite_checks::*;
use super::mc::*;
use super::trace_checks::*;
use super::*;
use crate::models::{ConcentrationModel, RealMatrix, SOConjugationModel, SphereLinearModel};

fn ctx(fields: usize, seed: u64) -> ExactCheckContext {
    ExactCheckContext::new(standard_space(), 2, fields, seed)
}

fn assert_passes(report: &VerificationReport) {
    assert!(
        report.passed(),
        "{} failed: margin {} vs tolerance {} (witness {:?})",
        report.name,
        report.margin,
        report.tolerance,
        report.witness
    );
}

#[test]
fn bakry_emery_passes_at_two_and_fails_undersized() {
    let c = ctx(25, 101);
    let report = bakry_emery(&c, 2.0, DEFAULT_EXACT_TOL, CheckKind::Check).unwrap();
    assert_passes(&report);

    let control = bakry_emery(&c, 0.1, DEFAULT_EXACT_TOL, CheckKind::NegativeControl).unwrap();
    assert_eq!(control.status, CheckStatus::Fail);
    assert!(control.witness.is_some());
    assert!(!control.gating_failure(), "controls never gate");
}

#[test]
fn local_ergodicity_passes_and_fails_undersized() {
    let c = ctx(15, 102);
    let report =
        local_ergodicity(&c, 2.0, &DEFAULT_T_GRID, DEFAULT_EXACT_TOL, CheckKind::Check).unwrap();
    assert_passes(&report);

    let control = local_ergodicity(
        &c,
        0.5,
        &DEFAULT_T_GRID,
        DEFAULT_EXACT_TOL,
        CheckKind::NegativeControl,
    )
    .unwrap();
    assert_eq!(control.status, CheckStatus::Fail);
}

#[test]
fn local_poincare_passes() {
    let c = ctx(15, 103);
    let report =
        local_poincare(&c, 2.0, &DEFAULT_T_GRID, DEFAULT_EXACT_TOL, CheckKind::Check).unwrap();
    assert_passes(&report);
}

#[test]
fn poincare_and_variance_ergodicity_pass_at_alpha_one() {
    let c = ctx(25, 104);
    assert_passes(&poincare(&c, 1.0, DEFAULT_EXACT_TOL, CheckKind::Check).unwrap());
    assert_passes(
        &variance_ergodicity(&c, 1.0, &DEFAULT_T_GRID, DEFAULT_EXACT_TOL, CheckKind::Check)
            .unwrap(),
    );
}

#[test]
fn reversibility_and_generator_symmetry() {
    let c = ctx(15, 105);
    assert_passes(
        &reversibility(&c, &DEFAULT_T_GRID, 0.0, DEFAULT_EXACT_TOL, CheckKind::Check).unwrap(),
    );
    assert_passes(&generator_symmetry(&c, 0.0, DEFAULT_EXACT_TOL, CheckKind::Check).unwrap());

    // Broken measure: both identities must fail.
    let broken = reversibility(
        &c,
        &DEFAULT_T_GRID,
        0.2,
        DEFAULT_EXACT_TOL,
        CheckKind::NegativeControl,
    )
    .unwrap();
    assert_eq!(broken.status, CheckStatus::Fail);
    let broken = generator_symmetry(&c, 0.2, DEFAULT_EXACT_TOL, CheckKind::NegativeControl).unwrap();
    assert_eq!(broken.status, CheckStatus::Fail);
}

#[test]
fn triple_product_identity() {
    let c = ctx(15, 106);
    assert_passes(&triple_product(&c, 0.0, DEFAULT_EXACT_TOL, CheckKind::Check).unwrap());
    let broken = triple_product(&c, 0.2, DEFAULT_EXACT_TOL, CheckKind::NegativeControl).unwrap();
    assert_eq!(broken.status, CheckStatus::Fail);
}

#[test]
fn dimension_reduction_pointwise() {
    let c = ctx(15, 107);
    assert_passes(&dimension_reduction(&c, DEFAULT_EXACT_TOL, CheckKind::Check).unwrap());
}

#[test]
fn dissipation_central_difference() {
    let c = ctx(10, 108);
    assert_passes(&dissipation(&c, 0.3, 1e-5, 0.0, 1e-6, CheckKind::Check).unwrap());
    let broken = dissipation(&c, 0.3, 1e-5, 0.2, 1e-6, CheckKind::NegativeControl).unwrap();
    assert_eq!(broken.status, CheckStatus::Fail);
}

#[test]
fn semigroup_law_and_jensen() {
    let c = ctx(10, 109);
    assert_passes(&semigroup_law(&c, &SEMIGROUP_LAW_GRID, DEFAULT_EXACT_TOL, CheckKind::Check).unwrap());
    assert_passes(
        &jensen(&c, &[1.0, 2.0, 3.0], &DEFAULT_T_GRID, DEFAULT_EXACT_TOL, CheckKind::Check)
            .unwrap(),
    );
}

#[test]
fn gamma_formula_consistency() {
    let c = ctx(10, 110);
    assert_passes(&gamma_consistency(&c, DEFAULT_EXACT_TOL, CheckKind::Check).unwrap());
    assert_passes(&gamma2_consistency(&c, DEFAULT_EXACT_TOL, CheckKind::Check).unwrap());
}

#[test]
fn chain_rule_inequality() {
    let c = ctx(15, 111);
    let report = chain_rule(
        &c,
        &DEFAULT_CHAIN_RULE_FAMILIES,
        DEFAULT_EXACT_TOL,
        CheckKind::Check,
    )
    .unwrap();
    assert_passes(&report);
}

#[test]
fn chain_rule_identity_equality_case() {
    // f = g with φ = identity: both sides equal E tr Γ(f).
    let space = standard_space();
    let mut rng = stream_rng(112, "equality");
    let f = random_field(&space, 2, &mut rng);
    let lhs = f
        .carre_du_champ(&f.map_matrix_function(|x| x).unwrap())
        .unwrap()
        .expectation()
        .trace()
        .re;
    let rhs = f.dirichlet_energy().trace();
    assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
}

#[test]
fn poly_moment_theorem_and_undersized_control() {
    let c = ctx(25, 113);
    let report = poly_moment_theorem(
        &c,
        2.0,
        &[1.0, 1.5, 2.0, 3.0],
        1e-12,
        CheckKind::Check,
    )
    .unwrap();
    assert_passes(&report);
    let fraction = report.witness.as_ref().unwrap()["positive_slack_fraction"]
        .as_f64()
        .unwrap();
    assert!(fraction >= 0.95, "positive-slack fraction {fraction}");

    let control =
        poly_moment_theorem(&c, 0.02, &[1.0], 1e-12, CheckKind::NegativeControl).unwrap();
    assert_eq!(control.status, CheckStatus::Fail);
}

#[test]
fn exp_moment_theorem_over_grids() {
    let c = ctx(10, 114);
    let report = exp_moment_theorem(
        &c,
        2.0,
        &[1.0, 10.0, 100.0],
        11,
        1e-12,
        CheckKind::Check,
    )
    .unwrap();
    assert_passes(&report);
}

#[test]
fn mean_value_fuzz_and_concave_control() {
    let report = mean_value_trace(
        500,
        3,
        &DEFAULT_MEAN_VALUE_FAMILIES,
        1e-9,
        115,
        CheckKind::Check,
    )
    .unwrap();
    assert_passes(&report);

    // Concave |φ′| breaks the premise; the directed search must find
    // violations.
    let control = mean_value_concave_control(500, 3, 1e-9, 115).unwrap();
    assert_eq!(control.status, CheckStatus::Fail);
    assert_eq!(control.kind, CheckKind::NegativeControl);
}

#[test]
fn young_checks() {
    assert_passes(&young_entropy(500, 3, 1e-9, 116, CheckKind::Check).unwrap());
    assert_passes(&young_gibbs_tightness(500, 3, 1e-9, 117, CheckKind::Check).unwrap());
}

#[test]
fn structure_checks() {
    assert_passes(&skew_basis_identity(500, &[2, 3, 4, 5], 1e-12, 118, CheckKind::Check).unwrap());
    assert_passes(&haar_invariants(200, 3, 1e-10, 119, CheckKind::Check).unwrap());

    let mut rng = stream_rng(120, "coeffs");
    let coeffs: Vec<_> = (0..4).map(|_| random_hermitian(2, &mut rng)).collect();
    let linear = SphereLinearModel::new(coeffs).unwrap();
    assert_passes(
        &sphere_gamma_oracle(
            &SphereGammaModel::Linear(&linear),
            50,
            1e-9,
            121,
            CheckKind::Check,
        )
        .unwrap(),
    );

    let a = RealMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, -1.0]]);
    let b = RealMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 2.0]]);
    let so = SOConjugationModel::new(vec![a, b]).unwrap();
    assert_passes(&so_gamma_oracle(&so, 20, 1e-5, 1e-3, 122, CheckKind::Check).unwrap());
}

#[test]
fn tail_dominance_and_negative_control() {
    let mut rng = stream_rng(123, "series");
    let coeffs: Vec<_> = (0..3).map(|_| random_hermitian(2, &mut rng)).collect();
    let model = ConcentrationModel::gaussian_series(coeffs).unwrap();
    let check = TailDominanceCheck {
        model: &model,
        samples: 4000,
        statistic: TailStatistic::LambdaMax,
        t_grid: None,
        grid_points: 12,
        v_scale: 1.0,
    };
    let report = tail_dominance(&check, 124, CheckKind::Check).unwrap();
    assert_passes(&report);

    let shrunk = TailDominanceCheck {
        v_scale: 0.02,
        ..check
    };
    let control = tail_dominance(&shrunk, 124, CheckKind::NegativeControl).unwrap();
    assert_eq!(control.status, CheckStatus::Fail);
}

#[test]
fn expectation_dominance_check() {
    let mut rng = stream_rng(125, "series");
    let coeffs: Vec<_> = (0..3).map(|_| random_hermitian(2, &mut rng)).collect();
    let model = ConcentrationModel::gaussian_series(coeffs).unwrap();
    let report = expectation_dominance(&model, 4000, 1.0, 126, CheckKind::Check).unwrap();
    assert_passes(&report);
}

#[test]
fn mc_tail_curve_matches_scalar_normal_oracle() {
    // d = 1 Gaussian series with A = [1]: the tail at t is the standard
    // normal upper tail; at t = 1 that is 0.15865525…
    let model =
        ConcentrationModel::gaussian_series(vec![HermitianMatrix::diagonal(&[1.0])]).unwrap();
    let samples = 100_000;
    let curve = mc_tail_curve(&model, samples, &[1.0], TailStatistic::LambdaMax, 127).unwrap();
    let (_, est) = curve.points[0];
    let oracle = 0.158_655_253_931_457_07;
    assert!(
        (est.value - oracle).abs() <= 4.0 * est.stderr + 4.0 * curve.pilot_stderr,
        "empirical {} vs oracle {oracle}",
        est.value
    );
    // Constant functions have an all-zero tail for t > 0.
    let constant = ConcentrationModel::gaussian_series(vec![HermitianMatrix::zeros(2)]).unwrap();
    let curve = mc_tail_curve(&constant, 100, &[0.5, 1.0], TailStatistic::OpNorm, 1).unwrap();
    assert!(curve.points.iter().all(|(_, e)| e.value == 0.0));
}

#[test]
fn reports_are_deterministic_given_seed() {
    let c = ctx(5, 128);
    let a = bakry_emery(&c, 2.0, DEFAULT_EXACT_TOL, CheckKind::Check).unwrap();
    let b = bakry_emery(&c, 2.0, DEFAULT_EXACT_TOL, CheckKind::Check).unwrap();
    assert_eq!(a.margin.to_bits(), b.margin.to_bits());
    assert_eq!(a.witness, b.witness);
    assert_eq!(a.trials, b.trials);
}

#[test]
fn report_schema_fields() {
    let c = ctx(2, 129);
    let report = poincare(&c, 1.0, DEFAULT_EXACT_TOL, CheckKind::Check).unwrap();
    let json = serde_json::to_value(&report).unwrap();
    for key in ["name", "status", "kind", "margin", "tolerance", "trials", "seed", "elapsed_s"] {
        assert!(json.get(key).is_some(), "missing key {key}");
    }
    assert_eq!(json["status"], "pass");
    assert_eq!(json["kind"], "check");
}

#[test]
fn pass_marginal_flagging() {
    let mut worst = WorstCase::new(1e-10);
    worst.observe(-5e-11, 1e-10, || serde_json::Value::Null);
    let report = worst.into_report("probe", CheckKind::Check, 1, 0);
    assert_eq!(report.status, CheckStatus::PassMarginal);
    assert!(report.passed());
}
