use super::so_group::skew_basis_element;
use super::*;
use crate::hermitian::HermitianMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn pauli_z() -> HermitianMatrix {
    HermitianMatrix::diagonal(&[1.0, -1.0])
}

fn random_symmetric<R: Rng>(d: usize, rng: &mut R) -> RealMatrix {
    let g = RealMatrix::from_fn(d, |_, _| rng.sample(StandardNormal));
    let mut s = g.clone();
    s.add_assign_scaled(1.0, &g.transpose());
    s.scale(0.5)
}

fn random_hermitian<R: Rng>(d: usize, rng: &mut R) -> HermitianMatrix {
    let mut g = crate::hermitian::CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            g.set(
                i,
                j,
                crate::hermitian::Complex64::new(
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                ),
            );
        }
    }
    g.hermitian_part()
}

// --- log-concave / Ornstein–Uhlenbeck ---------------------------------------

#[test]
fn ou_estimate_at_time_zero_is_exact() {
    let model = LogConcaveModel::gaussian(3);
    let a = pauli_z();
    let a_eval = a.clone();
    let f = MatrixValuedMap::new(Domain::Euclidean { n: 3 }, 2, move |z| a_eval.scale(z[0]));
    let z = vec![0.7, -0.2, 0.1];
    let est = model.ou_semigroup_estimate(&f, &z, 0.0, 1, 99).unwrap();
    assert_eq!(est, a.scale(0.7));
}

#[test]
fn ou_estimate_mixes_to_zero_for_linear_maps() {
    let model = LogConcaveModel::gaussian(2);
    let a = pauli_z();
    let f = MatrixValuedMap::new(Domain::Euclidean { n: 2 }, 2, move |z| a.scale(z[0]));
    let samples = 20_000;
    let est = model
        .ou_semigroup_estimate(&f, &[1.0, 0.0], 1e6, samples, 7)
        .unwrap();
    // Entries are averages of N(0,1) draws times ±1: stderr = 1/√samples.
    let stderr = 1.0 / (samples as f64).sqrt();
    assert!(est.hs_norm() <= 4.0 * stderr * 2f64.sqrt());
}

#[test]
fn ou_estimate_matches_mehler_decay() {
    let model = LogConcaveModel::gaussian(2);
    let a = pauli_z();
    let a_expected = a.clone();
    let f = MatrixValuedMap::new(Domain::Euclidean { n: 2 }, 2, move |z| a.scale(z[0]));
    let samples = 40_000;
    let est = model
        .ou_semigroup_estimate(&f, &[1.0, 0.0], 2f64.ln(), samples, 11)
        .unwrap();
    let expected = a_expected.scale(0.5);
    let spread = (1.0 - 0.25f64).sqrt();
    let stderr = spread / (samples as f64).sqrt();
    assert!(
        (&est - &expected).hs_norm() <= 4.0 * stderr * 2f64.sqrt(),
        "deviation {}",
        (&est - &expected).hs_norm()
    );
}

#[test]
fn ou_estimate_requires_gaussian_model() {
    let generic = LogConcaveModel::new(2, 0.5, |z| z.iter().map(|v| 0.5 * v).collect());
    let f = MatrixValuedMap::new(Domain::Euclidean { n: 2 }, 1, |_z| {
        HermitianMatrix::identity(1)
    });
    assert!(matches!(
        generic.ou_semigroup_estimate(&f, &[0.0, 0.0], 1.0, 10, 1),
        Err(ModelError::NotGaussian)
    ));
}

#[test]
fn langevin_step_statistics() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    // Zero drift: increments have variance 2h per coordinate.
    let flat = LogConcaveModel::new(1, 1.0, |z| vec![0.0; z.len()]);
    let h = 0.02;
    let n = 40_000;
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..n {
        let step = flat.langevin_step(&[0.0], h, &mut rng).unwrap()[0];
        sum += step;
        sum2 += step * step;
    }
    let mean = sum / n as f64;
    let var = sum2 / n as f64 - mean * mean;
    assert!((var - 2.0 * h).abs() < 0.1 * 2.0 * h, "variance {var}");

    // Gaussian drift: E[next] = (1 − h)·z.
    let gauss = LogConcaveModel::gaussian(1);
    let z = 2.0;
    let mut sum = 0.0;
    for _ in 0..n {
        sum += gauss.langevin_step(&[z], h, &mut rng).unwrap()[0];
    }
    let mean = sum / n as f64;
    let stderr = (2.0 * h / n as f64).sqrt();
    assert!((mean - (1.0 - h) * z).abs() <= 4.0 * stderr);

    assert!(matches!(
        gauss.langevin_step(&[0.0], 0.0, &mut rng),
        Err(ModelError::InvalidStep { .. })
    ));
}

#[test]
fn langevin_chain_reaches_unit_stationary_variance() {
    let model = LogConcaveModel::new(1, 1.0, |z| z.to_vec());
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let samples = model.sample_stationary(4000, 0.01, &mut rng).unwrap();
    let var = samples.iter().map(|z| z[0] * z[0]).sum::<f64>() / samples.len() as f64;
    // O(h) discretization bias plus Monte Carlo error; 5% band.
    assert!((var - 1.0).abs() < 0.05, "stationary variance {var}");
}

#[test]
fn gamma_euclidean_examples() {
    // Gaussian series: Γ(f) = Σ A_i² at every point.
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let a1 = random_hermitian(2, &mut rng);
    let a2 = random_hermitian(2, &mut rng);
    let (c1, c2) = (a1.clone(), a2.clone());
    let f = MatrixValuedMap::new(Domain::Euclidean { n: 2 }, 2, move |z| {
        let mut acc = c1.scale(z[0]);
        acc.add_assign_scaled(z[1], &c2);
        acc
    });
    let expected = &a1.square() + &a2.square();
    for z in [[0.0, 0.0], [1.3, -0.4]] {
        let gamma = gamma_euclidean(&f, &z).unwrap();
        assert!((&gamma - &expected).hs_norm() <= 1e-9 * (1.0 + expected.hs_norm()));
    }

    let constant = MatrixValuedMap::new(Domain::Euclidean { n: 2 }, 2, |_z| pauli_z());
    assert!(gamma_euclidean(&constant, &[0.5, 0.5]).unwrap().hs_norm() < 1e-12);

    // f(z) = z₁²·A at z = e₁: Γ = (2A)² = 4A², via the difference fallback.
    let a = pauli_z();
    let quad = MatrixValuedMap::new(Domain::Euclidean { n: 2 }, 2, move |z| a.scale(z[0] * z[0]));
    let gamma = gamma_euclidean(&quad, &[1.0, 0.0]).unwrap();
    let expected = pauli_z().square().scale(4.0);
    assert!((&gamma - &expected).hs_norm() <= 1e-8);
}

#[test]
fn gamma2_euclidean_examples() {
    let model = LogConcaveModel::gaussian(2);

    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let a1 = random_hermitian(2, &mut rng);
    let a2 = random_hermitian(2, &mut rng);
    let (c1, c2) = (a1.clone(), a2.clone());
    let series = MatrixValuedMap::new(Domain::Euclidean { n: 2 }, 2, move |z| {
        let mut acc = c1.scale(z[0]);
        acc.add_assign_scaled(z[1], &c2);
        acc
    });
    let expected = &a1.square() + &a2.square();
    let g2 = gamma2_euclidean(&series, &model, &[0.3, 0.8]).unwrap();
    assert!((&g2 - &expected).hs_norm() <= 1e-6 * (1.0 + expected.hs_norm()));

    let constant = MatrixValuedMap::new(Domain::Euclidean { n: 2 }, 2, |_z| pauli_z());
    assert!(
        gamma2_euclidean(&constant, &model, &[0.1, 0.2])
            .unwrap()
            .hs_norm()
            < 1e-9
    );

    // f(z) = z₁²·A, gaussian: Γ₂ = 4z₁²A² + 4A².
    let a = pauli_z();
    let quad = MatrixValuedMap::new(Domain::Euclidean { n: 2 }, 2, move |z| a.scale(z[0] * z[0]));
    for z1 in [0.0, 0.9, -1.7] {
        let g2 = gamma2_euclidean(&quad, &model, &[z1, 0.4]).unwrap();
        let expected = pauli_z().square().scale(4.0 * z1 * z1 + 4.0);
        assert!(
            (&g2 - &expected).hs_norm() <= 1e-5 * (1.0 + expected.hs_norm()),
            "z1 = {z1}: {}",
            (&g2 - &expected).hs_norm()
        );
    }
}

#[test]
fn gaussian_bakry_emery_on_random_quadratic_maps() {
    // Γ(f) ⪯ Γ₂(f) pointwise for the Ornstein–Uhlenbeck semigroup (c = 1),
    // exercised on random matrix polynomials of degree ≤ 2 with the
    // finite-difference partials.
    let n = 2;
    let model = LogConcaveModel::gaussian(n);
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..10 {
        let constant = random_hermitian(2, &mut rng);
        let linear: Vec<HermitianMatrix> = (0..n).map(|_| random_hermitian(2, &mut rng)).collect();
        let quad: Vec<Vec<HermitianMatrix>> = (0..n)
            .map(|_| (0..n).map(|_| random_hermitian(2, &mut rng)).collect())
            .collect();
        let f = MatrixValuedMap::new(Domain::Euclidean { n }, 2, move |z| {
            let mut acc = constant.clone();
            for (i, b) in linear.iter().enumerate() {
                acc.add_assign_scaled(z[i], b);
            }
            for (i, row) in quad.iter().enumerate() {
                for (j, q) in row.iter().enumerate() {
                    acc.add_assign_scaled(z[i] * z[j], q);
                }
            }
            acc
        });
        let z: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let gamma = gamma_euclidean(&f, &z).unwrap();
        let gamma2 = gamma2_euclidean(&f, &model, &z).unwrap();
        let slack = &gamma2 - &gamma;
        let margin = slack.psd_margin().unwrap();
        assert!(
            margin >= -1e-9 * (1.0 + gamma2.op_norm().unwrap()),
            "margin {margin}"
        );
    }
}

// --- sphere ------------------------------------------------------------------

#[test]
fn sphere_sample_statistics() {
    let n = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let count = 20_000;
    let mut mean = vec![0.0; n + 1];
    let mut mean_sq = vec![0.0; n + 1];
    for _ in 0..count {
        let x = sphere_sample(n, &mut rng);
        let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() <= 1e-12);
        for i in 0..=n {
            mean[i] += x[i] / count as f64;
            mean_sq[i] += x[i] * x[i] / count as f64;
        }
    }
    let stderr = 1.0 / ((n + 1) as f64 * count as f64).sqrt();
    for i in 0..=n {
        assert!(mean[i].abs() <= 4.0 * stderr * 2.0, "mean[{i}] = {}", mean[i]);
        // Var(x_i²) = 2n/((n+1)²(n+3)) for the uniform sphere; bound it by
        // E x_i⁴ for a conservative band.
        let sq_stderr = (3.0 / (((n + 1) * (n + 3)) as f64)).sqrt() / (count as f64).sqrt();
        assert!(
            (mean_sq[i] - 1.0 / (n + 1) as f64).abs() <= 4.0 * sq_stderr,
            "mean_sq[{i}] = {}",
            mean_sq[i]
        );
    }
}

#[test]
fn sphere_brownian_step_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let x0 = sphere_sample(2, &mut rng);
    assert_eq!(sphere_brownian_step(&x0, 0.0, &mut rng), x0);

    let mut x = x0;
    let steps = 20_000;
    let mut north = 0usize;
    let mut chain_mean = [0.0; 3];
    for _ in 0..steps {
        x = sphere_brownian_step(&x, 0.5, &mut rng);
        let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() <= 1e-12);
        if x[0] > 0.0 {
            north += 1;
        }
        for (m, xi) in chain_mean.iter_mut().zip(&x) {
            *m += xi / steps as f64;
        }
    }
    let frac = north as f64 / steps as f64;
    // Mixing at h = 0.5 is fast; allow a generous correlated-sample band.
    assert!((frac - 0.5).abs() < 0.05, "hemisphere occupancy {frac}");

    // Long-run first moments agree with the direct uniform sampler.
    let mut sampler_mean = vec![0.0; 3];
    for _ in 0..steps {
        let y = sphere_sample(2, &mut rng);
        for (m, yi) in sampler_mean.iter_mut().zip(&y) {
            *m += yi / steps as f64;
        }
    }
    let stderr = (1.0 / 3f64 / steps as f64).sqrt();
    for (c, s) in chain_mean.iter().zip(&sampler_mean) {
        // The chain samples are correlated; widen its band accordingly.
        assert!(
            (c - s).abs() <= 4.0 * stderr * 3.0,
            "chain mean {c} vs sampler mean {s}"
        );
    }
}

#[test]
fn tangential_gradient_examples() {
    let constant = MatrixValuedMap::new(Domain::Sphere { n: 2 }, 2, |_x| pauli_z());
    let grads = sphere_tangential_gradient(&constant, &[1.0, 0.0, 0.0]).unwrap();
    assert!(grads.iter().all(|g| g.hs_norm() < 1e-10));

    // f(x) = x₁·A at x = e₁: the radial direction is projected out.
    let a = pauli_z();
    let radial = MatrixValuedMap::new(Domain::Sphere { n: 2 }, 2, move |x| a.scale(x[0]));
    let grads = sphere_tangential_gradient(&radial, &[1.0, 0.0, 0.0]).unwrap();
    assert!(grads.iter().all(|g| g.hs_norm() <= 1e-9));

    // f(x) = x₂·A at x = e₁: component A along e₂.
    let a = pauli_z();
    let lateral = MatrixValuedMap::new(Domain::Sphere { n: 2 }, 2, move |x| a.scale(x[1]));
    let grads = sphere_tangential_gradient(&lateral, &[1.0, 0.0, 0.0]).unwrap();
    assert!((&grads[1] - &pauli_z()).hs_norm() <= 1e-9);
    assert!(grads[0].hs_norm() <= 1e-9);
    assert!(grads[2].hs_norm() <= 1e-9);
}

#[test]
fn sphere_linear_gamma_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    let coeffs: Vec<HermitianMatrix> = (0..4).map(|_| random_hermitian(2, &mut rng)).collect();
    let model = SphereLinearModel::new(coeffs.clone()).unwrap();

    // x = e₁ → Σ A_i² − A₁².
    let mut e1 = vec![0.0; 4];
    e1[0] = 1.0;
    let gamma = model.gamma(&e1);
    let mut expected = model.coefficient_square_sum();
    expected.add_assign_scaled(-1.0, &coeffs[0].square());
    assert!((&gamma - &expected).hs_norm() <= 1e-12 * (1.0 + expected.hs_norm()));

    let zero_model =
        SphereLinearModel::new(vec![HermitianMatrix::zeros(2); 4]).unwrap();
    assert!(zero_model.gamma(&e1).hs_norm() == 0.0);

    for _ in 0..100 {
        let x = sphere_sample(3, &mut rng);
        let gamma = model.gamma(&x);
        // Rearranged identity Γ + f(x)² = Σ A_i².
        let mut back = gamma.clone();
        back.add_assign_scaled(1.0, &model.eval(&x).square());
        let target = model.coefficient_square_sum();
        assert!((&back - &target).hs_norm() <= 1e-14 * (1.0 + target.hs_norm()));
        // 0 ⪯ Γ ⪯ Σ A_i².
        assert!(gamma.is_psd(1e-9).unwrap());
        assert!(crate::hermitian::psd_order(&gamma, &target, 1e-9).unwrap());
        // Tangential-projection oracle.
        let oracle = sphere::gamma_from_tangential_gradient(&model.as_map(), &x).unwrap();
        assert!((&gamma - &oracle).hs_norm() <= 1e-9 * (1.0 + gamma.hs_norm()));
    }
}

#[test]
fn sphere_quadratic_gamma_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);

    let same = SphereQuadraticModel::new(vec![pauli_z(); 3]).unwrap();
    let x = sphere_sample(2, &mut rng);
    assert!(same.gamma(&x).hs_norm() == 0.0);

    let coeffs: Vec<HermitianMatrix> = (0..3).map(|_| random_hermitian(2, &mut rng)).collect();
    let model = SphereQuadraticModel::new(coeffs.clone()).unwrap();
    let e1 = vec![1.0, 0.0, 0.0];
    assert!(model.gamma(&e1).hs_norm() <= 1e-15);

    let a_max: f64 = {
        let mut best: f64 = 0.0;
        for i in 0..3 {
            for j in i + 1..3 {
                best = best.max((&coeffs[i] - &coeffs[j]).op_norm().unwrap());
            }
        }
        best
    };
    for _ in 0..100 {
        let x = sphere_sample(2, &mut rng);
        let gamma = model.gamma(&x);
        assert!(gamma.is_psd(1e-9).unwrap());
        // Γ ⪯ 2a²·I.
        let cap = HermitianMatrix::identity(2).scale(2.0 * a_max * a_max);
        assert!(crate::hermitian::psd_order(&gamma, &cap, 1e-9).unwrap());
        // Γ ⪯ 4 Σ x_i² (A_i − B)² for every B.
        let b = random_hermitian(2, &mut rng);
        let mut bound = HermitianMatrix::zeros(2);
        for (i, a) in coeffs.iter().enumerate() {
            bound.add_assign_scaled(4.0 * x[i] * x[i], &(a - &b).square());
        }
        assert!(crate::hermitian::psd_order(&gamma, &bound, 1e-9).unwrap());
        // Gradient-projection oracle.
        let oracle = sphere::gamma_from_tangential_gradient(&model.as_map(), &x).unwrap();
        assert!((&gamma - &oracle).hs_norm() <= 1e-9 * (1.0 + gamma.hs_norm()));
    }
}

// --- SO(d) -------------------------------------------------------------------

#[test]
fn haar_sampler_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let mut mean_entry = 0.0;
    let trials = 2000;
    for _ in 0..trials {
        let d = 2 + (rng.random_range(0..3) as usize);
        let o = so_sample_haar(d, &mut rng);
        assert!(o.orthogonality_defect() <= 1e-12 * d as f64);
        assert!((o.det() - 1.0).abs() <= 1e-10);
        if d == 3 {
            mean_entry += o.get(0, 0);
        }
    }
    // Sign symmetry of Haar: E[O₁₁] = 0. Var(O₁₁) = 1/d ≤ 1/2.
    let stderr = (1.0 / 3f64 / (trials as f64 / 3.0)).sqrt();
    assert!(mean_entry.abs() / (trials as f64 / 3.0) <= 4.0 * stderr);
}

#[test]
fn skew_basis_sum_examples() {
    for d in [2, 3, 5] {
        let id_sum = skew_basis_sum(&RealMatrix::identity(d));
        let expected = RealMatrix::identity(d).scale(-((d - 1) as f64) / 2.0);
        assert!(id_sum.sub(&expected).max_abs() <= 1e-14);

        assert!(skew_basis_sum(&RealMatrix::zeros(d)).max_abs() == 0.0);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..200 {
        let m = RealMatrix::from_fn(3, |_, _| rng.sample(StandardNormal));
        let direct = skew_basis_sum(&m);
        let closed = skew_basis_sum_closed_form(&m);
        assert!(direct.sub(&closed).max_abs() <= 1e-12 * (1.0 + m.max_abs()));
    }
}

#[test]
fn expm_skew_matches_plane_rotation() {
    // exp(ε·S_kl) rotates the (k,l) plane by ε/√2.
    let eps = 0.37;
    let s = skew_basis_element(3, 0, 2).scale(eps);
    let exp = expm_skew(&s).unwrap();
    let theta = eps / 2f64.sqrt();
    let mut expected = RealMatrix::identity(3);
    expected.set(0, 0, theta.cos());
    expected.set(2, 2, theta.cos());
    expected.set(0, 2, theta.sin());
    expected.set(2, 0, -theta.sin());
    assert!(exp.sub(&expected).max_abs() <= 1e-13);
    assert!(exp.orthogonality_defect() <= 1e-13);
}

#[test]
fn gamma_so_conjugation_examples() {
    let zero = SOConjugationModel::new(vec![RealMatrix::zeros(2)]).unwrap();
    let id = vec![RealMatrix::identity(2)];
    assert!(zero.gamma(&id).unwrap().hs_norm() == 0.0);

    // Single A = diag(1, −1), d = 2, O = I:
    // ½[(tr A² − 0)·I + 2·A²] = ½[2I + 2I] = 2I.
    let a = RealMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
    let model = SOConjugationModel::new(vec![a]).unwrap();
    let gamma = model.gamma(&id).unwrap();
    let expected = HermitianMatrix::identity(2).scale(2.0);
    assert!((&gamma - &expected).hs_norm() <= 1e-14);

    // For one conjugation term the operator norm of Γ is invariant under
    // the rotation (conjugation preserves the spectrum).
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let model = SOConjugationModel::new(vec![random_symmetric(3, &mut rng)]).unwrap();
    let reference = model
        .gamma(&vec![RealMatrix::identity(3); 1])
        .unwrap()
        .op_norm()
        .unwrap();
    for _ in 0..10 {
        let os = model.sample_point(&mut rng);
        let norm = model.gamma(&os).unwrap().op_norm().unwrap();
        assert!((norm - reference).abs() <= 1e-10 * (1.0 + reference));
    }

    // Orthogonality and rotation count are input contracts.
    let skewed = vec![RealMatrix::from_rows(&[vec![1.0, 0.1], vec![0.0, 1.0]])];
    assert!(matches!(
        model.gamma(&vec![RealMatrix::identity(3); 2]),
        Err(ModelError::PointDimension { .. })
    ));
    let single = SOConjugationModel::new(vec![random_symmetric(2, &mut rng)]).unwrap();
    assert!(matches!(
        single.gamma(&skewed),
        Err(ModelError::NotOrthogonal { .. })
    ));
}

#[test]
fn gamma_geodesic_fd_oracle() {
    // d = 2, single diag(1, −1) at the identity: Γ ≈ 2I.
    let a = RealMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
    let model = SOConjugationModel::new(vec![a]).unwrap();
    let id = vec![RealMatrix::identity(2)];
    let fd = model.gamma_geodesic_fd(&id, 1e-5).unwrap();
    let closed = model.gamma(&id).unwrap();
    assert!((&fd - &closed).hs_norm() <= 1e-3 * closed.hs_norm());

    let zero = SOConjugationModel::new(vec![RealMatrix::zeros(2)]).unwrap();
    assert!(zero.gamma_geodesic_fd(&id, 1e-5).unwrap().hs_norm() <= 1e-12);

    // First order: halving h roughly halves the error.
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let model = SOConjugationModel::new(vec![random_symmetric(3, &mut rng)]).unwrap();
    let os = model.sample_point(&mut rng);
    let closed = model.gamma(&os).unwrap();
    let err = |h: f64| {
        let fd = model.gamma_geodesic_fd(&os, h).unwrap();
        (&fd - &closed).hs_norm()
    };
    let (e1, e2) = (err(2e-3), err(1e-3));
    let ratio = e1 / e2;
    assert!(
        (1.5..=3.0).contains(&ratio),
        "error ratio {ratio} ({e1} vs {e2})"
    );
}

#[test]
fn variance_proxy_closed_forms() {
    // All-zero coefficients → 0, for every model family.
    let zero_sphere =
        SphereLinearModel::new(vec![HermitianMatrix::zeros(2); 3]).unwrap();
    assert_eq!(zero_sphere.variance_proxy_bound().unwrap(), 0.0);

    // Sphere-linear with A₁ = I₂ and the rest zero → ‖I‖ = 1.
    let mut coeffs = vec![HermitianMatrix::zeros(2); 3];
    coeffs[0] = HermitianMatrix::identity(2);
    let model = SphereLinearModel::new(coeffs).unwrap();
    assert!((model.variance_proxy_bound().unwrap() - 1.0).abs() < 1e-15);

    // SO with single diag(1, −1), d = 2: ½(2 + 2·1) = 2.
    let a = RealMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
    let so = SOConjugationModel::new(vec![a]).unwrap();
    assert!((so.variance_proxy_bound().unwrap() - 2.0).abs() < 1e-14);

    // Sphere-quadratic: both branch values are valid upper bounds; the min
    // must not exceed the 2a² branch.
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let coeffs: Vec<HermitianMatrix> = (0..4).map(|_| random_hermitian(2, &mut rng)).collect();
    let quad = SphereQuadraticModel::new(coeffs.clone()).unwrap();
    let bound = quad.variance_proxy_bound().unwrap();
    let mut a_max: f64 = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            a_max = a_max.max((&coeffs[i] - &coeffs[j]).op_norm().unwrap());
        }
    }
    assert!(bound <= 2.0 * a_max * a_max + 1e-12);
    // It really bounds the proxy: sample Γ norms.
    for _ in 0..50 {
        let x = sphere_sample(3, &mut rng);
        assert!(quad.gamma(&x).op_norm().unwrap() <= bound + 1e-9);
    }
}

#[test]
fn concentration_model_metadata() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let coeffs: Vec<HermitianMatrix> = (0..11).map(|_| random_hermitian(2, &mut rng)).collect();
    let sphere = ConcentrationModel::SphereLinear(SphereLinearModel::new(coeffs.clone()).unwrap());
    assert_eq!(sphere.bakry_emery_constant(), 1.0 / 9.0);
    assert_eq!(sphere.dim(), 2);
    assert_eq!(sphere.kind_name(), "sphere-linear");

    let gauss = ConcentrationModel::gaussian_series(coeffs).unwrap();
    assert_eq!(gauss.bakry_emery_constant(), 1.0);
    let v = gauss.variance_proxy_bound().unwrap();
    assert!(v > 0.0);

    let a = RealMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
    let so = ConcentrationModel::SOConjugation(SOConjugationModel::new(vec![a]).unwrap());
    assert_eq!(so.bakry_emery_constant(), 4.0);
    let value = so.sample_value(&mut rng);
    assert_eq!(value.dim(), 2);
    // Conjugation preserves the spectrum: eigenvalues stay ±1.
    let eigs = value.eigenvalues().unwrap();
    assert!((eigs[0] + 1.0).abs() < 1e-10 && (eigs[1] - 1.0).abs() < 1e-10);
}
