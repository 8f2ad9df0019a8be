//! Property tests over the algebraic invariants: construction/serialization
//! round trips, spectral identities, order relations, and bound-curve shape
//! constraints, on arbitrary inputs rather than hand-picked ones.

use std::sync::Arc;

use proptest::prelude::*;

use carre::bounds;
use carre::finite::{Factor, FiniteProductSpace, MatrixField};
use carre::hermitian::{dilation, psd_order, CMatrix, Complex64, HermitianMatrix};

fn complex_entry() -> impl Strategy<Value = Complex64> {
    (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn hermitian(max_dim: usize) -> impl Strategy<Value = HermitianMatrix> {
    (1..=max_dim).prop_flat_map(|d| {
        proptest::collection::vec(complex_entry(), d * d).prop_map(move |entries| {
            CMatrix::from_entries(d, d, entries).unwrap().hermitian_part()
        })
    })
}

fn weights(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.05f64..1.0, 1..=max_len).prop_map(|raw| {
        let sum: f64 = raw.iter().sum();
        raw.iter().map(|w| w / sum).collect()
    })
}

proptest! {
    #[test]
    fn literal_round_trip_is_lossless(m in hermitian(5)) {
        let json = serde_json::to_string(&m).unwrap();
        let back: HermitianMatrix = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(m, back);
    }

    #[test]
    fn eig_reconstructs_and_orders(m in hermitian(6)) {
        let eig = m.eig().unwrap();
        let recon = eig.reconstruct();
        prop_assert!((&recon - &m).hs_norm() <= 1e-10 * (1.0 + m.hs_norm()));
        let gram = &eig.eigenvectors.adjoint() * &eig.eigenvectors;
        prop_assert!((&gram - &CMatrix::identity(m.dim())).hs_norm() <= 1e-10 * m.dim() as f64);
        for pair in eig.eigenvalues.windows(2) {
            prop_assert!(pair[0] <= pair[1]);
        }
    }

    #[test]
    fn second_trace_power_is_squared_hs_norm(m in hermitian(5)) {
        let lhs = m.trace_power_abs(2.0).unwrap();
        let rhs = m.hs_norm().powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs));
    }

    #[test]
    fn psd_order_is_reflexive_and_shift_monotone(m in hermitian(4), shift in 0.0f64..5.0) {
        prop_assert!(psd_order(&m, &m, 1e-12).unwrap());
        let lifted = &m + &HermitianMatrix::identity(m.dim()).scale(shift);
        prop_assert!(psd_order(&m, &lifted, 1e-12).unwrap());
    }

    #[test]
    fn dilation_norm_is_largest_singular_value(
        entries in proptest::collection::vec(complex_entry(), 6),
    ) {
        let h = CMatrix::from_entries(2, 3, entries).unwrap();
        let dil = dilation(&h);
        // Oracle: singular values from the spectrum of H*H.
        let gram = h.adjoint().matmul(&h).hermitian_part();
        let sigma_max = gram
            .eigenvalues()
            .unwrap()
            .last()
            .unwrap()
            .max(0.0)
            .sqrt();
        prop_assert!((dil.op_norm().unwrap() - sigma_max).abs() <= 1e-9 * (1.0 + sigma_max));
    }

    #[test]
    fn product_measure_normalizes(w1 in weights(3), w2 in weights(4)) {
        let space = FiniteProductSpace::new(vec![
            Factor::from_weights(&w1),
            Factor::from_weights(&w2),
        ])
        .unwrap();
        let total: f64 = (0..space.total_states()).map(|s| space.state_weight(s)).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn semigroup_fixes_constants_and_preserves_mean(
        value in hermitian(3),
        w in weights(3),
        t in 0.0f64..5.0,
    ) {
        let space = Arc::new(
            FiniteProductSpace::new(vec![Factor::rademacher(), Factor::from_weights(&w)])
                .unwrap(),
        );
        let constant = MatrixField::constant(Arc::clone(&space), value.clone());
        let moved = constant.semigroup_apply(t).unwrap();
        for v in moved.values() {
            prop_assert!((v - &value).hs_norm() <= 1e-12 * (1.0 + value.hs_norm()));
        }
    }

    #[test]
    fn gamma_scaling_is_exactly_quadratic_in_dyadic_factors(
        value in hermitian(2),
        k in 0u32..4,
    ) {
        // Dyadic scalings are exact in floating point, so Γ(2^k f) must be
        // exactly 4^k Γ(f).
        let f = carre::finite::rademacher_linear(&value);
        let scale = (1u64 << k) as f64;
        let scaled = f.scale(scale);
        let gamma = f.gamma();
        let gamma_scaled = scaled.gamma();
        for (a, b) in gamma_scaled.values().iter().zip(gamma.values()) {
            prop_assert_eq!(a, &b.scale(scale * scale));
        }
    }

    #[test]
    fn subgaussian_tail_is_monotone_and_capped(
        d in 1usize..6,
        c in 0.1f64..5.0,
        v in 0.0f64..5.0,
        t1 in 0.0f64..10.0,
        dt in 0.0f64..10.0,
    ) {
        let lo = bounds::subgaussian_tail(d, c, v, t1).unwrap();
        let hi = bounds::subgaussian_tail(d, c, v, t1 + dt).unwrap();
        prop_assert!(hi <= lo + 1e-12);
        prop_assert!(lo <= d as f64);
        prop_assert!(bounds::two_sided(lo) <= 1.0);
    }

    #[test]
    fn laplace_tail_reduces_to_subgaussian(
        d in 1usize..5,
        c1 in 0.0f64..5.0,
        t in 0.0f64..10.0,
    ) {
        let laplace = bounds::laplace_tail(d, c1, 0.0, t).unwrap();
        let subg = bounds::subgaussian_tail(d, 1.0, c1, t).unwrap();
        prop_assert_eq!(laplace.to_bits(), subg.to_bits());
    }

    #[test]
    fn mean_value_closed_form_never_beats_grid(
        a in hermitian(2),
        b in hermitian(2),
        c in hermitian(2),
    ) {
        prop_assume!(a.dim() == b.dim() && b.dim() == c.dim());
        let psi = |x: f64| 3.0 * x * x;
        let closed = bounds::mean_value_rhs(&a, &b, &c, psi).unwrap();
        let grid: Vec<f64> = (0..200)
            .map(|i| 10f64.powf(-4.0 + 8.0 * i as f64 / 199.0))
            .collect();
        let grid_value = bounds::mean_value_rhs_grid(&a, &b, &c, psi, &grid).unwrap();
        prop_assert!(grid_value >= closed - 1e-9 * (1.0 + closed.abs()));
    }
}
