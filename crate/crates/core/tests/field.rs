use fosc::algebra::{build_undeformed_ladder, DeformationFunction, FockOperator};
use fosc::field::*;
use fosc::nlcs::f_factorial;
use fosc::spectrum::derive_params;
use fosc::C64;
use ndarray::Array1;
use proptest::prelude::*;

fn confined(a: f64) -> DeformationFunction {
    derive_params(a, 1.0, 1.0).unwrap().deformation()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dual_pair_is_canonical(g in 0.0f64..=2.0, alpha in 1.0f64..=3.0, dim in prop_oneof![Just(8usize), Just(16), Just(64)]) {
        let f = DeformationFunction::new(g, alpha).unwrap();
        let pair = build_dual_pair(&f, dim).unwrap();
        let c = pair.b.commutator(&pair.b_dual_dagger).unwrap();
        let id = FockOperator::identity(dim).unwrap();
        prop_assert!(c.max_abs_diff_block(&id, dim - 1).unwrap() <= 1e-12);
        let (_, _, n_op) = build_undeformed_ladder(dim).unwrap();
        let num = pair.b_dual_dagger.mul(&pair.b).unwrap();
        for i in 0..dim {
            for j in 0..dim {
                let want = n_op.get(i, j);
                prop_assert!((num.get(i, j) - want).norm() <= 1e-13 * want.norm().max(1.0));
            }
        }
    }

    #[test]
    fn adjoint_formula_and_transport(g in 0.0f64..=2.0, alpha in 1.0f64..=3.0, dim in 4usize..40) {
        let f = DeformationFunction::new(g, alpha).unwrap();
        let pair = build_dual_pair(&f, dim).unwrap();
        let metric = MetricOperator::new(&f, dim).unwrap();
        prop_assert!(pair.adjoint_formula_defect(&metric).unwrap() <= 1e-12 * (dim as f64));
        let (a, a_dag, _) = build_undeformed_ladder(dim).unwrap();
        let ta = metric.transport(&a).unwrap();
        let ta_dag = metric.transport(&a_dag).unwrap();
        let scale = pair.b.matrix().iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!(ta.max_abs_diff(&pair.b).unwrap() <= 1e-12 * scale);
        prop_assert!(ta_dag.max_abs_diff(&pair.b_dual_dagger).unwrap() <= 1e-12);
        let c = ta.commutator(&ta_dag).unwrap();
        prop_assert!(c.max_abs_diff_block(&FockOperator::identity(dim).unwrap(), dim - 1).unwrap() <= 1e-10);
    }

    #[test]
    fn metric_dominates_plain_norm(g in 0.0f64..=2.0, alpha in 1.0f64..=3.0, dim in 2usize..60) {
        let f = DeformationFunction::new(g, alpha).unwrap();
        let metric = MetricOperator::new(&f, dim).unwrap();
        for n in 0..dim {
            let mut e = Array1::<C64>::zeros(dim);
            e[n] = C64::new(1.0, 0.0);
            prop_assert!(deformed_norm_sqr(&e, &metric).unwrap() >= 1.0);
        }
    }
}

#[test]
fn metric_product_oracle() {
    let f = DeformationFunction::new(0.5, 1.25f64.sqrt()).unwrap();
    let alpha = 1.25f64.sqrt();
    let want = alpha * (0.5 + alpha) * (1.0 + alpha);
    assert!((smatrix_scale(&f, 2).value() - want).abs() < 1e-13);
    for n in 0..12 {
        let direct: f64 = (0..=n).map(|j| 0.5 * j as f64 + 1.25f64.sqrt()).product();
        assert!((smatrix_scale(&f, n).value() / direct - 1.0).abs() < 1e-13);
        assert!((smatrix_scale(&f, n).value() / (f.alpha() * f_factorial(&f, n).powi(2)) - 1.0).abs() < 1e-13);
    }
}

#[test]
fn scale_factors_approach_one_for_wide_wells() {
    let widths: Vec<f64> = (0..30).map(|i| 0.3 * 1.3f64.powi(i)).collect();
    for n in [0usize, 1, 3, 8] {
        let v: Vec<f64> = widths.iter().map(|&a| smatrix_scale(&confined(a), n).value()).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]), "n={n}");
        assert!(v.iter().all(|&x| x > 1.0));
        assert!(v.last().unwrap() - 1.0 < 1e-3);
    }
    let p: Vec<f64> = widths.iter().map(|&a| propagator_scale(&confined(a))).collect();
    assert!(p.windows(2).all(|w| w[1] < w[0]));
    assert!(p.last().unwrap() - 1.0 < 1e-6);
    assert_eq!(propagator_scale(&confined(1.0)), confined(1.0).alpha());
}

#[test]
fn metric_strictly_increasing_when_deformed() {
    for &a in &[0.5, 1.0, 4.0, 30.0] {
        let f = confined(a);
        let v: Vec<f64> = (0..40).map(|n| smatrix_scale(&f, n).ln_value).collect();
        assert!(v.windows(2).all(|w| w[1] > w[0]));
    }
    // γ = 0, α = 1: flat
    let flat: Vec<f64> = (0..5).map(|n| smatrix_scale(&DeformationFunction::undeformed(), n).value()).collect();
    assert!(flat.iter().all(|&x| x == 1.0));
}

#[test]
fn fock_tower() {
    let f = confined(0.8);
    let dim = 12;
    let pair = build_dual_pair(&f, dim).unwrap();
    let mut v = Array1::<C64>::zeros(dim);
    v[0] = C64::new(1.0, 0.0);
    assert!(pair.b.apply(&v).unwrap().iter().all(|z| z.norm() == 0.0));
    for m in 1..dim {
        v = pair.b_dual_dagger.apply(&v).unwrap();
        for (j, z) in v.iter().enumerate() {
            if j == m {
                assert!(z.norm() > 0.0);
            } else {
                assert_eq!(z.norm(), 0.0);
            }
        }
    }
}

#[test]
fn dual_field_commutator_equals_undeformed_partial_sum() {
    let reg = ModeRegistry::sine_modes(10, 1.0, 12, confined(1.0)).unwrap();
    let positions = [(0.1, 0.2), (-0.5, 0.5), (0.3, 0.3), (0.0, -0.9)];
    let rep = field_commutator_check(&reg, &positions).unwrap();
    assert!(rep.max_dual_deviation <= 1e-12);
    assert!(rep.max_deformed_operator_deviation <= 1e-12);
    assert!(rep.max_off_diagonal <= 1e-12);
    for (p, &(r, rp)) in rep.pairs.iter().zip(&positions) {
        // −i Σ_k u_k(r)u_k(r′)/V with V = 2a
        let want: f64 = reg.modes.iter().map(|m| m.mode_function(r) * m.mode_function(rp)).sum::<f64>() / reg.volume;
        assert!((p.delta_partial_sum - C64::new(0.0, -want)).norm() <= 1e-12);
        assert!((p.dual_value - p.delta_partial_sum).norm() <= 1e-12);
    }
}

#[test]
fn modes_are_orthonormal() {
    let reg = ModeRegistry::sine_modes(6, 2.0, 4, DeformationFunction::undeformed()).unwrap();
    assert!(reg.orthonormality_defect(4000) < 1e-10);
}

#[test]
fn mode_hamiltonian_counts_quanta() {
    let f = confined(1.5);
    let pair = build_dual_pair(&f, 10).unwrap();
    let h = mode_hamiltonian(&pair, 2.5).unwrap();
    for n in 0..10 {
        assert!((h.get(n, n).re - 2.5 * n as f64).abs() < 1e-12);
    }
    assert!(h.max_off_diagonal() == 0.0);
}

#[test]
fn metric_overflow_and_log_scale() {
    let f = DeformationFunction::new(2.0, 3.0).unwrap();
    assert!(MetricOperator::new(&f, 400).is_err());
    let s = smatrix_scale(&f, 400);
    assert!(s.overflows() && s.ln_value.is_finite());
}
