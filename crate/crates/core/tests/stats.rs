use fosc::algebra::DeformationFunction;
use fosc::nlcs::{build_nlcs, glauber_state, FockState};
use fosc::spectrum::derive_params;
use fosc::stats::*;
use fosc::C64;
use ndarray::Array1;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn confined(a: f64) -> DeformationFunction {
    derive_params(a, 1.0, 1.0).unwrap().deformation()
}

fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> FockState {
    let v: Array1<C64> = (0..dim).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    FockState::from_coefficients(v, None).unwrap()
}

/// 2⟨AA† + A†A⟩ − 4|⟨A⟩|² computed from A|ψ⟩ and A†|ψ⟩ directly.
fn sum_rule_rhs(state: &FockState, f: &DeformationFunction) -> f64 {
    let psi = state.padded(2);
    let d = psi.len();
    let amp = |k: usize| (k as f64).sqrt() * f.eval(k as i64);
    let mut lower = Array1::<C64>::zeros(d);
    let mut raise = Array1::<C64>::zeros(d);
    for k in 1..d {
        lower[k - 1] = psi[k] * amp(k);
        raise[k] = psi[k - 1] * amp(k);
    }
    let mean: C64 = psi.iter().zip(lower.iter()).map(|(p, l)| p.conj() * l).sum();
    let n_aa: f64 = lower.iter().map(|z| z.norm_sqr()).sum();
    let n_adag: f64 = raise.iter().map(|z| z.norm_sqr()).sum();
    2.0 * (n_aa + n_adag) - 4.0 * mean.norm_sqr()
}

#[test]
fn vacuum_and_coherent_states_are_unsqueezed() {
    let vac = FockState::vacuum(8).unwrap();
    for phi in [0.0, 33.0, 90.0, 271.0] {
        for q in [Quadrature::X, Quadrature::Y] {
            assert!(quadrature_squeezing(&vac, phi, q).unwrap().abs() < 1e-10);
        }
    }
    for beta in [C64::new(0.5, 0.0), C64::new(1.0, -1.0), C64::from_polar(2.0, 1.1)] {
        let g = glauber_state(beta).unwrap();
        for phi in [0.0, 45.0, 100.0] {
            for q in [Quadrature::X, Quadrature::Y] {
                assert!(quadrature_squeezing(&g, phi, q).unwrap().abs() < 1e-10);
            }
        }
        assert!(mandel_parameter(&g).unwrap().abs() < 1e-10);
    }
}

#[test]
fn mandel_vanishes_in_undeformed_limit() {
    let f = DeformationFunction::new(1e-10, (1.0f64 + 1e-20).sqrt()).unwrap();
    for &r in &[0.3, 1.0, 2.0, 3.0] {
        let s = build_nlcs(&f, C64::new(r, 0.0)).unwrap();
        assert!(mandel_parameter(&s).unwrap().abs() <= 1e-8);
    }
}

#[test]
fn confined_states_are_sub_poissonian() {
    for &a in &[0.5, 1.0, 2.0] {
        for &b2 in &[0.5, 1.0, 1.5] {
            let s = build_nlcs(&confined(a), C64::new(f64::sqrt(b2), 0.0)).unwrap();
            assert!(mandel_parameter(&s).unwrap() < 0.0);
        }
    }
    assert!(mandel_parameter(&FockState::vacuum(4).unwrap()).is_err());
}

#[test]
fn squeezing_is_pi_periodic() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = confined(1.0);
    let states = [build_nlcs(&f, C64::new(2.0, 0.0)).unwrap(), random_state(&mut rng, 12)];
    for s in &states {
        for &phi in &[0.0, 17.0, 90.0, 123.4, 300.0] {
            for q in [Quadrature::X, Quadrature::Y] {
                let a = quadrature_squeezing(s, phi, q).unwrap();
                let b = quadrature_squeezing(s, phi + 180.0, q).unwrap();
                assert!((a - b).abs() <= 1e-10);
                let a = deformed_squeezing(s, &f, phi, q).unwrap().s;
                let b = deformed_squeezing(s, &f, phi + 180.0, q).unwrap().s;
                assert!((a - b).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn deformed_variance_equals_commutator_on_coherent_states() {
    for &a in &[0.5, 1.0, 3.0] {
        let f = confined(a);
        for &b2 in &[1.0, 1.5, 2.5] {
            let s = build_nlcs(&f, C64::new(f64::sqrt(b2), 0.0)).unwrap();
            for phi in [0.0, 60.0, 90.0] {
                let d = deformed_squeezing(&s, &f, phi, Quadrature::X).unwrap();
                assert!((d.four_variance - d.commutator_mean).abs() < 1e-8);
                assert!(d.s.abs() < 1e-8);
            }
        }
    }
}

#[test]
fn sweep_single_point_equals_direct_call() {
    let fixed = FixedParams { a_over_l0: 1.3, beta_sq: 1.0, phi_deg: 100.0, ..FixedParams::default() };
    let spec = SweepSpec {
        variable: SweepVariable::AOverL0,
        lo: 1.3,
        hi: 1.3,
        count: 1,
        spacing: Spacing::Logarithmic,
        fixed,
        observable: Observable::SX,
    };
    let rows = run_sweep(&spec).unwrap();
    assert_eq!(rows.len(), 1);
    let direct = observe(&fixed, Observable::SX).unwrap();
    assert_eq!(rows[0].value, direct.value);
    assert_eq!(rows[0].x, 1.3);
}

#[test]
fn sweep_rows_are_converged_and_ordered() {
    for which in 1..=4 {
        for series in figure_series(which, 12, FixedParams::default()).unwrap() {
            let rows = run_sweep(&series.spec).unwrap();
            assert_eq!(rows.len(), 12);
            assert!(rows.windows(2).all(|w| w[0].x < w[1].x));
            assert!(rows.iter().all(|r| r.residual <= 1e-8 && r.value.is_finite()));
        }
    }
    assert!(figure_series(5, 10, FixedParams::default()).is_err());
}

#[test]
fn sweep_validation() {
    let mut spec = SweepSpec {
        variable: SweepVariable::AOverL0,
        lo: 2.0,
        hi: 1.0,
        count: 5,
        spacing: Spacing::Linear,
        fixed: FixedParams::default(),
        observable: Observable::Mandel,
    };
    assert!(run_sweep(&spec).is_err());
    spec.lo = 0.0;
    spec.hi = 1.0;
    assert!(run_sweep(&spec).is_err());
    spec.count = 0;
    assert!(run_sweep(&spec).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deformed_sum_rule(seed in any::<u64>(), dim in 2usize..24, g in 0.0f64..=2.0, alpha in 1.0f64..=3.0, phi in 0.0f64..360.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_state(&mut rng, dim);
        let f = DeformationFunction::new(g, alpha).unwrap();
        let x = deformed_four_variance(&s, &f, phi, Quadrature::X).unwrap();
        let y = deformed_four_variance(&s, &f, phi, Quadrature::Y).unwrap();
        let rhs = sum_rule_rhs(&s, &f);
        prop_assert!((x + y - rhs).abs() <= 1e-10 * rhs.abs().max(1.0), "{} vs {}", x + y, rhs);
    }
}
