use fosc::algebra::DeformationFunction;
use fosc::nlcs::*;
use fosc::special::{ln_gamma, GeneralizedBessel};
use fosc::spectrum::{derive_params, TABLE1_WIDTHS};
use fosc::stats::deformed_moments;
use fosc::C64;
use proptest::prelude::*;

fn confined(a: f64) -> DeformationFunction {
    derive_params(a, 1.0, 1.0).unwrap().deformation()
}

fn betas() -> Vec<C64> {
    let mut out = Vec::new();
    for &r in &[0.1, 0.5, 1.0, 1.5, 2.0] {
        for &deg in &[0.0f64, 45.0, 135.0, 270.0] {
            out.push(C64::from_polar(r, deg.to_radians()));
        }
    }
    out
}

#[test]
fn eigen_residual_at_table_parameters() {
    for &a in &TABLE1_WIDTHS {
        let f = confined(a);
        for beta in betas() {
            let s = build_nlcs(&f, beta).unwrap();
            assert!(eigen_residual(&f, &s, beta).unwrap() <= 1e-8);
            assert!(s.tail_mass() <= TAIL_CONTRACT);
            let norm: f64 = s.probabilities().iter().sum();
            assert!((norm - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn expectation_identities() {
    for &a in &[0.5, 1.0, 3.0] {
        let f = confined(a);
        for beta in betas() {
            let s = build_nlcs(&f, beta).unwrap();
            let (m1, m2, n_a, _) = deformed_moments(&s, &f).unwrap();
            assert!((m1 - beta).norm() < 1e-8);
            assert!((m2 - beta * beta).norm() < 1e-8);
            assert!((n_a - beta.norm_sqr()).abs() < 1e-8);
        }
    }
}

#[test]
fn undeformed_limit_is_glauber() {
    let f = DeformationFunction::new(1e-12, 1.0).unwrap();
    for beta in betas() {
        let s = build_nlcs(&f, beta).unwrap();
        // Poisson oracle e^{−|β|²/2} βⁿ/√n!
        let oracle: Vec<C64> = (0..s.dim())
            .map(|n| {
                let ln_mag = -0.5 * beta.norm_sqr() + n as f64 * beta.norm().ln() - 0.5 * ln_gamma(n as f64 + 1.0);
                C64::from_polar(ln_mag.exp(), n as f64 * beta.arg())
            })
            .collect();
        let overlap: C64 = oracle.iter().zip(s.coefficients().iter()).map(|(o, c)| o.conj() * c).sum();
        assert!(overlap.norm() >= 1.0 - 1e-10);
        let g = glauber_state(beta).unwrap();
        assert!(g.overlap(&s).norm() >= 1.0 - 1e-10);
    }
}

#[test]
fn continuity_in_label() {
    let f = confined(1.0);
    let mut worst = 0.0f64;
    for beta in betas() {
        for &step in &[1e-3, 5e-4, 1e-4] {
            for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                let other = beta + dir * step;
                let d = build_nlcs(&f, beta).unwrap().distance(&build_nlcs(&f, other).unwrap());
                worst = worst.max(d / step);
            }
        }
    }
    assert!(worst.is_finite() && worst < 5.0, "fitted C = {worst}");
}

/// I_ν(x) = (1/π) ∫₀^π e^{x cos θ} cos(νθ) dθ for integer ν, by the
/// trapezoid rule (spectrally accurate for periodic integrands).
fn bessel_i_oracle(nu: u32, x: f64) -> f64 {
    let m = 400;
    let h = std::f64::consts::PI / m as f64;
    let mut s = 0.0;
    for j in 0..=m {
        let th = j as f64 * h;
        let w = if j == 0 || j == m { 0.5 } else { 1.0 };
        s += w * (x * th.cos()).exp() * (nu as f64 * th).cos();
    }
    s * h / std::f64::consts::PI
}

#[test]
fn generalized_bessel_reduces_to_modified_bessel() {
    for nu in 1..6u32 {
        let b = GeneralizedBessel::new(nu as f64, 1.0).unwrap();
        for &x in &[0.1, 0.7, 2.0, 5.0, 11.0] {
            let want = bessel_i_oracle(nu, x);
            let got = b.eval(x).unwrap();
            // the oracle loses digits to cancellation at small x
            assert!((got - want).abs() < 1e-14 + 1e-12 * want, "nu={nu} x={x} got={got} want={want}");
        }
    }
}

#[test]
fn normalization_forms_agree() {
    for &(g, alpha) in &[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)] {
        let f = DeformationFunction::new(g, alpha).unwrap();
        let r: Vec<f64> =
            [0.5, 1.0, 2.0].iter().map(|&b| nlcs_normalization(&f, C64::new(b, 0.0)).unwrap().ratio).collect();
        for v in &r {
            assert!((v - r[0]).abs() < 1e-8, "{g} {alpha}: {r:?}");
        }
    }
}

/// Closed form of the verbatim measure: ∫₀^∞ t^{μ−1} K_ν(t) dt =
/// 2^{μ−2} Γ((μ−ν)/2) Γ((μ+ν)/2).
fn identity_oracle(g: f64, alpha: f64, n: usize) -> f64 {
    let nf = n as f64;
    let m = (g - 1.0) * nf + alpha;
    let l = (g - 1.0) * nf + 1.0;
    let p = nf + 0.5 * alpha + 0.5 * l;
    let mu = 2.0 * p + 2.0;
    (4f64.ln() + ln_gamma(0.5 * (mu - m)) + ln_gamma(0.5 * (mu + m)) - ln_gamma(nf + 1.0) - ln_gamma(g * nf + alpha + 1.0)).exp()
}

#[test]
fn resolution_of_identity_matches_mellin_oracle() {
    for &(g, alpha) in &[(1.0, 1.0), (1.0, 2.5), (0.5, 1.3), (1.5, 1.8)] {
        let f = DeformationFunction::new(g, alpha).unwrap();
        let rows = resolution_of_identity_check(&f, 6, 8).unwrap();
        for r in &rows {
            let want = identity_oracle(g, alpha, r.n);
            assert!(((r.value - want) / want).abs() < 1e-6, "g={g} a={alpha} n={} {} vs {want}", r.n, r.value);
            assert!((r.deviation - (r.value - 1.0)).abs() < 1e-15);
        }
    }
    // γ = α = 1: the diagonal is 4Γ(n+3/2)Γ(n+5/2)/(n!(n+1)!), 3π/2 at n = 0
    let rows = resolution_of_identity_check(&DeformationFunction::new(1.0, 1.0).unwrap(), 0, 8).unwrap();
    assert!((rows[0].value - 1.5 * std::f64::consts::PI).abs() < 1e-6);
}

#[test]
fn guards() {
    let f = confined(1.0);
    assert!(build_nlcs(&f, C64::new(MAX_BETA * 1.01, 0.0)).is_err());
    assert!(build_nlcs(&f, C64::new(f64::NAN, 0.0)).is_err());
    assert!(resolution_of_identity_check(&f, MAX_IDENTITY_LEVEL + 1, 4).is_err());
    let vac = build_nlcs(&f, C64::new(0.0, 0.0)).unwrap();
    assert_eq!(vac.coefficients()[0], C64::new(1.0, 0.0));
}

#[test]
fn large_label_stays_finite() {
    let f = confined(0.5);
    let s = build_nlcs(&f, C64::new(20.0, 0.0)).unwrap();
    assert!(s.coefficients().iter().all(|c| c.re.is_finite() && c.im.is_finite()));
    assert!(eigen_residual(&f, &s, C64::new(20.0, 0.0)).unwrap() <= 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residual_property(g in 0.0f64..=2.0, alpha in 1.0f64..=3.0, r in 0.0f64..=2.0, phase in 0.0f64..6.3) {
        let f = DeformationFunction::new(g, alpha).unwrap();
        let beta = C64::from_polar(r, phase);
        let s = build_nlcs(&f, beta).unwrap();
        prop_assert!(eigen_residual(&f, &s, beta).unwrap() <= 1e-8);
        prop_assert!((s.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-13);
    }
}
