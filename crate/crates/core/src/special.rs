//! Special functions used by the coherent-state normalization and the
//! resolution-of-identity diagnostic.

use statrs::function::gamma::ln_gamma as statrs_ln_gamma;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, QuadOptions};

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    statrs_ln_gamma(x)
}

/// Numerically stable ln(Σ exp(terms)).
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// The two-parameter Bessel-like series
///
/// ```text
/// I_α^γ(x) = Σ_{s≥0} (x/2)^{2s+α} / (s! Γ(γs+α+1))
/// ```
///
/// which reduces to the modified Bessel function of the first kind I_α
/// when γ = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralizedBessel {
    pub alpha: f64,
    pub gamma: f64,
}

/// Terms below `exp(-SERIES_DROP)` relative to the largest are dropped.
const SERIES_DROP: f64 = 60.0;
const SERIES_MAX_TERMS: usize = 100_000;

impl GeneralizedBessel {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(invalid(format!("alpha must be finite and >= 1, got {alpha}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(invalid(format!("gamma must be finite and >= 0, got {gamma}")));
        }
        Ok(Self { alpha, gamma })
    }

    /// ln of the s-th series term at argument x.
    pub fn ln_term(&self, x: f64, s: usize) -> f64 {
        let s_f = s as f64;
        (2.0 * s_f + self.alpha) * (0.5 * x).ln() - ln_gamma(s_f + 1.0) - ln_gamma(self.gamma * s_f + self.alpha + 1.0)
    }

    /// ln I_α^γ(x) for x > 0.
    pub fn ln_eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(invalid(format!("generalized Bessel argument must be positive, got {x}")));
        }
        let mut terms = Vec::new();
        let mut best = f64::NEG_INFINITY;
        let mut prev = f64::NEG_INFINITY;
        for s in 0..SERIES_MAX_TERMS {
            let t = self.ln_term(x, s);
            terms.push(t);
            best = best.max(t);
            // Past the peak the terms decay faster than geometrically.
            if t < prev && t < best - SERIES_DROP {
                return Ok(log_sum_exp(&terms));
            }
            prev = t;
        }
        Err(Error::Convergence(format!("generalized Bessel series did not converge at x = {x}")))
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if x == 0.0 {
            return Ok(0.0);
        }
        self.ln_eval(x).map(f64::exp)
    }
}

/// Modified Bessel function of the second kind K_ν(x), x > 0, real order,
/// from the integral representation K_ν(x) = ∫₀^∞ exp(−x cosh u) cosh(νu) du.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(invalid(format!("K_nu argument must be positive, got {x}")));
    }
    let nu = nu.abs();
    // exp(−x cosh u + νu) < e^{-60} of its peak beyond u_max.
    let exponent = |u: f64| -x * u.cosh() + nu * u;
    let peak_u = if nu > x { (nu / x).asinh() } else { 0.0 };
    let peak = exponent(peak_u);
    let mut u_max = peak_u.max(1.0);
    while exponent(u_max) > peak - 60.0 {
        u_max *= 1.5;
    }
    let integrand = |u: f64| {
        let e = exponent(u);
        0.5 * (e.exp() + (e - 2.0 * nu * u).exp())
    };
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-13, max_intervals: 2000 };
    let mut total = 0.0;
    // Split at the peak so the adaptive scheme sees a unimodal piece on each side.
    if peak_u > 0.0 {
        total += integrate(integrand, 0.0, peak_u, opts)?.value;
    }
    total += integrate(integrand, peak_u, u_max, opts)?.value;
    Ok(total)
}
