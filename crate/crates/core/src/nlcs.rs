//! Nonlinear (f-)coherent states: right eigenstates of A = a f(n̂).
//!
//! In the number basis the coefficients are c_n ∝ βⁿ / (√n! f(n)!), with
//! f(n)! = Π_{j=1}^n f(j). Everything is accumulated in log-space with the
//! phase carried separately, since f(n)! leaves double range near n ≈ 150.

use std::fmt::Write as _;

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::algebra::{deformed_annihilation, DeformationFunction};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::special::{bessel_k, ln_gamma, log_sum_exp, GeneralizedBessel};

/// Normalized amplitudes over |0⟩ … |N−1⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    coefficients: Array1<C64>,
    /// Probability in the last five retained levels.
    tail_mass: f64,
    label: Option<C64>,
}

impl FockState {
    /// Normalizes `coefficients`; fails on a zero vector.
    pub fn from_coefficients(coefficients: Array1<C64>, label: Option<C64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(invalid("state needs at least one coefficient"));
        }
        let norm = coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(invalid(format!("cannot normalize state with norm {norm}")));
        }
        let coefficients = coefficients.mapv(|c| c / norm);
        let tail_mass = tail_of(&coefficients);
        Ok(Self { coefficients, tail_mass, label })
    }

    pub fn number_state(n: usize, dim: usize) -> Result<Self> {
        if n >= dim {
            return Err(invalid(format!("|{n}⟩ does not fit in dimension {dim}")));
        }
        let mut c = Array1::zeros(dim);
        c[n] = C64::new(1.0, 0.0);
        Self::from_coefficients(c, None)
    }

    pub fn vacuum(dim: usize) -> Result<Self> {
        Self::number_state(0, dim)
    }

    pub fn coefficients(&self) -> &Array1<C64> {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn label(&self) -> Option<C64> {
        self.label
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.norm_sqr()).collect()
    }

    /// ⟨self|other⟩, zero-padding the shorter vector.
    pub fn overlap(&self, other: &FockState) -> C64 {
        self.coefficients
            .iter()
            .zip(other.coefficients.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// ‖self − other‖, zero-padding the shorter vector.
    pub fn distance(&self, other: &FockState) -> f64 {
        let n = self.dim().max(other.dim());
        let get = |s: &FockState, i: usize| s.coefficients.get(i).copied().unwrap_or_default();
        (0..n).map(|i| (get(self, i) - get(other, i)).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Copy with `extra` zero amplitudes appended.
    pub fn padded(&self, extra: usize) -> Array1<C64> {
        let mut v = Array1::zeros(self.dim() + extra);
        v.slice_mut(ndarray::s![..self.dim()]).assign(&self.coefficients);
        v
    }

    /// CSV dump: `n,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,re,im\n");
        for (n, c) in self.coefficients.iter().enumerate() {
            writeln!(out, "{n},{:.9e},{:.9e}", c.re, c.im).expect("write to String");
        }
        out
    }
}

fn tail_of(c: &Array1<C64>) -> f64 {
    let start = c.len().saturating_sub(5);
    c.iter().skip(start).map(|z| z.norm_sqr()).sum()
}

/// ln f(n)! = ½ Σ_{j=1}^n ln(γj + α)
pub fn ln_f_factorial(f: &DeformationFunction, n: usize) -> f64 {
    (1..=n as i64).map(|j| f.squared(j).ln()).sum::<f64>() * 0.5
}

/// f(n)! = Π_{j=1}^n f(j); f(0)! = 1.
pub fn f_factorial(f: &DeformationFunction, n: usize) -> f64 {
    ln_f_factorial(f, n).exp()
}

/// |β| guard for state construction.
pub const MAX_BETA: f64 = 50.0;
/// Construction keeps adding levels until the last five carry at most this.
pub const TAIL_TARGET: f64 = 1e-24;
/// Contracted upper bound on the tail mass of any constructed state.
pub const TAIL_CONTRACT: f64 = 1e-10;
pub const RESIDUAL_TARGET: f64 = 1e-8;
const INITIAL_DIM: usize = 16;
const MAX_DIM: usize = 1 << 16;
/// Above this size residuals use the banded product instead of a dense matrix.
const DENSE_RESIDUAL_LIMIT: usize = 512;

/// ln|c_n|² before normalization: 2n ln|β| − ln n! − 2 ln f(n)!
fn ln_weights(f: &DeformationFunction, beta_abs: f64, dim: usize) -> Vec<f64> {
    let ln_b2 = 2.0 * beta_abs.ln();
    let mut out = Vec::with_capacity(dim);
    let mut ln_ff2 = 0.0;
    for n in 0..dim {
        if n > 0 {
            ln_ff2 += f.squared(n as i64).ln();
        }
        let base = if n == 0 { 0.0 } else { n as f64 * ln_b2 };
        out.push(base - ln_gamma(n as f64 + 1.0) - ln_ff2);
    }
    out
}

fn coefficients_for(f: &DeformationFunction, beta: C64, dim: usize) -> Array1<C64> {
    let w = ln_weights(f, beta.norm(), dim);
    let ln_total = log_sum_exp(&w);
    let phase = beta.arg();
    Array1::from_iter(w.iter().enumerate().map(|(n, lw)| C64::from_polar((0.5 * (lw - ln_total)).exp(), n as f64 * phase)))
}

/// Coefficients βⁿ/(√n! f(n)!) truncated to `dim` levels, normalized.
pub fn nlcs_fixed_dim(f: &DeformationFunction, beta: C64, dim: usize) -> Result<FockState> {
    if dim == 0 {
        return Err(invalid("dimension must be positive"));
    }
    if beta.norm() == 0.0 {
        return FockState::vacuum(dim);
    }
    FockState::from_coefficients(coefficients_for(f, beta, dim), Some(beta))
}

/// A|ψ⟩ with A = a f(n̂), using the band structure. Same length as `psi`;
/// the last entry is always zero.
pub fn apply_deformed_annihilation(f: &DeformationFunction, psi: &Array1<C64>) -> Array1<C64> {
    let n = psi.len();
    let mut out = Array1::zeros(n);
    for k in 1..n {
        out[k - 1] = psi[k] * (k as f64).sqrt() * f.eval(k as i64);
    }
    out
}

/// ‖A|ψ⟩ − β|ψ⟩‖ with A on dimension N + 5.
pub fn eigen_residual(f: &DeformationFunction, state: &FockState, beta: C64) -> Result<f64> {
    let padded = state.padded(5);
    let a_psi = if padded.len() <= DENSE_RESIDUAL_LIMIT {
        deformed_annihilation(f, padded.len())?.apply(&padded)?
    } else {
        apply_deformed_annihilation(f, &padded)
    };
    Ok(a_psi.iter().zip(padded.iter()).map(|(x, p)| (x - beta * p).norm_sqr()).sum::<f64>().sqrt())
}

/// Nonlinear coherent state |β⟩_f with adaptive truncation.
///
/// The dimension doubles from 16 until the last five levels hold at most
/// [`TAIL_TARGET`] and the eigen-residual is below [`RESIDUAL_TARGET`].
pub fn build_nlcs(f: &DeformationFunction, beta: C64) -> Result<FockState> {
    let r = beta.norm();
    if !r.is_finite() || r > MAX_BETA {
        return Err(invalid(format!("|beta| = {r} exceeds the guard {MAX_BETA}")));
    }
    if r == 0.0 {
        return FockState::vacuum(INITIAL_DIM);
    }
    let mut dim = INITIAL_DIM;
    while dim <= MAX_DIM {
        let state = FockState::from_coefficients(coefficients_for(f, beta, dim), Some(beta))?;
        if state.tail_mass() <= TAIL_TARGET && eigen_residual(f, &state, beta)? <= RESIDUAL_TARGET {
            return Ok(state);
        }
        dim *= 2;
    }
    Err(Error::Convergence(format!("coherent state for |beta| = {r} needs more than {MAX_DIM} levels")))
}

/// Ordinary Glauber coherent state, for comparisons.
pub fn glauber_state(beta: C64) -> Result<FockState> {
    build_nlcs(&DeformationFunction::undeformed(), beta)
}

/// Two evaluations of the squared normalization constant 𝒩².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationReport {
    /// |β|^α / I_α^γ(2|β|)
    pub bessel_form: f64,
    /// (Σ |β|^{2n} / (n! (f(n)!)²))^{−1}
    pub direct_sum: f64,
    /// direct_sum / bessel_form
    pub ratio: f64,
}

pub fn nlcs_normalization(f: &DeformationFunction, beta: C64) -> Result<NormalizationReport> {
    let r = beta.norm();
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid("normalization needs beta != 0"));
    }
    let bessel = GeneralizedBessel::new(f.alpha(), f.gamma())?;
    let ln_bessel_form = f.alpha() * r.ln() - bessel.ln_eval(2.0 * r)?;

    let mut dim = INITIAL_DIM;
    let ln_sum = loop {
        let w = ln_weights(f, r, dim);
        let ln_total = log_sum_exp(&w);
        let tail = log_sum_exp(&w[dim - 5..]);
        if tail - ln_total < -60.0 {
            break ln_total;
        }
        dim *= 2;
        if dim > MAX_DIM {
            return Err(Error::Convergence("normalization series did not converge".into()));
        }
    };
    let direct_sum = (-ln_sum).exp();
    let bessel_form = ln_bessel_form.exp();
    Ok(NormalizationReport { bessel_form, direct_sum, ratio: (-ln_sum - ln_bessel_form).exp() })
}

/// One diagonal element of the resolution-of-identity integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityElement {
    pub n: usize,
    /// Order of the K-Bessel factor in the measure, (γ−1)n + α.
    pub order: f64,
    /// Power of √x in the measure, (γ−1)n + 1.
    pub power: f64,
    pub value: f64,
    pub deviation: f64,
}

pub const MAX_IDENTITY_LEVEL: usize = 10;

/// Diagonal elements ⟨n| ∫ d²β w |β⟩⟨β| |n⟩ under the measure
/// w(√x) = (8/π) I_α^γ(2√x) K_m(2√x) (√x)^l, m = (γ−1)n+α, l = (γ−1)n+1.
///
/// The I factors cancel against the normalization, leaving
/// 8/(n! Γ(γn+α+1)) ∫₀^∞ x^{n+α/2+l/2} K_m(2√x) dx, evaluated after the
/// substitution t = 2√x on `panels` pieces of the peak region plus the
/// short-distance piece [0, 1].
pub fn resolution_of_identity_check(
    f: &DeformationFunction,
    n_max: usize,
    panels: usize,
) -> Result<Vec<IdentityElement>> {
    if n_max > MAX_IDENTITY_LEVEL {
        return Err(invalid(format!("n_max must be <= {MAX_IDENTITY_LEVEL}, got {n_max}")));
    }
    if panels == 0 {
        return Err(invalid("need at least one quadrature panel"));
    }
    let (gamma, alpha) = (f.gamma(), f.alpha());
    (0..=n_max)
        .map(|n| {
            let nf = n as f64;
            let order = (gamma - 1.0) * nf + alpha;
            let power = (gamma - 1.0) * nf + 1.0;
            let x_power = nf + 0.5 * alpha + 0.5 * power;
            let t_power = 2.0 * x_power + 1.0;
            let moment = k_moment(order, t_power, panels)?;
            let ln_prefactor = 8f64.ln() - ln_gamma(nf + 1.0) - ln_gamma(gamma * nf + alpha + 1.0) - (2.0 * x_power + 1.0) * 2f64.ln();
            let value = ln_prefactor.exp() * moment;
            Ok(IdentityElement { n, order, power, value, deviation: value - 1.0 })
        })
        .collect()
}

/// ∫₀^∞ t^q K_ν(t) dt by nested adaptive quadrature.
pub fn k_moment(nu: f64, q: f64, panels: usize) -> Result<f64> {
    if q + 1.0 <= nu.abs() {
        return Err(invalid(format!("moment t^{q} K_{nu} is not integrable at 0")));
    }
    let integrand = |t: f64| {
        if t == 0.0 {
            return 0.0;
        }
        bessel_k(nu, t).map(|k| (q * t.ln()).exp() * k).unwrap_or(f64::NAN)
    };
    let peak = q.max(1.0);
    let t_max = peak + 60.0 + 10.0 * peak.sqrt();
    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-11, max_intervals: 2000 };
    let mut total = integrate(integrand, 0.0, 1.0, opts)?.value;
    let width = (t_max - 1.0) / panels as f64;
    for i in 0..panels {
        let lo = 1.0 + i as f64 * width;
        total += integrate(integrand, lo, lo + width, opts)?.value;
    }
    if !total.is_finite() {
        return Err(Error::Quadrature(format!("K-moment diverged (nu = {nu}, q = {q})")));
    }
    Ok(total)
}
