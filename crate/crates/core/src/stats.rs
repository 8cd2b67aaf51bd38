//! Photon statistics and quadrature squeezing of arbitrary Fock states.
//!
//! Moments are always matrix sandwiches ⟨ψ|M|ψ⟩ on the state's dimension
//! plus two padding levels, so ladder products never touch the truncation
//! edge for the represented vector.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::algebra::{build_undeformed_ladder, deform_ladder, DeformationFunction, FockOperator};
use crate::error::{invalid, Result};
use crate::nlcs::{build_nlcs, eigen_residual, FockState};
use crate::spectrum::derive_params;

const PAD: usize = 2;
/// Largest padded dimension handled by the dense moment code.
pub const MAX_MOMENT_DIM: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrature {
    X,
    Y,
}

fn padded(state: &FockState) -> Result<ndarray::Array1<C64>> {
    let psi = state.padded(PAD);
    if psi.len() > MAX_MOMENT_DIM {
        return Err(invalid(format!("state with {} levels exceeds the moment limit {MAX_MOMENT_DIM}", state.dim())));
    }
    Ok(psi)
}

fn real_expectation(op: &FockOperator, psi: &ndarray::Array1<C64>) -> Result<f64> {
    Ok(op.expectation(psi)?.re)
}

/// Mandel parameter ((Δn)² − ⟨n⟩)/⟨n⟩.
pub fn mandel_parameter(state: &FockState) -> Result<f64> {
    let psi = padded(state)?;
    let (_, _, n_op) = build_undeformed_ladder(psi.len())?;
    let n2 = n_op.mul(&n_op)?;
    let mean = real_expectation(&n_op, &psi)?;
    if mean <= 1e-12 {
        return Err(invalid(format!("Mandel parameter undefined for <n> = {mean:e}")));
    }
    let var = real_expectation(&n2, &psi)? - mean * mean;
    Ok((var - mean) / mean)
}

/// X = ½(L e^{iφ} + L† e^{−iφ}), Y = (1/2i)(L e^{iφ} − L† e^{−iφ}) for a
/// lowering operator L and φ in radians.
fn quadrature_operator(lower: &FockOperator, raise: &FockOperator, phi: f64, which: Quadrature) -> Result<FockOperator> {
    let up = C64::from_polar(1.0, phi);
    let down = up.conj();
    let (l, r) = (lower.scale(up), raise.scale(down));
    Ok(match which {
        Quadrature::X => l.add(&r)?.scale(C64::new(0.5, 0.0)),
        Quadrature::Y => l.sub(&r)?.scale(C64::new(0.0, -0.5)),
    })
}

fn variance(op: &FockOperator, psi: &ndarray::Array1<C64>) -> Result<f64> {
    let mean = real_expectation(op, psi)?;
    let sq = real_expectation(&op.mul(op)?, psi)?;
    Ok(sq - mean * mean)
}

/// s_O = 4(ΔO_a)² − 1 for the undeformed quadratures; `phi_deg` in degrees.
pub fn quadrature_squeezing(state: &FockState, phi_deg: f64, which: Quadrature) -> Result<f64> {
    let psi = padded(state)?;
    let (a, a_dag, _) = build_undeformed_ladder(psi.len())?;
    let op = quadrature_operator(&a, &a_dag, phi_deg.to_radians(), which)?;
    Ok(4.0 * variance(&op, &psi)? - 1.0)
}

/// Deformed-quadrature squeezing and the pieces it is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformedSqueezing {
    /// 4(ΔO_A)²
    pub four_variance: f64,
    /// ⟨(n̂+1)f²(n̂+1) − n̂f²(n̂)⟩, i.e. ⟨[A, A†]⟩
    pub commutator_mean: f64,
    /// 4(ΔO_A)² − ⟨(n̂+1)f²(n̂+1)⟩ + ⟨n̂f²(n̂)⟩
    pub s: f64,
}

impl DeformedSqueezing {
    /// Squeezing threshold ⟨[A, A†]⟩/4 on (ΔO_A)².
    pub fn variance_bound(&self) -> f64 {
        0.25 * self.commutator_mean
    }
}

pub fn deformed_squeezing(
    state: &FockState,
    f: &DeformationFunction,
    phi_deg: f64,
    which: Quadrature,
) -> Result<DeformedSqueezing> {
    let psi = padded(state)?;
    let dim = psi.len();
    let (a, _, _) = build_undeformed_ladder(dim)?;
    let (big_a, big_a_dag) = deform_ladder(&a, f)?;
    let op = quadrature_operator(&big_a, &big_a_dag, phi_deg.to_radians(), which)?;
    let four_variance = 4.0 * variance(&op, &psi)?;

    let upper: Vec<f64> = (0..dim as i64).map(|n| (n + 1) as f64 * f.squared(n + 1)).collect();
    let lower: Vec<f64> = (0..dim as i64).map(|n| n as f64 * f.squared(n)).collect();
    let upper_mean = real_expectation(&FockOperator::diagonal(&upper)?, &psi)?;
    let lower_mean = real_expectation(&FockOperator::diagonal(&lower)?, &psi)?;
    Ok(DeformedSqueezing {
        four_variance,
        commutator_mean: upper_mean - lower_mean,
        s: four_variance - upper_mean + lower_mean,
    })
}

/// 4(ΔO_A)² for a deformed quadrature; exposed for sum-rule checks.
pub fn deformed_four_variance(state: &FockState, f: &DeformationFunction, phi_deg: f64, which: Quadrature) -> Result<f64> {
    Ok(deformed_squeezing(state, f, phi_deg, which)?.four_variance)
}

/// Low-order moments of A = a f(n̂): (⟨A⟩, ⟨A²⟩, ⟨A†A⟩, ⟨AA†⟩).
pub fn deformed_moments(state: &FockState, f: &DeformationFunction) -> Result<(C64, C64, f64, f64)> {
    let psi = padded(state)?;
    let (a, _, _) = build_undeformed_ladder(psi.len())?;
    let (big_a, big_a_dag) = deform_ladder(&a, f)?;
    Ok((
        big_a.expectation(&psi)?,
        big_a.mul(&big_a)?.expectation(&psi)?,
        real_expectation(&big_a_dag.mul(&big_a)?, &psi)?,
        real_expectation(&big_a.mul(&big_a_dag)?, &psi)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    AOverL0,
    /// degrees
    Phi,
    BetaSq,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::AOverL0 => "a_over_l0",
            SweepVariable::Phi => "phi_deg",
            SweepVariable::BetaSq => "beta_sq",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    Mandel,
    SX,
    SY,
    SXA,
    SYA,
}

impl Observable {
    pub fn name(&self) -> &'static str {
        match self {
            Observable::Mandel => "mandel",
            Observable::SX => "s_X",
            Observable::SY => "s_Y",
            Observable::SXA => "S_XA",
            Observable::SYA => "S_YA",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Logarithmic,
}

/// Parameters held fixed along a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedParams {
    pub m: f64,
    pub omega: f64,
    pub a_over_l0: f64,
    pub beta_sq: f64,
    pub beta_phase_deg: f64,
    pub phi_deg: f64,
}

impl Default for FixedParams {
    fn default() -> Self {
        Self { m: 1.0, omega: 1.0, a_over_l0: 1.0, beta_sq: 1.0, beta_phase_deg: 0.0, phi_deg: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub spacing: Spacing,
    pub fixed: FixedParams,
    pub observable: Observable,
}

pub const DEFAULT_SWEEP_POINTS: usize = 200;

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(invalid("sweep needs at least one point"));
        }
        if !(self.lo.is_finite() && self.hi.is_finite()) {
            return Err(invalid("sweep range must be finite"));
        }
        if self.count == 1 && self.lo != self.hi {
            return Err(invalid("a single-point sweep needs lo == hi"));
        }
        if self.count >= 2 && self.lo >= self.hi {
            return Err(invalid(format!("sweep range needs lo < hi, got [{}, {}]", self.lo, self.hi)));
        }
        if self.spacing == Spacing::Logarithmic && self.lo <= 0.0 {
            return Err(invalid("logarithmic sweep needs lo > 0"));
        }
        if self.variable == SweepVariable::AOverL0 && self.lo <= 0.0 {
            return Err(invalid("a/l0 must be positive"));
        }
        if self.variable == SweepVariable::BetaSq && self.lo < 0.0 {
            return Err(invalid("|beta|^2 must be non-negative"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let s = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.lo + s * (self.hi - self.lo),
                    Spacing::Logarithmic => (self.lo.ln() + s * (self.hi.ln() - self.lo.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub value: f64,
    /// Truncation dimension of the state.
    pub dim: usize,
    pub residual: f64,
}

/// Observable at one point, with the state it was computed on.
pub fn observe(fixed: &FixedParams, observable: Observable) -> Result<SweepRow> {
    let l0 = 1.0 / (fixed.m * fixed.omega);
    let params = derive_params(fixed.a_over_l0 * l0, fixed.m, fixed.omega)?;
    let f = params.deformation();
    if !(fixed.beta_sq >= 0.0) {
        return Err(invalid("|beta|^2 must be non-negative"));
    }
    let beta = C64::from_polar(fixed.beta_sq.sqrt(), fixed.beta_phase_deg.to_radians());
    let state = build_nlcs(&f, beta)?;
    let value = match observable {
        Observable::Mandel => mandel_parameter(&state)?,
        Observable::SX => quadrature_squeezing(&state, fixed.phi_deg, Quadrature::X)?,
        Observable::SY => quadrature_squeezing(&state, fixed.phi_deg, Quadrature::Y)?,
        Observable::SXA => deformed_squeezing(&state, &f, fixed.phi_deg, Quadrature::X)?.s,
        Observable::SYA => deformed_squeezing(&state, &f, fixed.phi_deg, Quadrature::Y)?.s,
    };
    Ok(SweepRow { x: f64::NAN, value, dim: state.dim(), residual: eigen_residual(&f, &state, beta)? })
}

/// Evaluate the observable on every grid point; rows in grid order.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    spec.grid()
        .into_par_iter()
        .map(|x| {
            let mut fixed = spec.fixed;
            match spec.variable {
                SweepVariable::AOverL0 => fixed.a_over_l0 = x,
                SweepVariable::Phi => fixed.phi_deg = x,
                SweepVariable::BetaSq => fixed.beta_sq = x,
            }
            observe(&fixed, spec.observable).map(|row| SweepRow { x, ..row })
        })
        .collect()
}

/// One curve of a figure: the parameter that distinguishes it and its sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureSeries {
    pub series_name: &'static str,
    pub series_value: f64,
    pub spec: SweepSpec,
}

/// Curves behind figures 1–4 with their default parameter sets.
pub fn figure_series(which: u8, points: usize, base: FixedParams) -> Result<Vec<FigureSeries>> {
    let a_sweep = |observable, fixed| SweepSpec {
        variable: SweepVariable::AOverL0,
        lo: 0.3,
        hi: 10.0,
        count: points,
        spacing: Spacing::Logarithmic,
        fixed,
        observable,
    };
    let series = match which {
        1 => [0.5, 1.0, 1.5]
            .iter()
            .map(|&b| FigureSeries {
                series_name: "beta_sq",
                series_value: b,
                spec: a_sweep(Observable::Mandel, FixedParams { beta_sq: b, ..base }),
            })
            .collect(),
        2 => [0.5, 1.0, 2.5]
            .iter()
            .map(|&a| FigureSeries {
                series_name: "a_over_l0",
                series_value: a,
                spec: SweepSpec {
                    variable: SweepVariable::Phi,
                    lo: 0.0,
                    hi: 360.0,
                    count: points,
                    spacing: Spacing::Linear,
                    fixed: FixedParams { a_over_l0: a, beta_sq: 4.0, ..base },
                    observable: Observable::SX,
                },
            })
            .collect(),
        3 => [90.0, 100.0, 110.0]
            .iter()
            .map(|&phi| FigureSeries {
                series_name: "phi_deg",
                series_value: phi,
                spec: a_sweep(Observable::SX, FixedParams { phi_deg: phi, beta_sq: 1.0, ..base }),
            })
            .collect(),
        4 => [1.0, 1.5, 2.5]
            .iter()
            .map(|&b| FigureSeries {
                series_name: "beta_sq",
                series_value: b,
                spec: a_sweep(Observable::SXA, FixedParams { beta_sq: b, ..base }),
            })
            .collect(),
        _ => return Err(invalid(format!("figure must be 1..=4, got {which}"))),
    };
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlcs::glauber_state;

    #[test]
    fn number_state_mandel() {
        let s = FockState::number_state(3, 8).unwrap();
        assert!((mandel_parameter(&s).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn vacuum_has_no_mandel_parameter() {
        assert!(mandel_parameter(&FockState::vacuum(4).unwrap()).is_err());
    }

    #[test]
    fn coherent_state_is_poissonian_and_unsqueezed() {
        let s = glauber_state(C64::new(1.3, -0.4)).unwrap();
        assert!(mandel_parameter(&s).unwrap().abs() < 1e-10);
        for phi in [0.0, 33.0, 90.0, 271.0] {
            assert!(quadrature_squeezing(&s, phi, Quadrature::X).unwrap().abs() < 1e-10);
            assert!(quadrature_squeezing(&s, phi, Quadrature::Y).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn vacuum_quadratures() {
        let s = FockState::vacuum(3).unwrap();
        for phi in [0.0, 45.0, 123.0] {
            assert!(quadrature_squeezing(&s, phi, Quadrature::X).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn deformed_squeezing_reduces_on_coherent_state() {
        let f = DeformationFunction::undeformed();
        let s = glauber_state(C64::new(0.8, 0.6)).unwrap();
        let d = deformed_squeezing(&s, &f, 30.0, Quadrature::X).unwrap();
        assert!(d.s.abs() < 1e-10);
        assert!((d.commutator_mean - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_grid_and_validation() {
        let spec = SweepSpec {
            variable: SweepVariable::Phi,
            lo: 0.0,
            hi: 90.0,
            count: 4,
            spacing: Spacing::Linear,
            fixed: FixedParams::default(),
            observable: Observable::SX,
        };
        assert_eq!(spec.grid(), vec![0.0, 30.0, 60.0, 90.0]);
        let log = SweepSpec { variable: SweepVariable::AOverL0, lo: 1.0, hi: 100.0, count: 3, spacing: Spacing::Logarithmic, ..spec.clone() };
        let g = log.grid();
        assert!((g[1] - 10.0).abs() < 1e-12);

        assert!(SweepSpec { lo: 5.0, hi: 1.0, ..spec.clone() }.validate().is_err());
        assert!(SweepSpec { count: 0, ..spec.clone() }.validate().is_err());
        assert!(SweepSpec { variable: SweepVariable::AOverL0, lo: 0.0, ..spec.clone() }.validate().is_err());
        assert!(SweepSpec { count: 1, lo: 3.0, hi: 3.0, ..spec }.validate().is_ok());
    }

    #[test]
    fn single_point_sweep_equals_direct_call() {
        let fixed = FixedParams { a_over_l0: 1.7, beta_sq: 1.2, phi_deg: 20.0, ..FixedParams::default() };
        let spec = SweepSpec {
            variable: SweepVariable::AOverL0,
            lo: 1.7,
            hi: 1.7,
            count: 1,
            spacing: Spacing::Linear,
            fixed,
            observable: Observable::SX,
        };
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 1);
        let direct = observe(&fixed, Observable::SX).unwrap();
        assert_eq!(rows[0].value, direct.value);
        assert_eq!(rows[0].x, 1.7);
    }

    #[test]
    fn figure_definitions() {
        for which in 1..=4 {
            let s = figure_series(which, 10, FixedParams::default()).unwrap();
            assert_eq!(s.len(), 3);
        }
        assert!(figure_series(5, 10, FixedParams::default()).is_err());
        let f2 = figure_series(2, 10, FixedParams::default()).unwrap();
        assert_eq!(f2.iter().map(|s| s.series_value).collect::<Vec<_>>(), vec![0.5, 1.0, 2.5]);
        assert_eq!(f2[0].spec.fixed.beta_sq, 4.0);
    }
}
