//! Coherent-state generation by a classical current in the well.
//!
//! A current projected onto mode k, j′(k, t), displaces the mode by
//!
//! ```text
//! β(k, t) = −i/√(2Vω_k) ∫_{−∞}^t j′*(k, t′) e^{iω_k t′} dt′
//! ```
//!
//! Starting from the vacuum, the mode should end in the nonlinear coherent
//! state |β⟩_f. [`evolve_mode`] checks this by integrating the Schrödinger
//! equation under H(t) = ω_k B†_f B + (B j′ + B†_f j′*)/√(2Vω_k) and
//! comparing with the state built directly from β.

use ndarray::Array1;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::algebra::DeformationFunction;
use crate::error::{invalid, Error, Result};
use crate::field::{build_dual_pair, deformed_norm_sqr, FieldMode, MetricOperator, ModeRegistry};
use crate::nlcs::{nlcs_fixed_dim, FockState, TAIL_CONTRACT};
use crate::ode::{self, StepperOptions};
use crate::quadrature::{integrate_complex, QuadOptions};

/// Sampled j′(t) with linear interpolation, zero outside the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<C64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch { left: times.len(), right: values.len() });
        }
        if times.len() < 2 {
            return Err(invalid("time series needs at least two samples"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
            return Err(invalid("sample times must be finite and strictly increasing"));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(invalid("current samples must be finite"));
        }
        Ok(Self { times, values })
    }

    pub fn value(&self, t: f64) -> C64 {
        let (first, last) = (self.times[0], *self.times.last().expect("non-empty"));
        if t < first || t > last {
            return C64::new(0.0, 0.0);
        }
        let i = self.times.partition_point(|&s| s <= t).clamp(1, self.times.len() - 1);
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = (t - t0) / (t1 - t0);
        self.values[i - 1] * (1.0 - w) + self.values[i] * w
    }

    pub fn window(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().expect("non-empty"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurrentProfile {
    /// Charge `charge` crossing the well at speed `velocity` along the
    /// axis: j′(k, t) = e v u_k(vt) while |vt| < a.
    PointCharge { charge: f64, velocity: f64, half_width: f64 },
    /// j′(k, t) = J₀ on [0, T].
    Rectangular { amplitude: C64, duration: f64 },
    /// j′(k, t) = J₀ e^{iω_k t} on [0, T]: the integrand for β is constant.
    Resonant { amplitude: C64, duration: f64 },
    /// Per-mode samples keyed by mode index; modes without an entry are undriven.
    Tabulated(Vec<(usize, TimeSeries)>),
}

impl CurrentProfile {
    pub fn validate(&self) -> Result<()> {
        match self {
            CurrentProfile::PointCharge { charge, velocity, half_width } => {
                if !charge.is_finite() {
                    return Err(invalid("charge must be finite"));
                }
                if !(*velocity > 0.0 && velocity.is_finite()) {
                    return Err(invalid(format!("velocity must be positive, got {velocity}")));
                }
                if !(*half_width > 0.0 && half_width.is_finite()) {
                    return Err(invalid(format!("half-width must be positive, got {half_width}")));
                }
            }
            CurrentProfile::Rectangular { amplitude, duration } | CurrentProfile::Resonant { amplitude, duration } => {
                if !(amplitude.re.is_finite() && amplitude.im.is_finite()) {
                    return Err(invalid("current amplitude must be finite"));
                }
                if !(*duration > 0.0 && duration.is_finite()) {
                    return Err(invalid(format!("duration must be positive, got {duration}")));
                }
            }
            CurrentProfile::Tabulated(_) => {}
        }
        Ok(())
    }

    /// j′(k, t)
    pub fn value(&self, mode: &FieldMode, t: f64) -> C64 {
        let (t0, t1) = self.window(mode);
        if t < t0 || t > t1 {
            return C64::new(0.0, 0.0);
        }
        match self {
            CurrentProfile::PointCharge { charge, velocity, .. } => {
                C64::new(charge * velocity * mode.mode_function(velocity * t), 0.0)
            }
            CurrentProfile::Rectangular { amplitude, .. } => *amplitude,
            CurrentProfile::Resonant { amplitude, .. } => amplitude * C64::from_polar(1.0, mode.omega_k * t),
            CurrentProfile::Tabulated(series) => {
                series.iter().find(|(k, _)| *k == mode.k_index).map_or(C64::new(0.0, 0.0), |(_, s)| s.value(t))
            }
        }
    }

    /// Support [t₀, t₁] of j′(k, ·).
    pub fn window(&self, mode: &FieldMode) -> (f64, f64) {
        match self {
            CurrentProfile::PointCharge { velocity, half_width, .. } => (-half_width / velocity, half_width / velocity),
            CurrentProfile::Rectangular { duration, .. } | CurrentProfile::Resonant { duration, .. } => (0.0, *duration),
            CurrentProfile::Tabulated(series) => series
                .iter()
                .find(|(k, _)| *k == mode.k_index)
                .map_or((0.0, 0.0), |(_, s)| s.window()),
        }
    }

    /// Points inside the window where j′ may have a kink.
    fn breakpoints(&self, mode: &FieldMode) -> Vec<f64> {
        let (t0, t1) = self.window(mode);
        let mut pts = vec![t0];
        if let CurrentProfile::Tabulated(series) = self {
            if let Some((_, s)) = series.iter().find(|(k, _)| *k == mode.k_index) {
                pts.extend(s.times.iter().copied().filter(|&t| t > t0 && t < t1));
            }
        }
        pts.push(t1);
        pts
    }

    /// Typical magnitude of j′, used to make quadrature tolerances scale-free.
    fn magnitude(&self, mode: &FieldMode) -> f64 {
        match self {
            CurrentProfile::PointCharge { charge, velocity, half_width } => (charge * velocity).abs() / half_width.sqrt(),
            CurrentProfile::Rectangular { amplitude, .. } | CurrentProfile::Resonant { amplitude, .. } => amplitude.norm(),
            CurrentProfile::Tabulated(series) => series
                .iter()
                .find(|(k, _)| *k == mode.k_index)
                .map_or(0.0, |(_, s)| s.values.iter().fold(0.0, |m, v| m.max(v.norm()))),
        }
    }
}

/// Absolute quadrature tolerance, in units of the current's magnitude.
pub const BETA_QUAD_TOL: f64 = 1e-10;

/// β(k, t) by adaptive quadrature over the part of the window before `t`.
pub fn displacement_amplitude(mode: &FieldMode, current: &CurrentProfile, volume: f64, t: f64) -> Result<C64> {
    current.validate()?;
    if !(volume > 0.0 && volume.is_finite()) {
        return Err(invalid(format!("volume must be positive, got {volume}")));
    }
    let scale = current.magnitude(mode);
    let (t0, _) = current.window(mode);
    if t <= t0 || scale == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let omega = mode.omega_k;
    let integrand = |s: f64| (current.value(mode, s) / scale).conj() * C64::from_polar(1.0, omega * s);
    let opts = QuadOptions { abs_tol: BETA_QUAD_TOL, rel_tol: 1e-13, max_intervals: 10_000 };
    let pts = current.breakpoints(mode);
    let mut integral = C64::new(0.0, 0.0);
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1].min(t));
        if hi <= lo {
            break;
        }
        integral += integrate_complex(integrand, lo, hi, opts)?.value;
    }
    Ok(C64::new(0.0, -1.0) * integral * scale / (2.0 * volume * omega).sqrt())
}

/// Result of driving one mode from the vacuum.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveResult {
    pub k_index: usize,
    pub beta: C64,
    /// |β⟩_f built from the coefficients βⁿ/(√n! f(n)!) at the mode's dimension.
    pub closed_form: FockState,
    /// Integrated state in the interaction picture, normalized.
    pub evolved: FockState,
    /// |⟨closed_form|evolved⟩|, in [0, 1].
    pub fidelity: f64,
    /// max over accepted steps of |⟨ψ,Fψ⟩/⟨ψ₀,Fψ₀⟩ − 1|
    pub norm_drift: f64,
    /// Ordinary norm ⟨ψ|ψ⟩ of the integrated state before normalization.
    pub plain_norm_sqr: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct DriveOptions {
    pub stepper: StepperOptions,
}

impl Default for DriveOptions {
    fn default() -> Self {
        Self { stepper: StepperOptions { rel_tol: 1e-12, abs_tol: 1e-14, ..StepperOptions::default() } }
    }
}

/// Drive `mode` from the vacuum up to `t_final` and compare both routes.
pub fn evolve_mode(
    mode: &FieldMode,
    current: &CurrentProfile,
    f: &DeformationFunction,
    volume: f64,
    t_final: f64,
    opts: DriveOptions,
) -> Result<DriveResult> {
    let dim = mode.fock_dim;
    let beta = displacement_amplitude(mode, current, volume, t_final)?;
    let closed_form = nlcs_fixed_dim(f, beta, dim)?;
    if closed_form.tail_mass() > TAIL_CONTRACT {
        return Err(Error::TruncationOverflow { dim, tail_mass: closed_form.tail_mass() });
    }

    let pair = build_dual_pair(f, dim)?;
    let metric = MetricOperator::new(f, dim)?;
    let omega = mode.omega_k;
    let coupling = 1.0 / (2.0 * volume * omega).sqrt();
    // B†_f B = n̂, so the free part is diagonal.
    let b = pair.b.matrix().clone();
    let b_dual = pair.b_dual_dagger.matrix().clone();
    let rhs = |t: f64, psi: &Array1<C64>| -> Array1<C64> {
        let j = current.value(mode, t) * coupling;
        let mut out = b.dot(psi) * j + b_dual.dot(psi) * j.conj();
        for (n, (o, p)) in out.iter_mut().zip(psi.iter()).enumerate() {
            *o += p * (omega * n as f64);
        }
        out.mapv(|z| z * C64::new(0.0, -1.0))
    };

    let mut psi = Array1::<C64>::zeros(dim);
    psi[0] = C64::new(1.0, 0.0);
    let initial_norm = deformed_norm_sqr(&psi, &metric)?;
    let mut norm_drift = 0.0f64;
    let mut steps = 0;

    let (t0, t1) = current.window(mode);
    let mut t = t0;
    if t_final > t0 {
        let stop = t_final.min(t1);
        let mut pts: Vec<f64> = current.breakpoints(mode).into_iter().filter(|&p| p > t0 && p < stop).collect();
        pts.push(stop);
        for &p in &pts {
            let (next, stats) = ode::integrate(&rhs, t, p, psi, opts.stepper, |_, y| {
                if let Ok(n) = deformed_norm_sqr(y, &metric) {
                    norm_drift = norm_drift.max((n / initial_norm - 1.0).abs());
                }
            })?;
            psi = next;
            steps += stats.accepted;
            t = p;
        }
    }
    // Undriven evolution to t_final, then to the interaction picture:
    // overall factor e^{iωn t_final} on top of e^{−iωn (t_final − t)}.
    let t_end = t_final.max(t);
    for (n, c) in psi.iter_mut().enumerate() {
        *c *= C64::from_polar(1.0, omega * n as f64 * (t_end - (t_end - t)));
    }
    let plain_norm_sqr = psi.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let evolved = FockState::from_coefficients(psi, Some(beta))?;
    if evolved.tail_mass() > TAIL_CONTRACT {
        return Err(Error::TruncationOverflow { dim, tail_mass: evolved.tail_mass() });
    }
    let fidelity = closed_form.overlap(&evolved).norm().min(1.0);
    Ok(DriveResult {
        k_index: mode.k_index,
        beta,
        closed_form,
        evolved,
        fidelity,
        norm_drift,
        plain_norm_sqr,
        steps,
    })
}

/// Drive every mode of `registry` independently.
pub fn evolve_modes(
    registry: &ModeRegistry,
    current: &CurrentProfile,
    t_final: f64,
    opts: DriveOptions,
) -> Result<Vec<DriveResult>> {
    registry
        .modes
        .par_iter()
        .map(|mode| evolve_mode(mode, current, &registry.deformation, registry.volume, t_final, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode(dim: usize) -> FieldMode {
        FieldMode::sine(1, 1.0, 1, dim).unwrap()
    }

    #[test]
    fn zero_current_gives_vacuum() {
        let m = mode(16);
        let cur = CurrentProfile::Rectangular { amplitude: C64::new(0.0, 0.0), duration: 2.0 };
        assert_eq!(displacement_amplitude(&m, &cur, 2.0, 1.5).unwrap(), C64::new(0.0, 0.0));
        let g = 0.4;
        let f = DeformationFunction::new(g, g.hypot(1.0)).unwrap();
        let r = evolve_mode(&m, &cur, &f, 2.0, 1.5, DriveOptions::default()).unwrap();
        assert!((r.fidelity - 1.0).abs() < 1e-15);
        assert_eq!(r.evolved.coefficients()[0].norm(), 1.0);
    }

    #[test]
    fn beta_vanishes_before_window() {
        let m = mode(16);
        let cur = CurrentProfile::PointCharge { charge: 1.0, velocity: 0.5, half_width: 1.0 };
        assert_eq!(displacement_amplitude(&m, &cur, 2.0, -2.0).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(displacement_amplitude(&m, &cur, 2.0, -2.5).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn time_series_interpolation() {
        let s = TimeSeries::new(vec![0.0, 1.0, 3.0], vec![C64::new(0.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 4.0)]).unwrap();
        assert_eq!(s.value(0.5), C64::new(1.0, 0.0));
        assert_eq!(s.value(2.0), C64::new(1.0, 2.0));
        assert_eq!(s.value(3.5), C64::new(0.0, 0.0));
        assert!(TimeSeries::new(vec![0.0, 0.0], vec![C64::default(); 2]).is_err());
        assert!(TimeSeries::new(vec![0.0], vec![C64::default()]).is_err());
    }

    #[test]
    fn profile_validation() {
        let m = mode(8);
        let bad = CurrentProfile::Rectangular { amplitude: C64::new(1.0, 0.0), duration: -1.0 };
        assert!(displacement_amplitude(&m, &bad, 2.0, 1.0).is_err());
        let bad = CurrentProfile::PointCharge { charge: 1.0, velocity: 0.0, half_width: 1.0 };
        assert!(bad.validate().is_err());
        let ok = CurrentProfile::Resonant { amplitude: C64::new(1.0, 0.0), duration: 1.0 };
        assert!(displacement_amplitude(&m, &ok, 0.0, 1.0).is_err());
    }

    #[test]
    fn truncation_overflow() {
        let m = mode(8);
        let cur = CurrentProfile::Resonant { amplitude: C64::new(10.0, 0.0), duration: 3.0 };
        let r = evolve_mode(&m, &cur, &DeformationFunction::undeformed(), 2.0, 3.0, DriveOptions::default());
        assert!(matches!(r, Err(Error::TruncationOverflow { .. })));
    }
}
