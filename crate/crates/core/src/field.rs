//! Field quantization in the well with deformed mode amplitudes.
//!
//! Each mode carries its own truncated Fock space. The pair (B, B†) with
//! B = a f(n̂) breaks the canonical field commutator; the dual pair
//! (B, B†_f = f(n̂)⁻¹ a†) restores it, at the price of a deformed scalar
//! product ⟨φ, ψ⟩_f = ⟨φ, Fψ⟩ under which B and B†_f are adjoint.
//!
//! The formally infinite product in F terminates because f is taken to be
//! 1 on negative arguments: F(n) = Π_{j=0}^n f²(j) = α (f(n)!)².

use std::f64::consts::PI;

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::algebra::{build_undeformed_ladder, DeformationFunction, FockOperator};
use crate::error::{invalid, Error, Result};
use crate::nlcs::ln_f_factorial;

/// One field mode of the well: sine mode function on (−a, a).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldMode {
    pub k_index: usize,
    pub omega_k: f64,
    /// 1 or 2
    pub polarization: u8,
    pub fock_dim: usize,
    pub half_width: f64,
}

impl FieldMode {
    /// Mode `k_index` ≥ 1 of a well of half-width `half_width` (c = 1):
    /// u_k(x) = a^{−1/2} sin(kπ(x + a)/(2a)), ω_k = kπ/(2a).
    pub fn sine(k_index: usize, half_width: f64, polarization: u8, fock_dim: usize) -> Result<Self> {
        if k_index == 0 {
            return Err(invalid("mode index starts at 1"));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(invalid(format!("half-width must be positive, got {half_width}")));
        }
        if !(1..=2).contains(&polarization) {
            return Err(invalid(format!("polarization must be 1 or 2, got {polarization}")));
        }
        if fock_dim < 4 {
            return Err(invalid(format!("mode Fock dimension must be >= 4, got {fock_dim}")));
        }
        let omega_k = k_index as f64 * PI / (2.0 * half_width);
        Ok(Self { k_index, omega_k, polarization, fock_dim, half_width })
    }

    /// Same mode with an explicit frequency.
    pub fn with_frequency(mut self, omega_k: f64) -> Result<Self> {
        if !(omega_k > 0.0 && omega_k.is_finite()) {
            return Err(invalid(format!("mode frequency must be positive, got {omega_k}")));
        }
        self.omega_k = omega_k;
        Ok(self)
    }

    pub fn mode_function(&self, x: f64) -> f64 {
        let a = self.half_width;
        if x.abs() > a {
            return 0.0;
        }
        (self.k_index as f64 * PI * (x + a) / (2.0 * a)).sin() / a.sqrt()
    }
}

/// Finite set of modes sharing a deformation and a quantization volume.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeRegistry {
    pub modes: Vec<FieldMode>,
    pub deformation: DeformationFunction,
    /// Quantization volume; the well length times unit transverse area by default.
    pub volume: f64,
}

pub const MAX_MODES: usize = 32;

impl ModeRegistry {
    /// Modes k = 1..=count of one polarization in a well of half-width `a`.
    pub fn sine_modes(count: usize, half_width: f64, fock_dim: usize, deformation: DeformationFunction) -> Result<Self> {
        let modes = (1..=count).map(|k| FieldMode::sine(k, half_width, 1, fock_dim)).collect::<Result<Vec<_>>>()?;
        Ok(Self { modes, deformation, volume: 2.0 * half_width })
    }

    /// max |⟨u_k, u_k'⟩ − δ_kk'| on a uniform grid of `cells` cells.
    pub fn orthonormality_defect(&self, cells: usize) -> f64 {
        let Some(first) = self.modes.first() else { return 0.0 };
        let a = first.half_width;
        let h = 2.0 * a / cells as f64;
        let nodes: Vec<f64> = (1..cells).map(|j| -a + j as f64 * h).collect();
        let mut worst = 0.0f64;
        for (i, mi) in self.modes.iter().enumerate() {
            for mj in &self.modes[i..] {
                let ip: f64 = nodes.iter().map(|&x| mi.mode_function(x) * mj.mode_function(x)).sum::<f64>() * h;
                let target = if mi.k_index == mj.k_index { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).abs());
            }
        }
        worst
    }
}

/// B = a f(n̂) and its dual partner B†_f = f(n̂)⁻¹ a†.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformedPair {
    pub b: FockOperator,
    pub b_dual_dagger: FockOperator,
    pub f: DeformationFunction,
}

pub fn build_dual_pair(f: &DeformationFunction, dim: usize) -> Result<DeformedPair> {
    let (a, a_dag, _) = build_undeformed_ladder(dim)?;
    let f_diag: Vec<f64> = (0..dim as i64).map(|n| f.eval(n)).collect();
    let inv_diag: Vec<f64> = f_diag.iter().map(|v| 1.0 / v).collect();
    let b = a.mul(&FockOperator::diagonal(&f_diag)?)?;
    let b_dual_dagger = FockOperator::diagonal(&inv_diag)?.mul(&a_dag)?;
    Ok(DeformedPair { b, b_dual_dagger, f: *f })
}

impl DeformedPair {
    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    /// Ordinary adjoint B†.
    pub fn b_dagger(&self) -> FockOperator {
        self.b.dagger()
    }

    /// max |B†_f − F⁻¹ B† F|
    pub fn adjoint_formula_defect(&self, metric: &MetricOperator) -> Result<f64> {
        let transported = metric.f_inverse_operator()?.mul(&self.b_dagger())?.mul(&metric.f_operator()?)?;
        self.b_dual_dagger.max_abs_diff(&transported)
    }
}

/// Logarithm of a possibly huge positive scale factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScale {
    pub ln_value: f64,
}

impl LogScale {
    /// Value, or +∞ if it leaves double range.
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }

    pub fn overflows(&self) -> bool {
        !self.value().is_finite()
    }

    pub fn log10(&self) -> f64 {
        self.ln_value / std::f64::consts::LN_10
    }
}

/// ln F(n) = ln α + 2 ln f(n)!
fn ln_metric(f: &DeformationFunction, n: usize) -> f64 {
    f.squared(0).ln() + 2.0 * ln_f_factorial(f, n)
}

/// Diagonal metric F and its square root T on a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricOperator {
    pub f_diag: Vec<f64>,
    pub t_diag: Vec<f64>,
}

impl MetricOperator {
    pub fn new(f: &DeformationFunction, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(invalid(format!("Fock dimension must be >= 2, got {dim}")));
        }
        let ln_f: Vec<f64> = (0..dim).map(|n| ln_metric(f, n)).collect();
        if let Some(n) = ln_f.iter().position(|v| !v.exp().is_finite()) {
            return Err(Error::Convergence(format!("metric F({n}) overflows double range")));
        }
        Ok(Self {
            f_diag: ln_f.iter().map(|v| v.exp()).collect(),
            t_diag: ln_f.iter().map(|v| (0.5 * v).exp()).collect(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self { f_diag: vec![1.0; dim], t_diag: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.f_diag.len()
    }

    pub fn f_operator(&self) -> Result<FockOperator> {
        FockOperator::diagonal(&self.f_diag)
    }

    pub fn f_inverse_operator(&self) -> Result<FockOperator> {
        FockOperator::diagonal(&self.f_diag.iter().map(|v| 1.0 / v).collect::<Vec<_>>())
    }

    pub fn t_operator(&self) -> Result<FockOperator> {
        FockOperator::diagonal(&self.t_diag)
    }

    pub fn t_inverse_operator(&self) -> Result<FockOperator> {
        FockOperator::diagonal(&self.t_diag.iter().map(|v| 1.0 / v).collect::<Vec<_>>())
    }

    /// T⁻¹ M T
    pub fn transport(&self, op: &FockOperator) -> Result<FockOperator> {
        self.t_inverse_operator()?.mul(op)?.mul(&self.t_operator()?)
    }
}

/// ⟨ψ, Fφ⟩ (antilinear in ψ).
pub fn deformed_inner_product(psi: &Array1<C64>, phi: &Array1<C64>, metric: &MetricOperator) -> Result<C64> {
    if psi.len() != phi.len() {
        return Err(Error::DimensionMismatch { left: psi.len(), right: phi.len() });
    }
    if psi.len() != metric.dim() {
        return Err(Error::DimensionMismatch { left: psi.len(), right: metric.dim() });
    }
    Ok(psi.iter().zip(phi.iter()).zip(&metric.f_diag).map(|((p, q), w)| p.conj() * q * *w).sum())
}

/// F-norm squared ⟨ψ, Fψ⟩.
pub fn deformed_norm_sqr(psi: &Array1<C64>, metric: &MetricOperator) -> Result<f64> {
    Ok(deformed_inner_product(psi, psi, metric)?.re)
}

/// D′_F / D_F = F(0) = α.
pub fn propagator_scale(f: &DeformationFunction) -> f64 {
    ln_metric(f, 0).exp()
}

/// S′_fi / S_fi = F(n) = Π_{j=0}^n f²(j), in log form.
pub fn smatrix_scale(f: &DeformationFunction, n: usize) -> LogScale {
    LogScale { ln_value: ln_metric(f, n) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Amplitudes {
    /// a, a†
    Undeformed,
    /// B, B†
    Deformed,
    /// B, B†_f
    Dual,
}

/// [A_k(r), E_k(r′)] for one mode as a matrix on its Fock space.
fn mode_commutator(mode: &FieldMode, f: &DeformationFunction, volume: f64, kind: Amplitudes, r: f64, rp: f64) -> Result<FockOperator> {
    let (lower, raise) = match kind {
        Amplitudes::Undeformed => {
            let (a, a_dag, _) = build_undeformed_ladder(mode.fock_dim)?;
            (a, a_dag)
        }
        Amplitudes::Deformed => {
            let pair = build_dual_pair(f, mode.fock_dim)?;
            let b_dag = pair.b_dagger();
            (pair.b, b_dag)
        }
        Amplitudes::Dual => {
            let pair = build_dual_pair(f, mode.fock_dim)?;
            (pair.b, pair.b_dual_dagger)
        }
    };
    let c = 1.0 / (2.0 * volume * mode.omega_k).sqrt();
    let (u, up) = (C64::new(mode.mode_function(r), 0.0), C64::new(mode.mode_function(rp), 0.0));
    let field = lower.scale(u * c).add(&raise.scale(u.conj() * c))?;
    let momentum_factor = C64::new(0.0, mode.omega_k) * c;
    let momentum = lower.scale(up * momentum_factor).sub(&raise.scale(up.conj() * momentum_factor))?;
    field.commutator(&momentum)
}

/// Field-commutator comparison at one pair of positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCommutator {
    pub r: f64,
    pub r_prime: f64,
    /// −i Σ_k (1/2V)(u_k(r)u_k*(r′) + c.c.), the undeformed c-number.
    pub delta_partial_sum: C64,
    /// Same quantity from the dual amplitudes (B, B†_f), read on the vacuum.
    pub dual_value: C64,
    /// max over modes and interior levels of |dual − undeformed| entries.
    pub dual_deviation: f64,
    /// max over modes and interior levels of |[A_k, E_k]_{nn} + i w_k h(n)|
    /// for the (B, B†) amplitudes, h(n) = γ(2n+1) + α.
    pub deformed_operator_deviation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommutatorReport {
    pub pairs: Vec<PairCommutator>,
    /// Sum over modes of the worst per-mode dual deviation: bounds the
    /// deviation on any interior product state.
    pub max_dual_deviation: f64,
    pub max_deformed_operator_deviation: f64,
    /// Largest off-diagonal entry of any per-mode commutator (interior block).
    pub max_off_diagonal: f64,
}

/// Compare the equal-time field commutator for the three amplitude choices.
pub fn field_commutator_check(registry: &ModeRegistry, positions: &[(f64, f64)]) -> Result<CommutatorReport> {
    if registry.modes.is_empty() {
        return Err(invalid("registry has no modes"));
    }
    if registry.modes.len() > MAX_MODES {
        return Err(invalid(format!("at most {MAX_MODES} modes, got {}", registry.modes.len())));
    }
    let f = &registry.deformation;
    let mut pairs = Vec::with_capacity(positions.len());
    let mut max_off = 0.0f64;
    let mut max_dual = 0.0f64;
    let mut max_deformed = 0.0f64;

    for &(r, rp) in positions {
        let mut delta = C64::new(0.0, 0.0);
        let mut dual_value = C64::new(0.0, 0.0);
        let mut dual_dev_sum = 0.0;
        let mut dual_dev_max = 0.0f64;
        let mut deformed_dev = 0.0f64;
        for mode in &registry.modes {
            let interior = mode.fock_dim - 1;
            let plain = mode_commutator(mode, f, registry.volume, Amplitudes::Undeformed, r, rp)?;
            let dual = mode_commutator(mode, f, registry.volume, Amplitudes::Dual, r, rp)?;
            let deformed = mode_commutator(mode, f, registry.volume, Amplitudes::Deformed, r, rp)?;

            let weight = (mode.mode_function(r) * mode.mode_function(rp) * 2.0) / (2.0 * registry.volume);
            delta += plain.get(0, 0);
            dual_value += dual.get(0, 0);
            let mut mode_dev = 0.0f64;
            for i in 0..interior {
                for j in 0..interior {
                    if i == j {
                        mode_dev = mode_dev.max((dual.get(i, i) - plain.get(i, i)).norm());
                        let expected = C64::new(0.0, -weight * f.commutator_value(i));
                        deformed_dev = deformed_dev.max((deformed.get(i, i) - expected).norm());
                    } else {
                        for op in [&plain, &dual, &deformed] {
                            max_off = max_off.max(op.get(i, j).norm());
                        }
                    }
                }
            }
            dual_dev_sum += mode_dev;
            dual_dev_max = dual_dev_max.max(mode_dev);
        }
        max_dual = max_dual.max(dual_dev_sum);
        max_deformed = max_deformed.max(deformed_dev);
        pairs.push(PairCommutator {
            r,
            r_prime: rp,
            delta_partial_sum: delta,
            dual_value,
            dual_deviation: dual_dev_max,
            deformed_operator_deviation: deformed_dev,
        });
    }
    Ok(CommutatorReport {
        pairs,
        max_dual_deviation: max_dual,
        max_deformed_operator_deviation: max_deformed,
        max_off_diagonal: max_off,
    })
}

/// ω B†_f B for one mode.
pub fn mode_hamiltonian(pair: &DeformedPair, omega: f64) -> Result<FockOperator> {
    Ok(pair.b_dual_dagger.mul(&pair.b)?.scale(C64::new(omega, 0.0)))
}

/// One row of the scaling-factor report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleRow {
    pub n: usize,
    pub smatrix: LogScale,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleReport {
    pub a: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub propagator: f64,
    pub rows: Vec<ScaleRow>,
}

pub fn scale_report(a: f64, f: &DeformationFunction, n_max: usize) -> ScaleReport {
    ScaleReport {
        a,
        gamma: f.gamma(),
        alpha: f.alpha(),
        propagator: propagator_scale(f),
        rows: (0..=n_max).map(|n| ScaleRow { n, smatrix: smatrix_scale(f, n) }).collect(),
    }
}
