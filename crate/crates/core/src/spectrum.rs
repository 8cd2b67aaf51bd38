//! Spectrum of a harmonic oscillator confined to the well (−a, a).
//!
//! Two routes to the same levels:
//! * the closed form for the tan² model potential, and
//! * a finite-difference eigensolver (symmetric tridiagonal, Sturm-sequence
//!   bisection) with Richardson extrapolation over grids h and h/2, for
//!   both the tan² potential and the hard-walled oscillator.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::algebra::DeformationFunction;
use crate::error::{invalid, Error, Result};

/// Physical inputs and the deformation parameters derived from them (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformationParams {
    pub a: f64,
    pub m: f64,
    pub omega: f64,
    /// π² / (8 a² m), energy units
    pub gamma_prime: f64,
    /// γ′ / ω
    pub gamma: f64,
    /// √(γ² + 1)
    pub alpha: f64,
    /// 1 / (m ω)
    pub l0: f64,
}

pub fn derive_params(a: f64, m: f64, omega: f64) -> Result<DeformationParams> {
    for (name, v) in [("a", a), ("m", m), ("omega", omega)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("{name} must be positive and finite, got {v}")));
        }
    }
    let gamma_prime = PI * PI / (8.0 * a * a * m);
    let gamma = gamma_prime / omega;
    Ok(DeformationParams {
        a,
        m,
        omega,
        gamma_prime,
        gamma,
        alpha: gamma.hypot(1.0),
        l0: 1.0 / (m * omega),
    })
}

impl DeformationParams {
    pub fn deformation(&self) -> DeformationFunction {
        DeformationFunction::new(self.gamma, self.alpha).expect("derived parameters satisfy gamma >= 0, alpha >= 1")
    }
}

/// E_n = γ′(n+½)² + √(γ′²+ω²)(n+½) + γ′/4
pub fn energy_analytic(params: &DeformationParams, n: usize) -> f64 {
    let l = n as f64 + 0.5;
    let gp = params.gamma_prime;
    gp * l * l + gp.hypot(params.omega) * l + 0.25 * gp
}

/// E_l / ω = γl² + αl + γ/4 with l = n + ½.
pub fn energy_rescaled(params: &DeformationParams, n: usize) -> f64 {
    let l = n as f64 + 0.5;
    params.gamma * l * l + params.alpha * l + 0.25 * params.gamma
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PotentialKind {
    /// ½k (tan(δx)/δ)², δ = π/(2a)
    ModelTan,
    /// ½k x² inside hard walls at ±a
    HardWallHo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub a: f64,
    pub k: f64,
    pub m: f64,
}

/// Potential values above this are clamped.
pub const POTENTIAL_CLAMP: f64 = 1e12;

impl PotentialSpec {
    pub fn new(kind: PotentialKind, a: f64, k: f64, m: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(invalid(format!("half-width must be positive, got {a}")));
        }
        if !(k >= 0.0 && k.is_finite()) {
            return Err(invalid(format!("spring constant must be >= 0, got {k}")));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(invalid(format!("mass must be positive, got {m}")));
        }
        Ok(Self { kind, a, k, m })
    }

    pub fn value(&self, x: f64) -> f64 {
        let v = match self.kind {
            PotentialKind::HardWallHo => 0.5 * self.k * x * x,
            PotentialKind::ModelTan => {
                let delta = PI / (2.0 * self.a);
                let t = (delta * x).tan() / delta;
                0.5 * self.k * t * t
            }
        };
        if v.is_finite() { v.min(POTENTIAL_CLAMP) } else { POTENTIAL_CLAMP }
    }

    /// Half-width of the computational box. For wells much wider than the
    /// oscillator length the walls are moved in to where the lowest
    /// `n_levels` states are negligible; both potentials exceed ½kx² there.
    pub fn effective_half_width(&self, n_levels: usize) -> f64 {
        if self.k == 0.0 {
            return self.a;
        }
        let length = (self.m * self.k).powf(-0.25);
        let clip = length * ((2.0 * n_levels as f64 + 1.0).sqrt() + 10.0);
        self.a.min(clip)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub levels: Vec<f64>,
    pub method: SpectrumMethod,
    pub grid_points: Option<usize>,
    pub richardson_error_estimate: Option<Vec<f64>>,
}

/// Symmetric tridiagonal matrix with constant off-diagonal.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: f64,
}

impl Tridiagonal {
    /// Number of eigenvalues strictly below `x` (Sturm count via LDLᵀ pivots).
    pub fn count_below(&self, x: f64) -> usize {
        let off2 = self.off * self.off;
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for &d in &self.diag[1..] {
            if q == 0.0 {
                q = f64::EPSILON * (self.off.abs() + d.abs()).max(1.0);
            }
            q = d - x - off2 / q;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Gershgorin bounds on the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let r = 2.0 * self.off.abs();
        let lo = self.diag.iter().fold(f64::INFINITY, |m, &d| m.min(d)) - r;
        let hi = self.diag.iter().fold(f64::NEG_INFINITY, |m, &d| m.max(d)) + r;
        (lo, hi)
    }

    /// The `i`-th smallest eigenvalue by bisection.
    pub fn eigenvalue(&self, i: usize) -> f64 {
        let (mut lo, mut hi) = self.bounds();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > i {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for eigenvalue `lambda` by inverse iteration.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.diag.len();
        let shift = lambda + 1e-10 * lambda.abs().max(1.0);
        let mut v = vec![1.0; n];
        for _ in 0..3 {
            v = self.solve_shifted(shift, &v);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }

    // Thomas algorithm for (T − σI) x = b.
    fn solve_shifted(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut denom = self.diag[0] - sigma;
        c[0] = self.off / denom;
        d[0] = b[0] / denom;
        for i in 1..n {
            denom = self.diag[i] - sigma - self.off * c[i - 1];
            if denom == 0.0 {
                denom = f64::EPSILON;
            }
            c[i] = self.off / denom;
            d[i] = (b[i] - self.off * d[i - 1]) / denom;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    }
}

/// Finite-difference discretization of −(1/2m)d²/dx² + V on `cells` equal
/// cells spanning (−L, L); the `cells − 1` interior nodes carry the unknowns.
pub fn discretize(potential: &PotentialSpec, half_width: f64, cells: usize) -> (Tridiagonal, Vec<f64>) {
    let h = 2.0 * half_width / cells as f64;
    let kinetic = 1.0 / (2.0 * potential.m * h * h);
    let nodes: Vec<f64> = (1..cells).map(|i| -half_width + i as f64 * h).collect();
    let diag = nodes.iter().map(|&x| 2.0 * kinetic + potential.value(x)).collect();
    (Tridiagonal { diag, off: -kinetic }, nodes)
}

fn lowest_levels(potential: &PotentialSpec, half_width: f64, cells: usize, n_levels: usize) -> Vec<f64> {
    let (tri, _) = discretize(potential, half_width, cells);
    (0..n_levels).map(|i| tri.eigenvalue(i)).collect()
}

pub const MIN_GRID_POINTS: usize = 1000;
pub const MAX_LEVELS: usize = 20;
/// Richardson estimates above this reject the grid.
pub const COARSE_GRID_LIMIT: f64 = 1e-2;

/// Finite-difference levels on `grid_points` and `2·grid_points` cells,
/// Richardson-extrapolated at order 2.
pub fn solve_schrodinger(potential: &PotentialSpec, n_levels: usize, grid_points: usize) -> Result<SpectrumResult> {
    if grid_points < MIN_GRID_POINTS {
        return Err(invalid(format!("grid_points must be >= {MIN_GRID_POINTS}, got {grid_points}")));
    }
    if n_levels == 0 || n_levels > MAX_LEVELS {
        return Err(invalid(format!("n_levels must be in 1..={MAX_LEVELS}, got {n_levels}")));
    }
    let half_width = potential.effective_half_width(n_levels);
    let coarse = lowest_levels(potential, half_width, grid_points, n_levels);
    let fine = lowest_levels(potential, half_width, 2 * grid_points, n_levels);

    let mut levels = Vec::with_capacity(n_levels);
    let mut estimates = Vec::with_capacity(n_levels);
    for (level, (&c, &f)) in coarse.iter().zip(&fine).enumerate() {
        let extrapolated = (4.0 * f - c) / 3.0;
        let estimate = (f - c).abs() / 3.0;
        if !extrapolated.is_finite() || !estimate.is_finite() {
            return Err(Error::Convergence(format!("non-finite extrapolation at level {level}")));
        }
        if estimate > COARSE_GRID_LIMIT {
            return Err(Error::GridTooCoarse { level, estimate, limit: COARSE_GRID_LIMIT });
        }
        levels.push(extrapolated);
        estimates.push(estimate);
    }
    if let Some(i) = levels.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Convergence(format!("extrapolated levels not increasing at level {}", i + 1)));
    }
    Ok(SpectrumResult {
        levels,
        method: SpectrumMethod::FiniteDifference,
        grid_points: Some(grid_points),
        richardson_error_estimate: Some(estimates),
    })
}

/// Closed-form levels of the tan² model potential.
pub fn analytic_spectrum(params: &DeformationParams, n_levels: usize) -> SpectrumResult {
    SpectrumResult {
        levels: (0..n_levels).map(|n| energy_analytic(params, n)).collect(),
        method: SpectrumMethod::Analytic,
        grid_points: None,
        richardson_error_estimate: None,
    }
}

/// Sign changes of a grid eigenvector, ignoring near-zero tails.
pub fn node_count(v: &[f64]) -> usize {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut last = 0.0f64;
    let mut nodes = 0;
    for &x in v {
        if x.abs() < 1e-8 * scale {
            continue;
        }
        if last != 0.0 && x.signum() != last.signum() {
            nodes += 1;
        }
        last = x;
    }
    nodes
}

/// Reference confined-oscillator levels, indexed `[state][width]` with
/// widths 0.5, 1, 2, 3, 4: model-potential column.
pub const TABLE1_WIDTHS: [f64; 5] = [0.5, 1.0, 2.0, 3.0, 4.0];
pub const TABLE1_MODEL: [[f64; 5]; 5] = [
    [4.98495312, 1.41089325, 0.67745392, 0.57321464, 0.54003728],
    [19.88966157, 5.46638033, 2.34078691, 1.85672176, 1.69721813],
    [44.66397441, 11.98926850, 4.62097017, 3.41438455, 3.00861155],
    [79.30789166, 20.97955777, 7.51800371, 5.24620303, 4.47421754],
    [123.82141330, 32.43724814, 11.03188752, 7.35217718, 6.09403610],
];
/// Numerical hard-wall column.
pub const TABLE1_NUMERIC: [[f64; 5]; 5] = [
    [4.95112932, 1.29845983, 0.53746120, 0.50039108, 0.50000049],
    [19.77453417, 5.07558201, 1.76481643, 1.50608152, 1.50001461],
    [44.45207382, 11.25882578, 3.39978824, 2.54112725, 2.50020117],
    [78.99692115, 19.89969649, 5.58463907, 3.66421964, 3.50169153],
    [123.41071050, 31.00525450, 8.36887442, 4.95418047, 4.50964099],
];

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub state: usize,
    pub a: f64,
    pub analytic: f64,
    pub fd_model: f64,
    pub fd_hardwall: f64,
    pub ref_model: f64,
    pub ref_numeric: f64,
}

impl Table1Row {
    pub fn dev_model(&self) -> f64 {
        (self.analytic - self.ref_model).abs()
    }

    pub fn dev_numeric(&self) -> f64 {
        (self.fd_hardwall - self.ref_numeric).abs()
    }
}

/// All 25 (state, width) cells with m = ω = k = 1; rows ordered by state
/// then width.
pub fn table1_report(grid_points: usize) -> Result<Vec<Table1Row>> {
    let per_width: Vec<(SpectrumResult, SpectrumResult, DeformationParams)> = TABLE1_WIDTHS
        .par_iter()
        .map(|&a| {
            let model = solve_schrodinger(&PotentialSpec::new(PotentialKind::ModelTan, a, 1.0, 1.0)?, 5, grid_points)?;
            let wall = solve_schrodinger(&PotentialSpec::new(PotentialKind::HardWallHo, a, 1.0, 1.0)?, 5, grid_points)?;
            Ok((model, wall, derive_params(a, 1.0, 1.0)?))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(25);
    for state in 0..5 {
        for (j, (model, wall, params)) in per_width.iter().enumerate() {
            rows.push(Table1Row {
                state,
                a: TABLE1_WIDTHS[j],
                analytic: energy_analytic(params, state),
                fd_model: model.levels[state],
                fd_hardwall: wall.levels[state],
                ref_model: TABLE1_MODEL[state][j],
                ref_numeric: TABLE1_NUMERIC[state][j],
            });
        }
    }
    Ok(rows)
}
