//! Ladder operators on a truncated Fock basis, undeformed and f-deformed.
//!
//! All operators are dense `dim × dim` complex matrices in the number basis
//! |0⟩ … |dim−1⟩ with ħ = 1. Truncation breaks every ladder identity on the
//! last basis state, so identities are stated on the interior block
//! `0..dim-1` (see [`FockOperator::interior_dim`]).

use std::fmt::Write as _;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};

/// Dense operator on a truncated number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    mat: Array2<C64>,
}

impl FockOperator {
    pub fn from_matrix(mat: Array2<C64>) -> Result<Self> {
        let (r, c) = mat.dim();
        if r != c {
            return Err(Error::DimensionMismatch { left: r, right: c });
        }
        if r < 2 {
            return Err(invalid(format!("Fock dimension must be >= 2, got {r}")));
        }
        Ok(Self { mat })
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::from_matrix(Array2::zeros((dim, dim)))
    }

    /// Diagonal operator with entries `diag[n]`.
    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let mut op = Self::zeros(diag.len())?;
        for (n, &d) in diag.iter().enumerate() {
            op.mat[[n, n]] = C64::new(d, 0.0);
        }
        Ok(op)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    /// Size of the block on which ladder identities hold (`dim − 1`).
    pub fn interior_dim(&self) -> usize {
        self.dim() - 1
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[[row, col]]
    }

    pub fn dagger(&self) -> Self {
        Self { mat: self.mat.t().mapv(|z| z.conj()) }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { mat: self.mat.dot(&other.mat) })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { mat: &self.mat + &other.mat })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(Self { mat: &self.mat - &other.mat })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { mat: self.mat.mapv(|z| z * factor) }
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn apply(&self, v: &Array1<C64>) -> Result<Array1<C64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: v.len() });
        }
        Ok(self.mat.dot(v))
    }

    /// ⟨ψ|M|ψ⟩ for a vector no longer than `dim`; missing entries are zero.
    pub fn expectation(&self, psi: &Array1<C64>) -> Result<C64> {
        if psi.len() > self.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: psi.len() });
        }
        let k = psi.len();
        let block = self.mat.slice(ndarray::s![..k, ..k]);
        let m_psi = block.dot(psi);
        Ok(psi.iter().zip(m_psi.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn diagonal_entries(&self) -> Vec<C64> {
        self.mat.diag().to_vec()
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self
            .mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Largest |M − N| over the leading `k × k` block.
    pub fn max_abs_diff_block(&self, other: &Self, k: usize) -> Result<f64> {
        self.check_dim(other)?;
        let k = k.min(self.dim());
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in 0..k {
                worst = worst.max((self.mat[[i, j]] - other.mat[[i, j]]).norm());
            }
        }
        Ok(worst)
    }

    /// max |M − M†|
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.dagger()).expect("same dimension")
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst = 0.0f64;
        for ((i, j), z) in self.mat.indexed_iter() {
            if i != j {
                worst = worst.max(z.norm());
            }
        }
        worst
    }

    /// CSV matrix dump: `row,col,re,im`, nonzero entries only.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,re,im\n");
        for ((i, j), z) in self.mat.indexed_iter() {
            if *z != C64::new(0.0, 0.0) {
                writeln!(out, "{i},{j},{:.9e},{:.9e}", z.re, z.im).expect("write to String");
            }
        }
        out
    }
}

/// f(n) = √(γn + α), with value 1 on negative arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeformationFunction {
    gamma: f64,
    alpha: f64,
}

impl DeformationFunction {
    pub fn new(gamma: f64, alpha: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(invalid(format!("gamma must be finite and >= 0, got {gamma}")));
        }
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(invalid(format!("alpha must be finite and >= 1, got {alpha}")));
        }
        Ok(Self { gamma, alpha })
    }

    /// f ≡ 1
    pub fn undeformed() -> Self {
        Self { gamma: 0.0, alpha: 1.0 }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// f²(n); equals 1 for n < 0.
    pub fn squared(&self, n: i64) -> f64 {
        if n < 0 {
            1.0
        } else {
            self.gamma * n as f64 + self.alpha
        }
    }

    pub fn eval(&self, n: i64) -> f64 {
        self.squared(n).sqrt()
    }

    /// (n+1) f²(n+1) − n f²(n) = γ(2n+1) + α
    pub fn commutator_value(&self, n: usize) -> f64 {
        let n = n as i64;
        (n + 1) as f64 * self.squared(n + 1) - n as f64 * self.squared(n)
    }

    /// G(n) = ½[(n+2) f²(n+2) − n f²(n)], the number-dependent Heisenberg frequency.
    pub fn heisenberg_frequency(&self, n: usize) -> f64 {
        let n = n as i64;
        0.5 * ((n + 2) as f64 * self.squared(n + 2) - n as f64 * self.squared(n))
    }

    /// f(n̂) as a diagonal operator.
    pub fn operator(&self, dim: usize) -> Result<FockOperator> {
        let diag: Vec<f64> = (0..dim as i64).map(|n| self.eval(n)).collect();
        FockOperator::diagonal(&diag)
    }
}

/// Strictly increasing list of energies.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySpectrum {
    levels: Vec<f64>,
}

impl EnergySpectrum {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(invalid("spectrum needs at least two levels"));
        }
        if let Some(i) = levels.iter().position(|e| !e.is_finite()) {
            return Err(invalid(format!("non-finite energy at level {i}")));
        }
        if let Some(i) = levels.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NonMonotoneSpectrum(i + 1));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn count(&self) -> usize {
        self.levels.len()
    }

    pub fn shifted_to_zero(&self) -> Vec<f64> {
        let e0 = self.levels[0];
        self.levels.iter().map(|e| e - e0).collect()
    }
}

/// Undeformed a, a†, n̂ on `dim` number states.
pub fn build_undeformed_ladder(dim: usize) -> Result<(FockOperator, FockOperator, FockOperator)> {
    if dim < 2 {
        return Err(invalid(format!("Fock dimension must be >= 2, got {dim}")));
    }
    let mut a = FockOperator::zeros(dim)?;
    for n in 1..dim {
        a.mat[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    let a_dag = a.dagger();
    let n_op = FockOperator::diagonal(&(0..dim).map(|n| n as f64).collect::<Vec<_>>())?;
    Ok((a, a_dag, n_op))
}

/// A = a f(n̂), A† = f(n̂) a†.
pub fn deform_ladder(a: &FockOperator, f: &DeformationFunction) -> Result<(FockOperator, FockOperator)> {
    let f_op = f.operator(a.dim())?;
    let big_a = a.mul(&f_op)?;
    let big_a_dag = big_a.dagger();
    Ok((big_a, big_a_dag))
}

/// Deformed annihilation operator A = a f(n̂) on `dim` states.
pub fn deformed_annihilation(f: &DeformationFunction, dim: usize) -> Result<FockOperator> {
    let (a, _, _) = build_undeformed_ladder(dim)?;
    Ok(deform_ladder(&a, f)?.0)
}

/// [A, A†]
pub fn commutator_deformed(a: &FockOperator, a_dag: &FockOperator) -> Result<FockOperator> {
    a.commutator(a_dag)
}

/// Ladder operators with A†A = diag(E_i − E_0): A = Σ √E_i |i−1⟩⟨i|.
pub fn ladder_from_spectrum(spectrum: &EnergySpectrum) -> Result<(FockOperator, FockOperator)> {
    let shifted = spectrum.shifted_to_zero();
    let dim = shifted.len();
    let mut a = FockOperator::zeros(dim)?;
    for (i, &e) in shifted.iter().enumerate().skip(1) {
        a.mat[[i - 1, i]] = C64::new(e.sqrt(), 0.0);
    }
    let a_dag = a.dagger();
    Ok((a, a_dag))
}

/// H = (Ω/2)(AA† + A†A)
pub fn f_hamiltonian(a: &FockOperator, a_dag: &FockOperator, omega: f64) -> Result<FockOperator> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(invalid(format!("frequency must be positive, got {omega}")));
    }
    let sum = a.mul(a_dag)?.add(&a_dag.mul(a)?)?;
    Ok(sum.scale(C64::new(0.5 * omega, 0.0)))
}

/// Closed-form eigenvalue (Ω/2)[(n+1)f²(n+1) + n f²(n)].
pub fn f_oscillator_energy(f: &DeformationFunction, omega: f64, n: usize) -> f64 {
    let n = n as i64;
    0.5 * omega * ((n + 1) as f64 * f.squared(n + 1) + n as f64 * f.squared(n))
}

/// e^{iHt} A e^{−iHt} for diagonal H, by exact phase application.
pub fn heisenberg_evolve(a: &FockOperator, h: &FockOperator, t: f64) -> Result<FockOperator> {
    a.check_dim(h)?;
    let off = h.max_off_diagonal();
    if off > 1e-12 {
        return Err(Error::NotDiagonal(off));
    }
    let energies: Vec<f64> = h.mat.diag().iter().map(|z| z.re).collect();
    let mut out = a.clone();
    for ((i, j), z) in out.mat.indexed_iter_mut() {
        *z *= C64::from_polar(1.0, (energies[i] - energies[j]) * t);
    }
    Ok(out)
}

/// e^{−iΩG(n̂)t} A, the closed-form Heisenberg solution.
pub fn heisenberg_closed_form(
    a: &FockOperator,
    f: &DeformationFunction,
    omega: f64,
    t: f64,
) -> FockOperator {
    let mut out = a.clone();
    for ((i, _), z) in out.mat.indexed_iter_mut() {
        *z *= C64::from_polar(1.0, -omega * f.heisenberg_frequency(i) * t);
    }
    out
}

/// e^{iHt} for diagonal H.
pub fn diagonal_propagator(h: &FockOperator, t: f64) -> Result<FockOperator> {
    let off = h.max_off_diagonal();
    if off > 1e-12 {
        return Err(Error::NotDiagonal(off));
    }
    let mut u = FockOperator::zeros(h.dim())?;
    for n in 0..h.dim() {
        u.mat[[n, n]] = C64::from_polar(1.0, h.mat[[n, n]].re * t);
    }
    Ok(u)
}
