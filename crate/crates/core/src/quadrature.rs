//! Adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.
//!
//! The integrand may be real or complex; the error estimate is the modulus
//! of the Kronrod–Gauss difference, and the interval with the largest
//! estimate is bisected until the global estimate meets
//! `max(abs_tol, rel_tol * |I|)`.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-12, max_intervals: 4000 }
    }
}

impl QuadOptions {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub intervals: usize,
}

struct Segment {
    lo: f64,
    hi: f64,
    value: C64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> C64>(f: &F, lo: f64, hi: f64) -> (C64, f64) {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * w;
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).norm())
}

/// Integrate a complex-valued function over `[lo, hi]`.
pub fn integrate_complex<F>(f: F, lo: f64, hi: f64, opts: QuadOptions) -> Result<QuadResult<C64>>
where
    F: Fn(f64) -> C64,
{
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite limits [{lo}, {hi}]")));
    }
    if lo == hi {
        return Ok(QuadResult { value: C64::new(0.0, 0.0), error: 0.0, intervals: 0 });
    }
    let (value, error) = gk15(&f, lo, hi);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { lo, hi, value, error });
    let mut total = value;
    let mut total_err = error;

    loop {
        if !total.re.is_finite() || !total.im.is_finite() {
            return Err(Error::Quadrature("integrand produced a non-finite value".into()));
        }
        let target = opts.abs_tol.max(opts.rel_tol * total.norm());
        if total_err <= target {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature(format!(
                "no convergence after {} intervals (error {:e}, target {:e})",
                heap.len(),
                total_err,
                target
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            return Err(Error::Quadrature(format!("interval collapsed near x = {mid}")));
        }
        let (v1, e1) = gk15(&f, worst.lo, mid);
        let (v2, e2) = gk15(&f, mid, worst.hi);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { lo: worst.lo, hi: mid, value: v1, error: e1 });
        heap.push(Segment { lo: mid, hi: worst.hi, value: v2, error: e2 });
    }

    // Re-sum to drop accumulated cancellation from the running updates.
    let intervals = heap.len();
    let value = heap.iter().fold(C64::new(0.0, 0.0), |acc, s| acc + s.value);
    let error = heap.iter().map(|s| s.error).sum();
    Ok(QuadResult { value, error, intervals })
}

/// Integrate a real-valued function over `[lo, hi]`.
pub fn integrate<F>(f: F, lo: f64, hi: f64, opts: QuadOptions) -> Result<QuadResult<f64>>
where
    F: Fn(f64) -> f64,
{
    let r = integrate_complex(|x| C64::new(f(x), 0.0), lo, hi, opts)?;
    Ok(QuadResult { value: r.value.re, error: r.error, intervals: r.intervals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(6) - 3.0 * x, 0.0, 2.0, QuadOptions::default()).unwrap();
        assert!((r.value - (128.0 / 7.0 - 6.0)).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_complex() {
        let w = 37.0;
        let r = integrate_complex(|t| C64::new(0.0, w * t).exp(), 0.0, 3.0, QuadOptions::new(1e-12, 0.0))
            .unwrap();
        let exact = (C64::new(0.0, w * 3.0).exp() - 1.0) / C64::new(0.0, w);
        assert!((r.value - exact).norm() < 1e-11);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫₀¹ ln x dx = −1
        let r = integrate(|x| x.ln(), 0.0, 1.0, QuadOptions::new(1e-12, 1e-12)).unwrap();
        assert!((r.value + 1.0).abs() < 1e-10);
        let r = integrate(|x| (PI * x).sin(), 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!((r.value - 2.0 / PI).abs() < 1e-14);
    }

    #[test]
    fn empty_interval() {
        let r = integrate(|x| x, 1.0, 1.0, QuadOptions::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-15, max_intervals: 4 };
        assert!(integrate(|x| (1.0 / x).sin(), 1e-6, 1.0, opts).is_err());
    }
}
