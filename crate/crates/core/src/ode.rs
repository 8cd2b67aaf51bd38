//! Adaptive Dormand–Prince 5(4) integration of complex vector ODEs.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct StepperOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for StepperOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-11, abs_tol: 1e-13, initial_step: 1e-3, min_step: 1e-14, max_steps: 2_000_000 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// 5th-order weights (same as the last stage row).
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrate y′ = rhs(t, y) from `t0` to `t1`; `on_step(t, y)` runs after
/// every accepted step.
pub fn integrate<F, M>(
    rhs: F,
    t0: f64,
    t1: f64,
    y0: Array1<C64>,
    opts: StepperOptions,
    mut on_step: M,
) -> Result<(Array1<C64>, StepStats)>
where
    F: Fn(f64, &Array1<C64>) -> Array1<C64>,
    M: FnMut(f64, &Array1<C64>),
{
    let mut stats = StepStats::default();
    if t1 == t0 {
        return Ok((y0, stats));
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.initial_step.min(span);
    let mut k1 = rhs(t, &y);

    while (t1 - t) * dir > 0.0 {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Convergence(format!("ODE step budget exhausted at t = {t}")));
        }
        let remaining = (t1 - t).abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let mut k: Vec<Array1<C64>> = Vec::with_capacity(7);
        k.push(k1.clone());
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let w = A[s][j];
                if w != 0.0 {
                    ys.scaled_add(C64::new(dir * h * w, 0.0), kj);
                }
            }
            k.push(rhs(t + dir * h * C[s], &ys));
        }
        let mut y5 = y.clone();
        let mut err_vec = Array1::<C64>::zeros(y.len());
        for s in 0..7 {
            if B5[s] != 0.0 {
                y5.scaled_add(C64::new(dir * h * B5[s], 0.0), &k[s]);
            }
            err_vec.scaled_add(C64::new(dir * h * (B5[s] - B4[s]), 0.0), &k[s]);
        }
        // RMS of the componentwise scaled error.
        let err = (err_vec
            .iter()
            .zip(y.iter().zip(y5.iter()))
            .map(|(e, (a, b))| {
                let scale = opts.abs_tol + opts.rel_tol * a.norm().max(b.norm());
                (e.norm() / scale).powi(2)
            })
            .sum::<f64>()
            / y.len() as f64)
            .sqrt();

        if err <= 1.0 {
            t = if last { t1 } else { t + dir * h };
            y = y5;
            // FSAL: the 7th stage is the derivative at the new point.
            k1 = k.pop().expect("seven stages");
            stats.accepted += 1;
            on_step(t, &y);
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < opts.min_step {
                return Err(Error::StepSizeUnderflow(t));
            }
        }
    }
    Ok((y, stats))
}
