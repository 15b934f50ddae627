//! Dormand-Prince 5(4) integrator with embedded error control, for small
//! fixed-size systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct StepControl<const N: usize> {
    pub rtol: f64,
    /// Per-component absolute tolerance.
    pub atol: [f64; N],
    pub initial_step: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
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
// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1`, calling `observe` at `t0` and
/// after every accepted step. Returns the state at `t1`.
pub fn integrate<const N: usize, F, O>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    control: &StepControl<N>,
    mut observe: O,
) -> Result<([f64; N], StepStats)>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    O: FnMut(f64, &[f64; N]),
{
    if t1.is_nan() || t1 <= t0 {
        return Err(Error::Domain(format!("integration interval [{t0}, {t1}] is empty")));
    }
    if control.rtol.is_nan() || control.rtol <= 0.0 || control.atol.iter().any(|&a| a.is_nan() || a <= 0.0) {
        return Err(Error::Domain("step tolerances must be positive".into()));
    }
    let mut t = t0;
    let mut y = y0;
    let mut h = control.initial_step.min(t1 - t0);
    let mut stats = StepStats::default();
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, &y)?;
    observe(t, &y);

    while t < t1 {
        if stats.accepted + stats.rejected >= control.max_steps {
            return Err(Error::StepUnderflow { t, h });
        }
        h = h.min(t1 - t);
        if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t, h });
        }
        for s in 1..7 {
            let mut ys = y;
            for (i, yi) in ys.iter_mut().enumerate() {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += A[s][j] * k[j][i];
                }
                *yi += h * acc;
            }
            k[s] = f(t + C[s] * h, &ys)?;
        }
        let mut y_new = y;
        for (i, yi) in y_new.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..6 {
                acc += A[6][j] * k[j][i];
            }
            *yi += h * acc;
        }
        let mut err2 = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for j in 0..7 {
                e += E[j] * k[j][i];
            }
            let scale = control.atol[i] + control.rtol * y[i].abs().max(y_new[i].abs());
            let r = h * e / scale;
            err2 += r * r;
        }
        let err = (err2 / N as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::StepUnderflow { t, h });
        }
        if err <= 1.0 {
            t = if t1 - t - h <= 0.0 { t1 } else { t + h };
            y = y_new;
            // First-same-as-last: the last stage is the derivative at the new point.
            k[0] = k[6];
            stats.accepted += 1;
            observe(t, &y);
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= grow;
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    Ok((y, stats))
}
