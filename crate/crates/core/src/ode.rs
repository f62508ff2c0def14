//! Adaptive Dormand–Prince 5(4) integrator for small autonomous systems.

use crate::error::{Error, Result};

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights are the last row of A (FSAL); these are fifth minus fourth
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rel: 1e-12, abs: 1e-14 }
    }
}

/// Integrates `dy/dt = rhs(y)` from `t = 0` to `t_end`, in place.
pub fn integrate<F>(y: &mut [f64], t_end: f64, tol: Tolerance, mut rhs: F) -> Result<usize>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if t_end == 0.0 {
        return Ok(0);
    }
    let dim = y.len();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; dim]; 7];
    let mut stage = vec![0.0; dim];
    let mut next = vec![0.0; dim];

    rhs(y, &mut k[0]);
    let mut t = 0.0;
    let mut h = (t_end * 1e-3).min(1e-3);
    let mut steps = 0usize;
    const MAX_STEPS: usize = 5_000_000;

    while t < t_end {
        if steps >= MAX_STEPS {
            return Err(Error::Integration(format!("no convergence after {MAX_STEPS} steps")));
        }
        if t + h > t_end {
            h = t_end - t;
        }
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = y[i];
                for (a, kk) in A[s][..s].iter().zip(&k[..s]) {
                    acc += h * a * kk[i];
                }
                stage[i] = acc;
            }
            rhs(&stage, &mut k[s]);
            if s == 6 {
                next.copy_from_slice(&stage);
            }
        }

        let mut err: f64 = 0.0;
        for i in 0..dim {
            let mut e = 0.0;
            for (w, kk) in E.iter().zip(&k) {
                e += w * kk[i];
            }
            let scale = tol.abs + tol.rel * y[i].abs().max(next[i].abs());
            err = err.max((h * e / scale).abs());
        }
        if !err.is_finite() {
            return Err(Error::Integration("non-finite error estimate".into()));
        }

        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&next);
            k.swap(0, 6);
            steps += 1;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-300 {
            return Err(Error::Integration("step size underflow".into()));
        }
    }
    Ok(steps)
}
