//! Fixed-step RK4 shared by the direct and spectral integrators.

use crate::error::{Error, Result};

/// Uniform step grid on `[t0, t_end]`; the last step is shortened so the
/// grid lands exactly on `t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        if !(t_end > t0 && t_end.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "t_end = {t_end} must exceed the start time {t0}"
            )));
        }
        let ratio = (t_end - t0) / dt;
        // absorb rounding so that t_end = 1, dt = 1e-3 gives exactly 1000 steps
        let steps = (ratio - 1e-9 * ratio.max(1.0)).ceil().max(1.0) as usize;
        Ok(Self { t0, t_end, dt, steps })
    }

    pub fn time(&self, k: usize) -> f64 {
        if k >= self.steps {
            self.t_end
        } else {
            self.t0 + k as f64 * self.dt
        }
    }

    pub fn step_len(&self, k: usize) -> f64 {
        self.time(k + 1) - self.time(k)
    }

    /// Step indices at which a sample is recorded: every `every` steps,
    /// plus the final point.
    pub fn is_sample(&self, k: usize, every: usize) -> bool {
        k % every.max(1) == 0 || k == self.steps
    }
}

/// One classical Runge-Kutta step of the autonomous system `y' = f(y)`.
pub fn rk4_step<F>(y: &[f64], h: f64, f: &F) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let wrapped = |y: &[f64]| -> Result<Vec<f64>> { Ok(f(y)) };
    match try_rk4_step(y, h, &wrapped) {
        Ok(v) => v,
        Err(_) => unreachable!("infallible right-hand side"),
    }
}

/// [`rk4_step`] for a right-hand side that can fail.
pub fn try_rk4_step<F>(y: &[f64], h: f64, f: &F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let axpy = |k: &[f64], c: f64| -> Vec<f64> {
        y.iter().zip(k).map(|(yi, ki)| yi + c * ki).collect()
    };
    let k1 = f(y)?;
    let k2 = f(&axpy(&k1, 0.5 * h))?;
    let k3 = f(&axpy(&k2, 0.5 * h))?;
    let k4 = f(&axpy(&k3, h))?;
    Ok(y.iter()
        .enumerate()
        .map(|(i, yi)| yi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}
