//! The periodic Volterra chain itself and its reference integrator.
//!
//! Storage is `u[0..N]` holding `u_1..u_N`; a lattice index `n ∈ Z` maps to
//! slot `(n - 1) mod N`, so `u_0 = u_N` by construction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{rk4_step, TimeGrid};

/// Slot of lattice index `n` in a period-`len` buffer holding sites `1..=len`.
pub fn slot(n: i64, len: usize) -> usize {
    (n - 1).rem_euclid(len as i64) as usize
}

/// Periodic chain: `N ≥ 2` positive amplitudes at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainState {
    u: Vec<f64>,
    pub t: f64,
}

impl ChainState {
    pub fn new(u: Vec<f64>, t: f64) -> Result<Self> {
        if u.len() < 2 {
            return Err(Error::InvalidChain {
                field: "n",
                reason: format!("period must be at least 2, got {}", u.len()),
            });
        }
        if let Some((i, v)) = u.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidChain {
                field: "u",
                reason: format!("u_{} = {v} is not a finite positive number", i + 1),
            });
        }
        Ok(Self { u, t })
    }

    /// Builds the chain from Hill coefficients, `u_n = 4 a_n²`.
    pub fn from_a(a: &[f64], t: f64) -> Result<Self> {
        if let Some((i, v)) = a.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidChain {
                field: "a",
                reason: format!("a_{} = {v} is not a finite positive number", i + 1),
            });
        }
        Self::new(u_from_a(a), t)
    }

    pub fn period(&self) -> usize {
        self.u.len()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// `u_n` for any lattice index.
    pub fn u_at(&self, n: i64) -> f64 {
        self.u[slot(n, self.u.len())]
    }

    pub fn a(&self) -> Vec<f64> {
        a_from_u(&self.u)
    }
}

/// `a_n = ½ √u_n`.
pub fn a_from_u(u: &[f64]) -> Vec<f64> {
    u.iter().map(|v| 0.5 * v.sqrt()).collect()
}

/// `u_n = 4 a_n²`.
pub fn u_from_a(a: &[f64]) -> Vec<f64> {
    a.iter().map(|v| 4.0 * v * v).collect()
}

/// `u'_n = u_n (u_{n+1} - u_{n-1})`, cyclic.
pub fn volterra_rhs(u: &[f64]) -> Vec<f64> {
    let len = u.len();
    (0..len)
        .map(|i| u[i] * (u[(i + 1) % len] - u[(i + len - 1) % len]))
        .collect()
}

/// `a'_n = 2 a_n (a_{n+1}² - a_{n-1}²)`, cyclic.
pub fn a_rhs(a: &[f64]) -> Vec<f64> {
    let len = a.len();
    (0..len)
        .map(|i| {
            let next = a[(i + 1) % len];
            let prev = a[(i + len - 1) % len];
            2.0 * a[i] * (next * next - prev * prev)
        })
        .collect()
}

/// Relative drift of the two polynomial conserved quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantResidual {
    /// `|Σu(t) / Σu(0) - 1|`
    pub sum: f64,
    /// `|Πu(t) / Πu(0) - 1|`
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSample {
    pub t: f64,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainTrajectory {
    pub samples: Vec<ChainSample>,
    pub step: f64,
    pub invariant_log: Vec<InvariantResidual>,
}

impl ChainTrajectory {
    pub fn period(&self) -> usize {
        self.samples[0].u.len()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn state(&self, i: usize) -> ChainState {
        ChainState {
            u: self.samples[i].u.clone(),
            t: self.samples[i].t,
        }
    }

    pub fn last(&self) -> ChainState {
        self.state(self.samples.len() - 1)
    }

    pub fn max_invariant_drift(&self) -> InvariantResidual {
        self.invariant_log.iter().fold(
            InvariantResidual { sum: 0.0, product: 0.0 },
            |acc, r| InvariantResidual {
                sum: acc.sum.max(r.sum),
                product: acc.product.max(r.product),
            },
        )
    }
}

fn invariants(u: &[f64]) -> (f64, f64) {
    (u.iter().sum(), u.iter().map(|v| v.ln()).sum())
}

/// Integrates the chain with fixed-step RK4 from `state.t` to `t_end`,
/// recording a sample every `sample_every` steps and at `t_end`.
///
/// Fails as soon as an amplitude stops being finite and positive.
pub fn integrate_direct(
    state: &ChainState,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<ChainTrajectory> {
    let grid = TimeGrid::new(state.t, t_end, dt)?;
    let (sum0, log_prod0) = invariants(&state.u);
    let record = |u: &[f64]| {
        let (sum, log_prod) = invariants(u);
        InvariantResidual {
            sum: (sum / sum0 - 1.0).abs(),
            product: (log_prod - log_prod0).exp_m1().abs(),
        }
    };

    let mut u = state.u.clone();
    let mut samples = vec![ChainSample { t: state.t, u: u.clone() }];
    let mut invariant_log = vec![record(&u)];
    for k in 0..grid.steps {
        u = rk4_step(&u, grid.step_len(k), &volterra_rhs);
        let t = grid.time(k + 1);
        if let Some((i, v)) = u.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Integration {
                t,
                reason: format!("u_{} = {v} left the positive range; reduce dt", i + 1),
            });
        }
        if grid.is_sample(k + 1, sample_every) {
            invariant_log.push(record(&u));
            samples.push(ChainSample { t, u: u.clone() });
        }
    }
    Ok(ChainTrajectory {
        samples,
        step: dt,
        invariant_log,
    })
}
