//! Dubrovin-type flow of the shifted Dirichlet spectra.
//!
//! Each `μ_{j,k}` obeys
//!
//! ```text
//! μ' = -4 μ σ √(Π_i (μ - λ_i)) / Π_{i≠j} (μ - μ_i)
//! ```
//!
//! which is singular at the gap edges, where `σ` flips. Writing
//! `μ = c_j + r_j cos ψ` with gap midpoint `c_j` and half-width `r_j`, and
//! decoding `σ = -sign(sin ψ)`, the two edge factors give
//! `(μ - λ_{2j})(μ - λ_{2j+1}) = -(r_j sin ψ)²` and the flow becomes the
//! smooth system
//!
//! ```text
//! ψ' = -4 μ √(-R_j(μ)) / Π_{i≠j} (μ - μ_i),    R_j = Π_{i ∉ gap j} (μ - λ_i)
//! ```
//!
//! in which edge reflections happen automatically as `ψ` crosses `0` or `π`.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hill::{self, AuxSpectrum, HillCoefficients, HillSpectrum};
use crate::lattice::ChainState;
use crate::ode::{try_rk4_step, TimeGrid};
use crate::symm_poly::{lagrange_power_sum, NodeSet};

/// Below this `|sin ψ|` a decoded point counts as sitting on a gap edge.
const EDGE_SIN: f64 = 1e-12;

/// `σ √(Π_i (μ_j - λ_i)) / Π_{i≠j}(μ_j - μ_i)` for every `j`, with the
/// radicand clamped to zero on the edges and in closed gaps.
pub fn flow_terms(spectrum: &HillSpectrum, aux: &AuxSpectrum) -> Result<Vec<f64>> {
    check_signed(aux)?;
    (0..aux.mu.len())
        .map(|j| {
            let root = clamped_root(spectrum, j, aux.mu[j])?;
            if root == 0.0 {
                return Ok(0.0);
            }
            Ok(f64::from(aux.sigma[j]) * root / denominator(aux, j)?)
        })
        .collect()
}

fn check_signed(aux: &AuxSpectrum) -> Result<()> {
    if aux.sigma.len() != aux.mu.len() {
        return Err(Error::InvalidArgument(format!(
            "shift {}: branch signs missing",
            aux.shift
        )));
    }
    Ok(())
}

fn denominator(aux: &AuxSpectrum, j: usize) -> Result<f64> {
    let d = aux.vandermonde_factor(j);
    if d == 0.0 || !d.is_finite() {
        return Err(Error::Degenerate(format!(
            "coinciding Dirichlet eigenvalues at shift {} (mu_{} = {})",
            aux.shift,
            j + 1,
            aux.mu[j]
        )));
    }
    Ok(d)
}

/// `√max(0, Π_i (μ - λ_i))` for `μ` in gap `j`; points clearly outside the
/// gap are rejected.
fn clamped_root(spectrum: &HillSpectrum, j: usize, mu: f64) -> Result<f64> {
    let gap = spectrum.gaps[j];
    if gap.closed {
        return Ok(0.0);
    }
    if !gap.contains(mu, 1e-9 * (1.0 + mu.abs())) {
        return Err(Error::InvalidArgument(format!(
            "mu = {mu} outside gap {} [{}, {}]",
            j + 1,
            gap.lo,
            gap.hi
        )));
    }
    Ok(spectrum.radicand(mu).max(0.0).sqrt())
}

/// Right-hand side of the Dubrovin equation for `μ_j`.
pub fn dubrovin_velocity(
    mu: f64,
    sigma: i8,
    j: usize,
    all_mu: &[f64],
    spectrum: &HillSpectrum,
) -> Result<f64> {
    let root = clamped_root(spectrum, j, mu)?;
    let aux = AuxSpectrum {
        shift: 0,
        mu: all_mu.to_vec(),
        sigma: Vec::new(),
    };
    let denom = denominator(&aux, j)?;
    Ok(-4.0 * mu * f64::from(sigma) * root / denom)
}

/// Angles `ψ_{j,k}` for every shift `k = 0..N` and gap `j`, plus the
/// constant periodic spectrum. Entries for closed gaps are ignored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralFlowState {
    pub spectrum: HillSpectrum,
    pub psi: Vec<Vec<f64>>,
    pub t: f64,
}

impl SpectralFlowState {
    /// Computes the spectral data of `chain` and encodes it in angle form.
    pub fn from_chain(chain: &ChainState) -> Result<Self> {
        let c = HillCoefficients::from_chain(chain);
        let spectrum = hill::periodic_spectrum(&c);
        let aux = hill::all_aux_spectra(&c)?;
        Ok(Self::encode(spectrum, &aux, chain.t))
    }

    /// Angle form of given spectral data; `ψ ∈ [0, π]` when `σ = -1` and
    /// `ψ ∈ [π, 2π)` when `σ = +1`.
    pub fn encode(spectrum: HillSpectrum, aux: &[AuxSpectrum], t: f64) -> Self {
        let psi = aux
            .iter()
            .map(|a| {
                spectrum
                    .gaps
                    .iter()
                    .enumerate()
                    .map(|(j, g)| {
                        if g.closed {
                            return 0.0;
                        }
                        let cos = ((a.mu[j] - g.mid()) / g.half_width()).clamp(-1.0, 1.0);
                        let psi = cos.acos();
                        if a.sigma.get(j).copied().unwrap_or(1) > 0 {
                            (TAU - psi).rem_euclid(TAU)
                        } else {
                            psi
                        }
                    })
                    .collect()
            })
            .collect();
        Self { spectrum, psi, t }
    }

    pub fn period(&self) -> usize {
        self.spectrum.period()
    }

    /// Decoded `(μ_{·,k}, σ_{·,k})`.
    pub fn decode(&self, shift: usize) -> AuxSpectrum {
        decode_angles(&self.spectrum, shift as i64, &self.psi[shift])
    }

    pub fn decode_all(&self) -> Vec<AuxSpectrum> {
        (0..self.psi.len()).map(|k| self.decode(k)).collect()
    }

    /// Reflects `ψ_{j,k} → 2π - ψ_{j,k}`, flipping the decoded branch sign
    /// while keeping `μ_{j,k}`. Test hook for failure injection.
    pub fn flip_sigma(&mut self, j: usize, k: usize) -> Result<()> {
        let n = self.period();
        if k >= n || j + 1 >= n {
            return Err(Error::InvalidArgument(format!(
                "flip target gap {j}, shift {k} out of range for period {n}"
            )));
        }
        if self.spectrum.gaps[j].closed {
            return Err(Error::InvalidArgument(format!(
                "gap {} is closed; its sign carries no information",
                j + 1
            )));
        }
        self.psi[k][j] = (TAU - self.psi[k][j]).rem_euclid(TAU);
        Ok(())
    }

    /// `dψ_{j,k}/dt`.
    pub fn angle_velocity(&self, j: usize, k: usize) -> Result<f64> {
        Ok(angle_field(&self.spectrum, k as i64, &self.psi[k])?[j])
    }
}

fn decode_angles(spectrum: &HillSpectrum, shift: i64, psi: &[f64]) -> AuxSpectrum {
    let (mu, sigma) = spectrum
        .gaps
        .iter()
        .zip(psi)
        .map(|(g, &p)| {
            if g.closed {
                (g.mid(), 1)
            } else {
                let sin = p.sin();
                let sigma = if sin > EDGE_SIN { -1 } else { 1 };
                (g.mid() + g.half_width() * p.cos(), sigma)
            }
        })
        .unzip();
    AuxSpectrum { shift, mu, sigma }
}

/// Angle velocities for one shift.
pub fn angle_field(spectrum: &HillSpectrum, shift: i64, psi: &[f64]) -> Result<Vec<f64>> {
    let aux = decode_angles(spectrum, shift, psi);
    (0..psi.len())
        .map(|j| {
            if spectrum.gaps[j].closed {
                return Ok(0.0);
            }
            let mu = aux.mu[j];
            let outer = (-spectrum.radicand_without_gap(mu, j)).max(0.0).sqrt();
            Ok(-4.0 * mu * outer / denominator(&aux, j)?)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSample {
    pub t: f64,
    pub psi: Vec<Vec<f64>>,
    pub aux: Vec<AuxSpectrum>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralTrajectory {
    pub spectrum: HillSpectrum,
    pub samples: Vec<SpectralSample>,
    pub step: f64,
}

impl SpectralTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn last_state(&self) -> SpectralFlowState {
        let s = self.samples.last().expect("trajectory has samples");
        SpectralFlowState {
            spectrum: self.spectrum.clone(),
            psi: s.psi.clone(),
            t: s.t,
        }
    }
}

fn sample(state_spectrum: &HillSpectrum, psi: &[Vec<f64>], t: f64) -> SpectralSample {
    let aux = psi
        .iter()
        .enumerate()
        .map(|(k, p)| decode_angles(state_spectrum, k as i64, p))
        .collect();
    SpectralSample {
        t,
        psi: psi.to_vec(),
        aux,
    }
}

fn integrate(
    state: &SpectralFlowState,
    t_end: f64,
    dt: f64,
    sample_every: usize,
    direction: f64,
) -> Result<SpectralTrajectory> {
    // backward runs integrate the negated field over the same grid
    let grid = if direction > 0.0 {
        TimeGrid::new(state.t, t_end, dt)?
    } else {
        TimeGrid::new(-state.t, -t_end, dt)?
    };
    let spectrum = &state.spectrum;
    let mut psi = state.psi.clone();
    let mut samples = vec![sample(spectrum, &psi, state.t)];
    for step in 0..grid.steps {
        let h = grid.step_len(step);
        let t = direction * grid.time(step + 1);
        for (k, pk) in psi.iter_mut().enumerate() {
            let field = |p: &[f64]| -> Result<Vec<f64>> {
                let v = angle_field(spectrum, k as i64, p)?;
                Ok(v.into_iter().map(|x| direction * x).collect())
            };
            let next = try_rk4_step(pk, h, &field).map_err(|e| Error::Integration {
                t,
                reason: e.to_string(),
            })?;
            if let Some(bad) = next.iter().find(|x| !x.is_finite()) {
                return Err(Error::Integration {
                    t,
                    reason: format!("angle became {bad} at shift {k}; reduce dt"),
                });
            }
            *pk = next.into_iter().map(|x| x.rem_euclid(TAU)).collect();
        }
        if grid.is_sample(step + 1, sample_every) {
            samples.push(sample(spectrum, &psi, t));
        }
    }
    Ok(SpectralTrajectory {
        spectrum: spectrum.clone(),
        samples,
        step: dt,
    })
}

/// Integrates all `N (N - 1)` angle equations by RK4 from `state.t` to
/// `t_end`, sampling every `sample_every` steps and at `t_end`.
pub fn evolve_state(
    state: &SpectralFlowState,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<SpectralTrajectory> {
    integrate(state, t_end, dt, sample_every, 1.0)
}

/// Integrates backwards in time from `state.t` down to `t_target < state.t`.
pub fn evolve_state_backward(
    state: &SpectralFlowState,
    t_target: f64,
    dt: f64,
    sample_every: usize,
) -> Result<SpectralTrajectory> {
    integrate(state, t_target, dt, sample_every, -1.0)
}

/// Spectral data of `initial`, evolved by the angle-form flow to `t_end`.
pub fn evolve_spectral(
    initial: &ChainState,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<SpectralTrajectory> {
    evolve_state(&SpectralFlowState::from_chain(initial)?, t_end, dt, sample_every)
}

/// `|Σ_j μ_j σ_j √(Π_i(μ_j - λ_i)) / Π_{i≠j}(μ_j - μ_i)|`.
pub fn identity_26_residual(spectrum: &HillSpectrum, aux: &AuxSpectrum) -> Result<f64> {
    let terms = flow_terms(spectrum, aux)?;
    Ok(aux.mu.iter().zip(&terms).map(|(m, f)| m * f).sum::<f64>().abs())
}

/// Weighted velocity sums `Σ_j μ_j^{s-1} μ'_j / (σ_j √(Π_i(μ_j - λ_i)))`
/// for `s = 1..N-1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Identity27 {
    /// Sums with `μ'` taken from [`dubrovin_velocity`].
    pub sums: Vec<f64>,
    /// `(0, .., 0, -4, 0)`.
    pub expected: Vec<f64>,
    /// `-4 f(s, μ)` from the direct Lagrange power sum.
    pub lemma: Vec<f64>,
}

impl Identity27 {
    pub fn max_residual(&self) -> f64 {
        self.sums
            .iter()
            .zip(&self.expected)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_lemma_residual(&self) -> f64 {
        self.sums
            .iter()
            .zip(&self.lemma)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub fn identity_27(spectrum: &HillSpectrum, aux: &AuxSpectrum) -> Result<Identity27> {
    check_signed(aux)?;
    let n = spectrum.period();
    if n < 4 {
        return Err(Error::Inapplicable(format!(
            "velocity-sum identities need N >= 4, got {n}"
        )));
    }
    let weights = (0..aux.mu.len())
        .map(|j| {
            let mu = aux.mu[j];
            let velocity = dubrovin_velocity(mu, aux.sigma[j], j, &aux.mu, spectrum)?;
            let branch = f64::from(aux.sigma[j]) * clamped_root(spectrum, j, mu)?;
            if branch == 0.0 {
                return Err(Error::Degenerate(format!(
                    "mu_{} = {mu} sits on a gap edge",
                    j + 1
                )));
            }
            Ok(velocity / branch)
        })
        .collect::<Result<Vec<f64>>>()?;
    let nodes = NodeSet::new(aux.mu.clone())?;
    let mut sums = Vec::with_capacity(n - 1);
    let mut lemma = Vec::with_capacity(n - 1);
    for s in 1..n as i32 {
        sums.push(
            aux.mu
                .iter()
                .zip(&weights)
                .map(|(m, w)| m.powi(s - 1) * w)
                .sum(),
        );
        lemma.push(-4.0 * lagrange_power_sum(i64::from(s), &nodes)?);
    }
    let mut expected = vec![0.0; n - 1];
    expected[n - 3] = -4.0;
    Ok(Identity27 {
        sums,
        expected,
        lemma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(u: &[f64]) -> ChainState {
        ChainState::new(u.to_vec(), 0.0).unwrap()
    }

    #[test]
    fn encode_decode_round_trip() {
        let c = chain(&[0.7, 1.8, 1.1, 0.55, 1.3]);
        let coeffs = HillCoefficients::from_chain(&c);
        let state = SpectralFlowState::from_chain(&c).unwrap();
        for k in 0..5 {
            let direct = hill::aux_spectrum(&coeffs, k as i64).unwrap();
            let decoded = state.decode(k);
            assert_eq!(direct.sigma, decoded.sigma);
            for (a, b) in direct.mu.iter().zip(&decoded.mu) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn angle_field_reproduces_dubrovin_velocity() {
        let c = chain(&[0.9, 1.6, 0.6, 1.2]);
        let state = SpectralFlowState::from_chain(&c).unwrap();
        for k in 0..4 {
            let aux = state.decode(k);
            let field = angle_field(&state.spectrum, k as i64, &state.psi[k]).unwrap();
            for j in 0..3 {
                let g = state.spectrum.gaps[j];
                let dmu = -g.half_width() * state.psi[k][j].sin() * field[j];
                let v = dubrovin_velocity(aux.mu[j], aux.sigma[j], j, &aux.mu, &state.spectrum)
                    .unwrap();
                assert!((dmu - v).abs() < 1e-12, "k={k} j={j}: {dmu} vs {v}");
            }
        }
    }

    #[test]
    fn velocity_vanishes_at_zero_and_edges() {
        let c = chain(&[0.9, 1.6, 0.6, 1.2]);
        let s = hill::periodic_spectrum(&HillCoefficients::from_chain(&c));
        let mu = [s.gaps[0].lo, 0.0, s.gaps[2].mid()];
        assert_eq!(dubrovin_velocity(mu[0], 1, 0, &mu, &s).unwrap(), 0.0);
        assert_eq!(dubrovin_velocity(0.0, -1, 1, &mu, &s).unwrap(), 0.0);
        assert!(dubrovin_velocity(s.gaps[0].hi + 0.1, 1, 0, &mu, &s).is_err());
    }

    #[test]
    fn coinciding_mu_is_degenerate() {
        let c = chain(&[0.9, 1.6, 0.6, 1.2]);
        let s = hill::periodic_spectrum(&HillCoefficients::from_chain(&c));
        let g = s.gaps[0];
        let mu = [g.mid(), g.mid(), 0.3];
        assert!(matches!(
            dubrovin_velocity(g.mid(), 1, 0, &mu, &s),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn n3_velocities_antisymmetric() {
        let c = HillCoefficients::new(vec![1.0, 2.0, 3.0]).unwrap();
        let s = hill::periodic_spectrum(&c);
        let aux = hill::aux_spectrum(&c, 0).unwrap();
        let v0 = dubrovin_velocity(aux.mu[0], aux.sigma[0], 0, &aux.mu, &s).unwrap();
        let v1 = dubrovin_velocity(aux.mu[1], aux.sigma[1], 1, &aux.mu, &s).unwrap();
        assert!((v0 + v1).abs() < 1e-12 * (1.0 + v0.abs()));
        assert!(identity_26_residual(&s, &aux).unwrap() < 1e-12);
    }

    #[test]
    fn closed_gaps_are_frozen() {
        let c = chain(&[4.0, 4.0, 4.0]);
        let traj = evolve_spectral(&c, 1.0, 0.01, 10).unwrap();
        let first = &traj.samples[0].aux;
        for s in &traj.samples {
            assert_eq!(&s.aux, first);
        }
    }

    #[test]
    fn flip_changes_sign_only() {
        let c = chain(&[0.7, 1.8, 1.1]);
        let mut state = SpectralFlowState::from_chain(&c).unwrap();
        let before = state.decode(1);
        state.flip_sigma(0, 1).unwrap();
        let after = state.decode(1);
        assert_eq!(after.sigma[0], -before.sigma[0]);
        assert!((after.mu[0] - before.mu[0]).abs() < 1e-12);
        assert!(state.flip_sigma(5, 0).is_err());
    }

    #[test]
    fn identity_27_requires_n4() {
        let c = HillCoefficients::new(vec![0.4, 0.6, 0.5]).unwrap();
        let s = hill::periodic_spectrum(&c);
        let aux = hill::aux_spectrum(&c, 0).unwrap();
        assert!(matches!(identity_27(&s, &aux), Err(Error::Inapplicable(_))));
    }
}
