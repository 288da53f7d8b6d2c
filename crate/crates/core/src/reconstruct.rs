//! Trace formulas: the chain amplitudes from spectral data.
//!
//! With `M = Σ_i λ_i²` and `m_k = Σ_j μ_{j,k}²`,
//!
//! ```text
//! a_k² = M/8 - m_k/4 - ½ Σ_j σ_{j,k} √(Π_i(μ_{j,k} - λ_i)) / Π_{i≠j}(μ_{j,k} - μ_{i,k})   (general)
//! a_k² + a_{k+1}² = M/4 - m_k/2                                                            (pair sum)
//! a_m² = M/8 - ¼ Σ_{k<N} (-1)^k m_{m+k}                                                    (odd N)
//! a_k² = M/8 - m_k/4 + ⅛ d/dt ln Π_j μ_{j,k}                                               (log-derivative)
//! ```
//!
//! Shift `k` yields `a_k`, which for `k = 0` is `a_N`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{dubrovin_velocity, flow_terms, SpectralTrajectory};
use crate::hill::{AuxSpectrum, HillSpectrum};
use crate::lattice::slot;

/// Negative `a²` above this (times `scale²`) is clamped, below it is an error.
pub const NEGATIVE_A2_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionReport {
    pub t: f64,
    /// `u_1..u_N`.
    pub u: Vec<f64>,
    /// `Σ λ_i²`.
    pub lambda_moment: f64,
    /// `Σ_j μ_{j,k}²`, indexed by shift.
    pub mu_moments: Vec<f64>,
    /// `½ Σ_j σ √· / Π`, indexed by shift; subtracted from the moment part.
    pub flow_terms: Vec<f64>,
    /// Sites whose slightly negative `a²` was clamped to zero.
    pub clamped: Vec<usize>,
}

impl ReconstructionReport {
    /// `a_n²` for `n = 1..N`.
    pub fn a_squared(&self) -> Vec<f64> {
        self.u.iter().map(|u| 0.25 * u).collect()
    }
}

/// Reference magnitude `max(1, max a)²`, with `max a` bounded via the
/// spectral radius `≤ 2 max a`.
fn spectral_scale(spectrum: &HillSpectrum) -> f64 {
    let r = spectrum.lambda.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    (0.5 * r).max(1.0).powi(2)
}

fn check_shifts(spectrum: &HillSpectrum, aux: &[AuxSpectrum]) -> Result<usize> {
    let n = spectrum.period();
    if aux.len() != n {
        return Err(Error::InvalidArgument(format!(
            "need Dirichlet data for all {n} shifts, got {}",
            aux.len()
        )));
    }
    for (k, a) in aux.iter().enumerate() {
        if a.shift.rem_euclid(n as i64) as usize != k || a.mu.len() + 1 != n {
            return Err(Error::InvalidArgument(format!(
                "Dirichlet data slot {k} holds shift {} with {} eigenvalues",
                a.shift,
                a.mu.len()
            )));
        }
    }
    Ok(n)
}

/// `M/4 - m_k/2`, which equals `a_k² + a_{k+1}²`.
pub fn pair_sum(spectrum: &HillSpectrum, aux: &AuxSpectrum) -> f64 {
    0.25 * spectrum.second_moment() - 0.5 * aux.second_moment()
}

/// Rebuilds every `a_k²` with the general trace formula.
pub fn reconstruct_general(
    spectrum: &HillSpectrum,
    aux: &[AuxSpectrum],
    t: f64,
) -> Result<ReconstructionReport> {
    let n = check_shifts(spectrum, aux)?;
    let lambda_moment = spectrum.second_moment();
    let floor = -NEGATIVE_A2_TOL * spectral_scale(spectrum).powi(2);
    let mut u = vec![0.0; n];
    let mut mu_moments = Vec::with_capacity(n);
    let mut flow = Vec::with_capacity(n);
    let mut clamped = Vec::new();
    for (k, a) in aux.iter().enumerate() {
        let moment = a.second_moment();
        let half_flow = 0.5 * flow_terms(spectrum, a)?.iter().sum::<f64>();
        let a2 = lambda_moment / 8.0 - moment / 4.0 - half_flow;
        let site = slot(k as i64, n);
        if a2 < floor {
            return Err(Error::NegativeAmplitude {
                site: site + 1,
                value: a2,
                t,
            });
        }
        if a2 < 0.0 {
            clamped.push(site + 1);
        }
        u[site] = 4.0 * a2.max(0.0);
        mu_moments.push(moment);
        flow.push(half_flow);
    }
    Ok(ReconstructionReport {
        t,
        u,
        lambda_moment,
        mu_moments,
        flow_terms: flow,
        clamped,
    })
}

/// `a_m²` from the alternating sum over shifts, odd `N` only. Uses no
/// branch signs.
pub fn reconstruct_odd_period(spectrum: &HillSpectrum, aux: &[AuxSpectrum], m: i64) -> Result<f64> {
    let n = check_shifts(spectrum, aux)?;
    if n % 2 == 0 {
        return Err(Error::Inapplicable(format!(
            "alternating-sum formula needs odd period, got {n}"
        )));
    }
    let alternating: f64 = (0..n as i64)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * aux[(m + k).rem_euclid(n as i64) as usize].second_moment()
        })
        .sum();
    Ok(spectrum.second_moment() / 8.0 - 0.25 * alternating)
}

/// `Σ_j μ'_{j,k} / μ_{j,k}` with `μ'` from the Dubrovin equations.
pub fn log_derivative_analytic(spectrum: &HillSpectrum, aux: &AuxSpectrum) -> Result<f64> {
    let mut total = 0.0;
    for (j, &mu) in aux.mu.iter().enumerate() {
        if mu == 0.0 {
            return Err(Error::Inapplicable(format!("mu_{} = 0", j + 1)));
        }
        let sigma = aux.sigma.get(j).copied().ok_or_else(|| {
            Error::InvalidArgument(format!("shift {}: branch signs missing", aux.shift))
        })?;
        total += dubrovin_velocity(mu, sigma, j, &aux.mu, spectrum)? / mu;
    }
    Ok(total)
}

fn sample_at(traj: &SpectralTrajectory, t: f64) -> Result<usize> {
    traj.samples
        .iter()
        .position(|s| (s.t - t).abs() <= 1e-9 * (1.0 + t.abs()))
        .ok_or_else(|| Error::InvalidArgument(format!("trajectory has no sample at t = {t}")))
}

/// `a_k²(t)` with `d/dt ln|Π_j μ_{j,k}|` by central differences of step `h`
/// over trajectory samples at `t - h`, `t`, `t + h`.
pub fn reconstruct_log_derivative(
    spectrum: &HillSpectrum,
    traj: &SpectralTrajectory,
    k: usize,
    t: f64,
    h: f64,
) -> Result<f64> {
    let n = spectrum.period();
    if k >= n {
        return Err(Error::InvalidArgument(format!("shift {k} out of range")));
    }
    let guard = 1e-8 * spectral_scale(spectrum);
    let log_abs_product = |i: usize| -> Result<f64> {
        let mu = &traj.samples[i].aux[k].mu;
        if let Some(m) = mu.iter().find(|m| m.abs() <= guard) {
            return Err(Error::Inapplicable(format!(
                "mu = {m} at shift {k}, t = {}: logarithm undefined",
                traj.samples[i].t
            )));
        }
        Ok(mu.iter().map(|m| m.abs().ln()).sum())
    };
    let (im, i0, ip) = (sample_at(traj, t - h)?, sample_at(traj, t)?, sample_at(traj, t + h)?);
    log_abs_product(i0)?;
    let derivative = (log_abs_product(ip)? - log_abs_product(im)?) / (2.0 * h);
    let moment = traj.samples[i0].aux[k].second_moment();
    Ok(spectrum.second_moment() / 8.0 - moment / 4.0 + derivative / 8.0)
}

/// Applies [`reconstruct_general`] to every sample.
pub fn reconstruct_trajectory(traj: &SpectralTrajectory) -> Result<Vec<ReconstructionReport>> {
    traj.samples
        .iter()
        .map(|s| reconstruct_general(&traj.spectrum, &s.aux, s.t))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hill::{all_aux_spectra, periodic_spectrum, HillCoefficients};

    fn data(a: &[f64]) -> (HillSpectrum, Vec<AuxSpectrum>) {
        let c = HillCoefficients::new(a.to_vec()).unwrap();
        (periodic_spectrum(&c), all_aux_spectra(&c).unwrap())
    }

    #[test]
    fn constant_n3_exact_moments() {
        let (s, aux) = data(&[1.0, 1.0, 1.0]);
        assert!((s.second_moment() - 12.0).abs() < 1e-12);
        for a in &aux {
            assert!((a.second_moment() - 2.0).abs() < 1e-12);
        }
        let r = reconstruct_general(&s, &aux, 0.0).unwrap();
        assert!(r.flow_terms.iter().all(|f| *f == 0.0));
        for u in r.u {
            assert!((u - 4.0).abs() < 1e-11);
        }
    }

    #[test]
    fn round_trip_small_chain() {
        let a = [0.41, 0.66, 0.52, 0.37];
        let (s, aux) = data(&a);
        let r = reconstruct_general(&s, &aux, 0.0).unwrap();
        for (got, want) in r.a_squared().iter().zip(a) {
            assert!((got - want * want).abs() < 1e-12, "{got} vs {}", want * want);
        }
    }

    #[test]
    fn odd_period_formula() {
        let a = [1.0, 2.0, 3.0];
        let (s, aux) = data(&a);
        assert!((reconstruct_odd_period(&s, &aux, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((reconstruct_odd_period(&s, &aux, 0).unwrap() - 9.0).abs() < 1e-11);
        let (s4, aux4) = data(&[0.5, 0.6, 0.7, 0.8]);
        assert!(reconstruct_odd_period(&s4, &aux4, 0).is_err());
    }

    #[test]
    fn pair_sum_holds() {
        let a = [0.45, 0.7, 0.38, 0.61, 0.5];
        let (s, aux) = data(&a);
        for k in 0..5_i64 {
            let lhs = a[slot(k, 5)].powi(2) + a[slot(k + 1, 5)].powi(2);
            assert!((pair_sum(&s, &aux[k as usize]) - lhs).abs() < 1e-12);
        }
    }

    #[test]
    fn flipped_sign_is_detected() {
        let (s, mut aux) = data(&[0.3, 0.7, 0.45]);
        aux[1].sigma[0] = -aux[1].sigma[0];
        match reconstruct_general(&s, &aux, 0.0) {
            Err(Error::NegativeAmplitude { .. }) => {}
            Ok(r) => {
                let a2 = r.a_squared();
                assert!((a2[0] - 0.09).abs() > 1e-3, "flip went unnoticed");
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn analytic_log_derivative_matches_flow_term() {
        let (s, aux) = data(&[0.45, 0.7, 0.38, 0.61, 0.5]);
        let r = reconstruct_general(&s, &aux, 0.0).unwrap();
        for (k, a) in aux.iter().enumerate() {
            let d = log_derivative_analytic(&s, a).unwrap();
            assert!((d + 8.0 * r.flow_terms[k]).abs() < 1e-11);
        }
    }

    #[test]
    fn rejects_incomplete_data() {
        let (s, aux) = data(&[0.5, 0.6, 0.7]);
        assert!(reconstruct_general(&s, &aux[..2], 0.0).is_err());
    }
}
