//! Cross-validation of the spectral route against direct integration.
//!
//! [`end_to_end`] runs both integrations on the same time grid, recomputes
//! every spectral quantity from the directly integrated chain with the
//! [`crate::hill`] routines, and collects each comparison and closed-form
//! identity as a [`CheckResult`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{self, SpectralFlowState, SpectralTrajectory};
use crate::hill::{self, HillCoefficients, HillSpectrum};
use crate::lattice::{integrate_direct, ChainState, ChainTrajectory};
use crate::reconstruct;

/// Tolerances of the individual checks; `scale = max(1, max a)²`.
pub mod tol {
    /// `|W - 1|`, relative.
    pub const WRONSKIAN: f64 = 1e-10;
    /// Spectral identities, times `scale`. The `Δ² - 4` factorization is
    /// additionally divided by `max(1, Δ²)`.
    pub const IDENTITY: f64 = 1e-8;
    /// Spectrum symmetry under negation, times `scale`.
    pub const SYMMETRY: f64 = 1e-10;
    /// Zero trace of the Dirichlet spectra along the flow.
    pub const ZERO_TRACE: f64 = 1e-7;
    /// Gap containment slack, times `scale`.
    pub const CONTAINMENT: f64 = 1e-12;
    /// Relative error of the `t = 0` round trip.
    pub const ROUND_TRIP: f64 = 1e-7;
    /// λ drift along the direct flow, times `scale`.
    pub const LAMBDA_DRIFT: f64 = 1e-6;
    /// Flow-integrated vs recomputed `μ`, times `scale`.
    pub const MU_DEVIATION: f64 = 1e-5;
    /// Relative deviation of reconstructed `u` from the direct run.
    pub const U_DEVIATION: f64 = 1e-4;
    /// Velocity-product identity, times `scale³`.
    pub const IDENTITY_26: f64 = 1e-7;
    /// Weighted velocity sums, absolute.
    pub const IDENTITY_27: f64 = 1e-7;
    /// Odd-period alternating formula vs general formula, relative.
    pub const ODD_PERIOD: f64 = 1e-6;
}

/// Sign comparisons skip points closer than this fraction of the gap width
/// to an edge.
const INTERIOR_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub worst_t: Option<f64>,
    pub worst_index: Option<String>,
}

/// Running maximum that remembers where it was attained.
#[derive(Debug, Clone)]
struct Worst {
    value: f64,
    t: Option<f64>,
    index: Option<String>,
}

impl Worst {
    fn new() -> Self {
        Self {
            value: 0.0,
            t: None,
            index: None,
        }
    }

    fn update(&mut self, value: f64, t: f64, index: impl FnOnce() -> String) {
        // NaN counts as worst
        if !(value <= self.value) {
            self.value = value;
            self.t = Some(t);
            self.index = Some(index());
        }
    }

    fn check(self, name: &str, tolerance: f64) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            max_residual: self.value,
            tolerance,
            pass: self.value <= tolerance,
            worst_t: self.t,
            worst_index: self.index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
    /// Failure injection: reflect the branch sign of gap `j` (0-based) at
    /// shift `k` before the spectral run.
    pub flip_sigma: Option<(usize, usize)>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            dt: 1e-3,
            sample_every: 10,
            flip_sigma: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportConfig {
    pub n: usize,
    pub u: Vec<f64>,
    #[serde(flatten)]
    pub run: VerifyConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub config: ReportConfig,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

/// A chain of period `n` with `u_k` uniform in `[0.5, 2]`, fixed by `seed`.
pub fn random_chain(seed: u64, n: usize) -> Result<ChainState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ChainState::new((0..n).map(|_| rng.gen_range(0.5..=2.0)).collect(), 0.0)
}

/// `count` chains with periods cycling through `periods`; chain `i` is
/// `random_chain(seed + i, ...)`.
pub fn random_corpus(seed: u64, count: usize, periods: &[usize]) -> Result<Vec<ChainState>> {
    (0..count)
        .map(|i| random_chain(seed.wrapping_add(i as u64), periods[i % periods.len()]))
        .collect()
}

/// Largest `|λ_i(t) - λ_i(0)|` over the samples of a direct run, with the
/// spectrum recomputed from each sampled chain.
pub fn lambda_conservation(direct: &ChainTrajectory) -> CheckResult {
    let spectra: Vec<HillSpectrum> = direct
        .samples
        .iter()
        .map(|s| hill::periodic_spectrum(&coeffs_of(&s.u)))
        .collect();
    let scale = coeffs_of(&direct.samples[0].u).scale();
    let mut worst = Worst::new();
    for (s, spec) in direct.samples.iter().zip(&spectra) {
        for (i, (l, l0)) in spec.lambda.iter().zip(&spectra[0].lambda).enumerate() {
            worst.update((l - l0).abs(), s.t, || format!("lambda_{}", i + 1));
        }
    }
    worst.check("lambda_conservation", tol::LAMBDA_DRIFT * scale)
}

fn coeffs_of(u: &[f64]) -> HillCoefficients {
    HillCoefficients::from_chain(&ChainState::new(u.to_vec(), 0.0).expect("trajectory samples are positive"))
}

/// Flow-integrated `μ_{j,k}` and decoded `σ_{j,k}` against the values
/// recomputed from the direct chain at each shared sample.
#[derive(Debug, Clone)]
pub struct MuCrossValidation {
    pub mu: CheckResult,
    pub sigma: CheckResult,
    /// Interior points whose signs were compared.
    pub compared: usize,
}

pub fn mu_cross_validation(
    direct: &ChainTrajectory,
    spectral: &SpectralTrajectory,
) -> Result<MuCrossValidation> {
    if direct.samples.len() != spectral.samples.len() {
        return Err(Error::InvalidArgument(format!(
            "sample counts differ: {} direct vs {} spectral",
            direct.samples.len(),
            spectral.samples.len()
        )));
    }
    let scale = coeffs_of(&direct.samples[0].u).scale();
    let mut mu_worst = Worst::new();
    let mut mismatches = 0usize;
    let mut first_mismatch: Option<(f64, String)> = None;
    let mut compared = 0usize;
    for (ds, ss) in direct.samples.iter().zip(&spectral.samples) {
        if (ds.t - ss.t).abs() > 1e-12 * (1.0 + ds.t.abs()) {
            return Err(Error::InvalidArgument(format!(
                "sample times differ: {} vs {}",
                ds.t, ss.t
            )));
        }
        let c = coeffs_of(&ds.u);
        for (k, flow_aux) in ss.aux.iter().enumerate() {
            let recomputed = hill::aux_spectrum(&c, k as i64)?;
            for (j, gap) in spectral.spectrum.gaps.iter().enumerate() {
                let (m_direct, m_flow) = (recomputed.mu[j], flow_aux.mu[j]);
                mu_worst.update((m_direct - m_flow).abs(), ds.t, || format!("k={k},j={}", j + 1));
                if gap.closed {
                    continue;
                }
                let margin = INTERIOR_FRACTION * (gap.hi - gap.lo);
                let interior = |m: f64| m - gap.lo > margin && gap.hi - m > margin;
                if interior(m_direct) && interior(m_flow) {
                    compared += 1;
                    if recomputed.sigma[j] != flow_aux.sigma[j] {
                        mismatches += 1;
                        first_mismatch.get_or_insert((ds.t, format!("k={k},j={}", j + 1)));
                    }
                }
            }
        }
    }
    let (worst_t, worst_index) = match first_mismatch {
        Some((t, i)) => (Some(t), Some(i)),
        None => (None, None),
    };
    Ok(MuCrossValidation {
        mu: mu_worst.check("mu_cross_validation", tol::MU_DEVIATION * scale),
        sigma: CheckResult {
            name: "sigma_rule".to_string(),
            max_residual: mismatches as f64,
            tolerance: 0.0,
            pass: mismatches == 0,
            worst_t,
            worst_index,
        },
        compared,
    })
}

/// Static identities of one chain: Wronskian, factorization of `Δ² - 4`,
/// the `θ'_{N+1}` product formula, the norm identity, agreement of the two
/// Dirichlet routes, symmetry and zero trace.
pub fn structural_checks(chain: &ChainState) -> Result<Vec<CheckResult>> {
    let c = HillCoefficients::from_chain(chain);
    let scale = c.scale();
    let n = c.period();
    let t = chain.t;
    let spectrum = hill::periodic_spectrum(&c);
    let aux = hill::all_aux_spectra(&c)?;

    let (lo, hi) = (spectrum.lambda[0] - 1.0, spectrum.lambda[2 * n - 1] + 1.0);
    let grid: Vec<f64> = (0..50).map(|i| lo + (hi - lo) * (i as f64 + 0.37) / 50.0).collect();

    let mut wronskian = Worst::new();
    let mut factorization = Worst::new();
    for &l in &grid {
        for k in 0..n as i64 {
            let w = hill::fundamental_solutions(&c, l, k).wronskian_residual();
            wronskian.update(w, t, || format!("lambda={l},k={k}"));
        }
        let r = hill::spectral_polynomial_scaled_residual(&c, &spectrum, l);
        factorization.update(r, t, || format!("lambda={l}"));
    }
    for &l in &spectrum.lambda {
        let r = hill::spectral_polynomial_residual(&c, &spectrum, l);
        factorization.update(r, t, || format!("lambda={l}"));
    }

    let mut theta_prime = Worst::new();
    let mut norm = Worst::new();
    let mut routes = Worst::new();
    let mut containment = Worst::new();
    let mut trace = Worst::new();
    let mut symmetry = Worst::new();
    for a in &aux {
        let k = a.shift;
        theta_prime.update(hill::theta_prime_product_residual(&c, a), t, || format!("k={k}"));
        norm.update(hill::norm_identity_residual(&c, a), t, || format!("k={k}"));
        let roots = hill::dirichlet_roots(&c, &spectrum, k);
        for (j, (m, r)) in a.mu.iter().zip(&roots).enumerate() {
            routes.update((m - r).abs(), t, || format!("k={k},j={}", j + 1));
            let g = spectrum.gaps[j];
            containment.update((g.lo - m).max(m - g.hi).max(0.0), t, || {
                format!("k={k},j={}", j + 1)
            });
            symmetry.update((m + a.mu[n - 2 - j]).abs(), t, || format!("mu k={k},j={}", j + 1));
        }
        trace.update(a.trace().abs(), t, || format!("k={k}"));
    }
    for i in 0..2 * n {
        let d = (spectrum.lambda[i] + spectrum.lambda[2 * n - 1 - i]).abs();
        symmetry.update(d, t, || format!("lambda_{}", i + 1));
    }

    Ok(vec![
        wronskian.check("wronskian", tol::WRONSKIAN),
        factorization.check("discriminant_factorization", tol::IDENTITY * scale),
        theta_prime.check("theta_prime_product", tol::IDENTITY * scale),
        norm.check("norm_identity", tol::IDENTITY * scale),
        routes.check("dirichlet_routes", tol::IDENTITY * scale),
        containment.check("gap_containment", tol::CONTAINMENT * scale),
        trace.check("zero_trace", 1e-12 * scale),
        symmetry.check("spectrum_symmetry", tol::SYMMETRY * scale),
    ])
}

/// Round trip chain → spectra → general trace formula → chain, plus the
/// pair-sum identity and, for odd `N`, the alternating formula.
pub fn round_trip_checks(chain: &ChainState) -> Result<Vec<CheckResult>> {
    let c = HillCoefficients::from_chain(chain);
    let scale = c.scale();
    let n = c.period();
    let spectrum = hill::periodic_spectrum(&c);
    let aux = hill::all_aux_spectra(&c)?;
    let t = chain.t;
    let mut out = Vec::new();

    let mut trip = Worst::new();
    match reconstruct::reconstruct_general(&spectrum, &aux, t) {
        Ok(r) => {
            for (i, (got, want)) in r.u.iter().zip(chain.u()).enumerate() {
                trip.update(((got - want) / want).abs(), t, || format!("u_{}", i + 1));
            }
        }
        Err(e) => trip.update(f64::INFINITY, t, || e.to_string()),
    }
    out.push(trip.check("round_trip", tol::ROUND_TRIP));

    let a = c.a();
    let mut pair = Worst::new();
    for (k, ak) in aux.iter().enumerate() {
        let k = k as i64;
        let lhs = c.at(k).powi(2) + c.at(k + 1).powi(2);
        pair.update((reconstruct::pair_sum(&spectrum, ak) - lhs).abs(), t, || format!("k={k}"));
    }
    out.push(pair.check("pair_sum", tol::ROUND_TRIP * scale * scale));

    if n % 2 == 1 {
        let mut odd = Worst::new();
        for (i, ai) in a.iter().enumerate() {
            let m = i as i64 + 1;
            let v = reconstruct::reconstruct_odd_period(&spectrum, &aux, m)?;
            odd.update(((v - ai * ai) / (ai * ai)).abs(), t, || format!("a_{m}"));
        }
        out.push(odd.check("odd_period_round_trip", tol::ROUND_TRIP));
    }
    Ok(out)
}

/// Velocity identities on one spectral sample. Points with a `μ` exactly
/// on a gap edge are skipped by the weighted-sum identity.
fn identity_checks(
    spectrum: &HillSpectrum,
    traj: &SpectralTrajectory,
    scale: f64,
) -> Vec<CheckResult> {
    let n = spectrum.period();
    let all_open = spectrum.gaps.iter().all(|g| !g.closed);
    let mut id26 = Worst::new();
    let mut id27 = Worst::new();
    let mut lemma = Worst::new();
    let mut trace = Worst::new();
    let mut failure: Option<String> = None;
    for s in &traj.samples {
        for a in &s.aux {
            let k = a.shift;
            trace.update(a.trace().abs(), s.t, || format!("k={k}"));
            if !all_open {
                continue;
            }
            match flow::identity_26_residual(spectrum, a) {
                Ok(r) => id26.update(r, s.t, || format!("k={k}")),
                Err(e) => {
                    failure.get_or_insert(e.to_string());
                }
            }
            if n >= 4 {
                match flow::identity_27(spectrum, a) {
                    Ok(r) => {
                        id27.update(r.max_residual(), s.t, || format!("k={k}"));
                        lemma.update(r.max_lemma_residual(), s.t, || format!("k={k}"));
                    }
                    Err(Error::Degenerate(_)) => {}
                    Err(e) => {
                        failure.get_or_insert(e.to_string());
                    }
                }
            }
        }
    }
    if let Some(msg) = failure {
        id26.update(f64::INFINITY, f64::NAN, || msg);
    }
    let mut out = vec![trace.check("flow_zero_trace", tol::ZERO_TRACE)];
    if all_open {
        out.push(id26.check("identity_velocity_product", tol::IDENTITY_26 * scale.powi(3)));
        if n >= 4 {
            out.push(id27.check("identity_velocity_sums", tol::IDENTITY_27));
            out.push(lemma.check("identity_velocity_sums_lemma", tol::IDENTITY_27));
        }
    }
    out
}

/// Runs direct and spectral evolution of `initial` on a common grid and
/// reports every comparison and identity check.
///
/// Integration failures are returned as errors; everything else, including
/// reconstruction failures caused by corrupted signs, becomes a failed
/// check.
pub fn end_to_end(initial: &ChainState, cfg: &VerifyConfig) -> Result<VerifyReport> {
    let c0 = HillCoefficients::from_chain(initial);
    let scale = c0.scale();
    let n = c0.period();

    let mut flow_state = SpectralFlowState::from_chain(initial)?;
    if let Some((j, k)) = cfg.flip_sigma {
        flow_state.flip_sigma(j, k)?;
    }
    let (direct, spectral) = std::thread::scope(|scope| {
        let direct = scope.spawn(|| integrate_direct(initial, cfg.t_end, cfg.dt, cfg.sample_every));
        let spectral = flow::evolve_state(&flow_state, cfg.t_end, cfg.dt, cfg.sample_every);
        (direct.join().expect("direct integration thread panicked"), spectral)
    });
    let (direct, spectral) = (direct?, spectral?);

    let mut checks = structural_checks(initial)?;
    checks.extend(structural_checks(&direct.last())?.into_iter().map(|mut c| {
        c.name.push_str("_final");
        c
    }));
    checks.extend(round_trip_checks(initial)?);
    checks.push(lambda_conservation(&direct));

    let cross = mu_cross_validation(&direct, &spectral)?;
    checks.push(cross.mu);
    checks.push(cross.sigma);

    let mut containment = Worst::new();
    for s in &spectral.samples {
        for a in &s.aux {
            for (j, (m, g)) in a.mu.iter().zip(&spectral.spectrum.gaps).enumerate() {
                containment.update((g.lo - m).max(m - g.hi).max(0.0), s.t, || {
                    format!("k={},j={}", a.shift, j + 1)
                });
            }
        }
    }
    checks.push(containment.check("flow_gap_containment", tol::CONTAINMENT * scale));
    checks.extend(identity_checks(&spectral.spectrum, &spectral, scale));

    let mut positivity = Worst::new();
    let mut deviation = Worst::new();
    let mut odd = Worst::new();
    for (ds, ss) in direct.samples.iter().zip(&spectral.samples) {
        match reconstruct::reconstruct_general(&spectral.spectrum, &ss.aux, ss.t) {
            Ok(r) => {
                for (i, (got, want)) in r.u.iter().zip(&ds.u).enumerate() {
                    deviation.update(((got - want) / want).abs(), ds.t, || format!("u_{}", i + 1));
                }
                if n % 2 == 1 {
                    for m in 1..=n {
                        let v = reconstruct::reconstruct_odd_period(&spectral.spectrum, &ss.aux, m as i64)?;
                        let general = 0.25 * r.u[m - 1];
                        odd.update(((v - general) / general).abs(), ss.t, || format!("a_{m}"));
                    }
                }
            }
            Err(Error::NegativeAmplitude { site, value, t }) => {
                positivity.update(-value, t, || format!("u_{site}"));
                deviation.update(f64::INFINITY, t, || format!("u_{site}"));
            }
            Err(e) => return Err(e),
        }
    }
    checks.push(positivity.check("reconstruction_positive", 0.0));
    checks.push(deviation.check("u_deviation", tol::U_DEVIATION));
    if n % 2 == 1 {
        checks.push(odd.check("odd_period_agreement", tol::ODD_PERIOD));
    }

    Ok(VerifyReport {
        checks,
        config: ReportConfig {
            n,
            u: initial.u().to_vec(),
            run: cfg.clone(),
        },
    })
}
