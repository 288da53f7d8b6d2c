//! Static spectral theory of the zero-diagonal discrete Hill equation
//!
//! ```text
//! a_{n-1} y_{n-1} + a_n y_{n+1} = λ y_n,    a_{n+N} = a_n > 0.
//! ```
//!
//! Coefficients are stored as `a_1..a_N` (see [`crate::lattice::slot`]).
//! A shift `k` replaces `a_n` by `a_{n+k}` everywhere; the periodic
//! spectrum does not depend on it, the Dirichlet spectrum does.

pub mod linalg;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{slot, ChainState};

/// Gap `j` counts as closed when `λ_{2j+1} - λ_{2j} ≤ CLOSED_GAP_TOL (1 + |λ_{2j}|)`.
pub const CLOSED_GAP_TOL: f64 = 1e-10;

/// Branch signs are set to `+1` when `(θ_N - 1/θ_N)² ≤ EDGE_TOL`.
pub const EDGE_TOL: f64 = 1e-12;

/// Off-diagonal coefficients `a_1..a_N`; the diagonal is identically zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HillCoefficients {
    a: Vec<f64>,
}

impl HillCoefficients {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::InvalidChain {
                field: "a",
                reason: format!("period must be at least 2, got {}", a.len()),
            });
        }
        if let Some((i, v)) = a.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidChain {
                field: "a",
                reason: format!("a_{} = {v} is not a finite positive number", i + 1),
            });
        }
        Ok(Self { a })
    }

    pub fn from_chain(chain: &ChainState) -> Self {
        Self { a: chain.a() }
    }

    pub fn period(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// `a_n` for any lattice index `n`.
    pub fn at(&self, n: i64) -> f64 {
        self.a[slot(n, self.a.len())]
    }

    pub fn product(&self) -> f64 {
        self.a.iter().product()
    }

    /// `max(1, max_n a_n)²`, the reference magnitude for tolerances.
    pub fn scale(&self) -> f64 {
        let m = self.a.iter().copied().fold(1.0, f64::max);
        m * m
    }
}

/// `θ` and `φ` with their `λ`-derivatives on `n = 0..=N+1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FundamentalPair {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub theta_prime: Vec<f64>,
    pub phi_prime: Vec<f64>,
    pub lambda: f64,
    pub shift: i64,
}

impl FundamentalPair {
    fn period(&self) -> usize {
        self.theta.len() - 2
    }

    /// `θ_N φ_{N+1} - θ_{N+1} φ_N`; equal to one for every `λ`.
    pub fn wronskian(&self) -> f64 {
        let n = self.period();
        self.theta[n] * self.phi[n + 1] - self.theta[n + 1] * self.phi[n]
    }

    /// `|W - 1|` relative to the magnitude of the two products in `W`,
    /// which grow like `|λ/a|^{2N}` away from the spectrum.
    pub fn wronskian_residual(&self) -> f64 {
        let n = self.period();
        let size = (self.theta[n] * self.phi[n + 1]).abs() + (self.theta[n + 1] * self.phi[n]).abs();
        (self.wronskian() - 1.0).abs() / size.max(1.0)
    }

    /// `Δ(λ) = θ_N + φ_{N+1}`.
    pub fn discriminant(&self) -> f64 {
        let n = self.period();
        self.theta[n] + self.phi[n + 1]
    }
}

/// Generates `θ` (`θ_0 = 1, θ_1 = 0`) and `φ` (`φ_0 = 0, φ_1 = 1`) together
/// with their derivatives in `λ`, using the coefficients shifted by `shift`.
pub fn fundamental_solutions(c: &HillCoefficients, lambda: f64, shift: i64) -> FundamentalPair {
    let n = c.period();
    let mut theta = vec![0.0; n + 2];
    let mut phi = vec![0.0; n + 2];
    let mut dtheta = vec![0.0; n + 2];
    let mut dphi = vec![0.0; n + 2];
    theta[0] = 1.0;
    phi[1] = 1.0;
    for m in 1..=n {
        let prev = c.at(m as i64 - 1 + shift);
        let cur = c.at(m as i64 + shift);
        theta[m + 1] = (lambda * theta[m] - prev * theta[m - 1]) / cur;
        phi[m + 1] = (lambda * phi[m] - prev * phi[m - 1]) / cur;
        dtheta[m + 1] = (lambda * dtheta[m] + theta[m] - prev * dtheta[m - 1]) / cur;
        dphi[m + 1] = (lambda * dphi[m] + phi[m] - prev * dphi[m - 1]) / cur;
    }
    FundamentalPair {
        theta,
        phi,
        theta_prime: dtheta,
        phi_prime: dphi,
        lambda,
        shift,
    }
}

/// `Δ(λ) = θ_N(λ) + φ_{N+1}(λ)`.
pub fn discriminant(c: &HillCoefficients, lambda: f64) -> f64 {
    fundamental_solutions(c, lambda, 0).discriminant()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gap {
    pub lo: f64,
    pub hi: f64,
    pub closed: bool,
}

impl Gap {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }
}

/// The `2N` roots of `Δ² = 4`, ascending with multiplicity, and the `N - 1`
/// gaps `[λ_{2j}, λ_{2j+1}]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HillSpectrum {
    pub lambda: Vec<f64>,
    pub gaps: Vec<Gap>,
}

impl HillSpectrum {
    pub fn period(&self) -> usize {
        self.lambda.len() / 2
    }

    /// `Π_i (x - λ_i)`.
    pub fn radicand(&self, x: f64) -> f64 {
        self.lambda.iter().map(|l| x - l).product()
    }

    /// `Π_i (x - λ_i)` without the two edges of gap `j` (0-based).
    pub fn radicand_without_gap(&self, x: f64, j: usize) -> f64 {
        self.lambda
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 2 * j + 1 && *i != 2 * j + 2)
            .map(|(_, l)| x - l)
            .product()
    }

    /// `Σ_i λ_i²`.
    pub fn second_moment(&self) -> f64 {
        self.lambda.iter().map(|l| l * l).sum()
    }
}

fn bloch_matrix(c: &HillCoefficients, corner_sign: f64) -> Vec<Vec<f64>> {
    let n = c.period();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n - 1 {
        // a_{i+1} couples sites i+1 and i+2
        m[i][i + 1] += c.a[i];
        m[i + 1][i] += c.a[i];
    }
    // the boundary coupling a_N between sites N and N+1 ≡ ±site 1;
    // accumulating handles N = 2, where it lands on an existing entry
    m[n - 1][0] += corner_sign * c.a[n - 1];
    m[0][n - 1] += corner_sign * c.a[n - 1];
    m
}

/// Periodic (`Δ = 2`) and antiperiodic (`Δ = -2`) eigenvalues, merged.
pub fn periodic_spectrum(c: &HillCoefficients) -> HillSpectrum {
    let mut lambda = linalg::jacobi_eigenvalues(bloch_matrix(c, 1.0));
    lambda.extend(linalg::jacobi_eigenvalues(bloch_matrix(c, -1.0)));
    lambda.sort_by(f64::total_cmp);
    let gaps = (1..c.period())
        .map(|j| {
            let (lo, hi) = (lambda[2 * j - 1], lambda[2 * j]);
            Gap {
                lo,
                hi,
                closed: hi - lo <= CLOSED_GAP_TOL * (1.0 + lo.abs()),
            }
        })
        .collect();
    HillSpectrum { lambda, gaps }
}

/// Shifted Dirichlet spectrum with its branch signs.
///
/// `sigma` is empty until filled by [`sigma_signs`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuxSpectrum {
    pub shift: i64,
    pub mu: Vec<f64>,
    pub sigma: Vec<i8>,
}

impl AuxSpectrum {
    pub fn trace(&self) -> f64 {
        self.mu.iter().sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.mu.iter().map(|m| m * m).sum()
    }

    /// `Π_{i≠j} (μ_j - μ_i)`.
    pub fn vandermonde_factor(&self, j: usize) -> f64 {
        let mj = self.mu[j];
        self.mu
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, mi)| mj - mi)
            .product()
    }
}

/// Eigenvalues of the `(N-1)×(N-1)` zero-diagonal tridiagonal matrix with
/// off-diagonals `a_{2+k}, .., a_{N-1+k}` (Dirichlet conditions
/// `y_1 = y_{N+1} = 0`), by Sturm bisection.
pub fn dirichlet_spectrum(c: &HillCoefficients, shift: i64) -> AuxSpectrum {
    let n = c.period();
    let off: Vec<f64> = (2..n as i64).map(|m| c.at(m + shift)).collect();
    let diag = vec![0.0; n - 1];
    AuxSpectrum {
        shift,
        mu: linalg::tridiagonal_eigenvalues(&diag, &off),
        sigma: Vec::new(),
    }
}

/// The same Dirichlet spectrum found as the roots of `θ_{N+1}(λ)`, one per
/// gap, by bisection on the gap interval.
pub fn dirichlet_roots(c: &HillCoefficients, spectrum: &HillSpectrum, shift: i64) -> Vec<f64> {
    let n = c.period();
    let theta_end = |x: f64| fundamental_solutions(c, x, shift).theta[n + 1];
    spectrum
        .gaps
        .iter()
        .map(|g| {
            if g.closed {
                return g.mid();
            }
            let (mut a, mut b) = (g.lo, g.hi);
            let (fa, fb) = (theta_end(a), theta_end(b));
            if fa == 0.0 {
                return a;
            }
            if fb == 0.0 || fa.signum() == fb.signum() {
                // root sits on an edge up to rounding
                return if fa.abs() < fb.abs() { a } else { b };
            }
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                let fm = theta_end(mid);
                if fm == 0.0 {
                    return mid;
                }
                if fm.signum() == fa.signum() {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Fills `σ_{j,k} = sign(θ_N(μ_{j,k}) - 1/θ_N(μ_{j,k}))`, with `+1` at gap
/// edges and in closed gaps.
pub fn sigma_signs(c: &HillCoefficients, aux: &AuxSpectrum) -> Result<AuxSpectrum> {
    let n = c.period();
    let sigma = aux
        .mu
        .iter()
        .map(|&mu| {
            let theta_n = fundamental_solutions(c, mu, aux.shift).theta[n];
            if theta_n == 0.0 {
                return Err(Error::Degenerate(format!(
                    "theta_N vanishes at mu = {mu} (shift {})",
                    aux.shift
                )));
            }
            let v = theta_n - 1.0 / theta_n;
            Ok(if v * v <= EDGE_TOL || v > 0.0 { 1 } else { -1 })
        })
        .collect::<Result<Vec<i8>>>()?;
    Ok(AuxSpectrum {
        sigma,
        ..aux.clone()
    })
}

/// Dirichlet spectrum and signs for one shift.
pub fn aux_spectrum(c: &HillCoefficients, shift: i64) -> Result<AuxSpectrum> {
    sigma_signs(c, &dirichlet_spectrum(c, shift))
}

/// Dirichlet spectra and signs for shifts `0..N`.
pub fn all_aux_spectra(c: &HillCoefficients) -> Result<Vec<AuxSpectrum>> {
    (0..c.period() as i64).map(|k| aux_spectrum(c, k)).collect()
}

/// `|Δ²(λ) - 4 - (Π a_k)^{-2} Π_i (λ - λ_i)|`.
pub fn spectral_polynomial_residual(c: &HillCoefficients, spectrum: &HillSpectrum, lambda: f64) -> f64 {
    let d = discriminant(c, lambda);
    let p = c.product();
    (d * d - 4.0 - spectrum.radicand(lambda) / (p * p)).abs()
}

/// [`spectral_polynomial_residual`] divided by `max(1, Δ²(λ))`, so that it
/// measures rounding rather than the size of `Δ` far outside the bands.
pub fn spectral_polynomial_scaled_residual(
    c: &HillCoefficients,
    spectrum: &HillSpectrum,
    lambda: f64,
) -> f64 {
    let d = discriminant(c, lambda);
    spectral_polynomial_residual(c, spectrum, lambda) / (d * d).max(1.0)
}

/// Largest mismatch between `θ'_{N+1}(μ_j)` from the derivative recurrence
/// and the product `-a_0 (Π a)^{-1} Π_{i≠j}(μ_j - μ_i)`.
pub fn theta_prime_product_residual(c: &HillCoefficients, aux: &AuxSpectrum) -> f64 {
    let n = c.period();
    let a0 = c.at(aux.shift);
    let p = c.product();
    (0..aux.mu.len())
        .map(|j| {
            let pair = fundamental_solutions(c, aux.mu[j], aux.shift);
            let product = -a0 / p * aux.vandermonde_factor(j);
            (pair.theta_prime[n + 1] - product).abs()
        })
        .fold(0.0, f64::max)
}

/// Largest mismatch in `Σ_{n=1}^N θ_n(μ_j)² = a_N θ_N(μ_j) θ'_{N+1}(μ_j)`.
pub fn norm_identity_residual(c: &HillCoefficients, aux: &AuxSpectrum) -> f64 {
    let n = c.period();
    let a_n = c.at(n as i64 + aux.shift);
    aux.mu
        .iter()
        .map(|&mu| {
            let pair = fundamental_solutions(c, mu, aux.shift);
            let norm: f64 = pair.theta[1..=n].iter().map(|t| t * t).sum();
            (norm - a_n * pair.theta[n] * pair.theta_prime[n + 1]).abs()
        })
        .fold(0.0, f64::max)
}
