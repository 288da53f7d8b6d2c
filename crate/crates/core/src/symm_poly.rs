//! Complete homogeneous symmetric polynomials and generalized Lagrange
//! power sums.
//!
//! For pairwise distinct nodes `x_0..x_n` the power sum
//!
//! ```text
//! f(s, n) = Σ_j x_j^s / Π_{l≠j} (x_j - x_l)
//! ```
//!
//! has a closed form for every integer `s`:
//!
//! ```text
//! s ≤ -1      : (-1)^n / Π x_j · g_{|s|-1}(1/x_0, .., 1/x_n)
//! 0 ≤ s < n   : 0
//! s = n + k   : g_k(x_0, .., x_n)
//! ```
//!
//! where `g_l` is the complete homogeneous symmetric polynomial of degree
//! `l`. Everything here is generic over [`Scalar`], so the same code runs in
//! `f64` and in exact rationals.

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Number type the power sums can be evaluated in.
pub trait Scalar: Clone + Num + Signed + Neg<Output = Self> + PartialEq + fmt::Debug {
    /// Nearest `f64`, used only for reporting and tolerancing.
    fn approx(&self) -> f64;

    fn magnitude(&self) -> f64 {
        self.approx().abs()
    }
}

impl Scalar for f64 {
    fn approx(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn approx(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// `n + 1` pairwise distinct interpolation nodes, `n ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet<T> {
    x: Vec<T>,
}

impl<T: Scalar> NodeSet<T> {
    pub fn new(x: Vec<T>) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::InvalidNodes(format!(
                "need at least two nodes, got {}",
                x.len()
            )));
        }
        for j in 0..x.len() {
            for m in (j + 1)..x.len() {
                if x[j] == x[m] {
                    return Err(Error::InvalidNodes(format!("x[{j}] == x[{m}]")));
                }
            }
        }
        Ok(Self { x })
    }

    /// Degree parameter `n`; the set holds `n + 1` nodes.
    pub fn n(&self) -> usize {
        self.x.len() - 1
    }

    pub fn nodes(&self) -> &[T] {
        &self.x
    }

    /// Drops the last node.
    fn leading(&self) -> Result<Self> {
        Self::new(self.x[..self.x.len() - 1].to_vec())
    }

    fn check_nonzero(&self, s: i64) -> Result<()> {
        if s <= -1 {
            if let Some(j) = self.x.iter().position(Zero::is_zero) {
                return Err(Error::InvalidNodes(format!(
                    "x[{j}] = 0 with negative exponent s = {s}"
                )));
            }
        }
        Ok(())
    }
}

/// `g_l(u_0, .., u_n)`: sum of all monomials of total degree `l`.
///
/// Uses `g_l(u_0..u_i) = g_l(u_0..u_{i-1}) + u_i g_{l-1}(u_0..u_i)`, which
/// costs `O(n l)` multiplications.
pub fn complete_homogeneous<T: Scalar>(l: usize, u: &[T]) -> T {
    let mut g = vec![T::zero(); l + 1];
    g[0] = T::one();
    for ui in u {
        for m in 1..=l {
            let step = ui.clone() * g[m - 1].clone();
            g[m] = g[m].clone() + step;
        }
    }
    if u.is_empty() && l > 0 {
        return T::zero();
    }
    g.swap_remove(l)
}

fn int_pow<T: Scalar>(x: &T, s: i64) -> T {
    let p = num_traits::pow(x.clone(), s.unsigned_abs() as usize);
    if s < 0 {
        T::one() / p
    } else {
        p
    }
}

/// Literal sum together with the largest summand magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSum<T> {
    pub value: T,
    pub max_term: f64,
}

/// Direct evaluation of `Σ_j x_j^s / Π_{l≠j}(x_j - x_l)` with the largest
/// term magnitude as a conditioning proxy.
pub fn lagrange_power_sum_terms<T: Scalar>(s: i64, x: &NodeSet<T>) -> Result<PowerSum<T>> {
    x.check_nonzero(s)?;
    let nodes = x.nodes();
    let mut value = T::zero();
    let mut max_term = 0.0_f64;
    for (j, xj) in nodes.iter().enumerate() {
        let mut denom = T::one();
        for (l, xl) in nodes.iter().enumerate() {
            if l != j {
                denom = denom * (xj.clone() - xl.clone());
            }
        }
        let term = int_pow(xj, s) / denom;
        max_term = max_term.max(term.magnitude());
        value = value + term;
    }
    Ok(PowerSum { value, max_term })
}

/// Direct evaluation of the power sum `f(s, n)`.
pub fn lagrange_power_sum<T: Scalar>(s: i64, x: &NodeSet<T>) -> Result<T> {
    lagrange_power_sum_terms(s, x).map(|p| p.value)
}

/// Closed form of `f(s, n)`, with the branch selected from `s` and `n`.
pub fn lagrange_closed_form<T: Scalar>(s: i64, x: &NodeSet<T>) -> Result<T> {
    x.check_nonzero(s)?;
    let n = x.n() as i64;
    let nodes = x.nodes();
    if s <= -1 {
        let recip: Vec<T> = nodes.iter().map(|v| T::one() / v.clone()).collect();
        let prod = nodes.iter().cloned().fold(T::one(), |acc, v| acc * v);
        let sign = if n % 2 == 0 { T::one() } else { -T::one() };
        let g = complete_homogeneous((s.unsigned_abs() - 1) as usize, &recip);
        Ok(sign / prod * g)
    } else if s < n {
        Ok(T::zero())
    } else {
        Ok(complete_homogeneous((s - n) as usize, nodes))
    }
}

/// `|f(s,n) - f(s-1,n-1) - f(s-1,n) x_n|` by direct summation.
pub fn recursion_check<T: Scalar>(s: i64, x: &NodeSet<T>) -> Result<T> {
    if x.n() < 2 {
        return Err(Error::InvalidNodes(
            "recursion check needs n >= 2".to_string(),
        ));
    }
    let xn = x.nodes()[x.n()].clone();
    let lhs = lagrange_power_sum(s, x)?;
    let first = lagrange_power_sum(s - 1, &x.leading()?)?;
    let second = lagrange_power_sum(s - 1, x)?;
    Ok((lhs - first - second * xn).abs())
}

/// Arithmetic used by [`lemma_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Exact,
    Float,
}

/// Relative tolerance for float-mode residuals, in units of the largest
/// summand.
pub const FLOAT_LEMMA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct LemmaRow {
    pub n: usize,
    pub s: i64,
    /// Closed-form value on the first trial (reporting only).
    pub value: f64,
    pub max_residual: f64,
    pub max_term: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub n: usize,
    pub s_min: i64,
    pub s_max: i64,
    pub trials: usize,
    pub seed: u64,
    pub mode: SweepMode,
}

fn random_rational_nodes(rng: &mut ChaCha8Rng, count: usize) -> Vec<BigRational> {
    let mut out: Vec<BigRational> = Vec::with_capacity(count);
    while out.len() < count {
        let mut num: i64 = rng.gen_range(-30..=30);
        if num == 0 {
            num = 1;
        }
        let den: i64 = rng.gen_range(1..=9);
        let r = BigRational::new(BigInt::from(num), BigInt::from(den));
        if !out.contains(&r) {
            out.push(r);
        }
    }
    out
}

fn random_float_nodes(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(count);
    while out.len() < count {
        let mag: f64 = rng.gen_range(0.1..10.0);
        let v = if rng.gen_bool(0.5) { mag } else { -mag };
        if out.iter().all(|w| (w - v).abs() > 1e-6) {
            out.push(v);
        }
    }
    out
}

fn sweep_rows<T: Scalar>(
    cfg: &SweepConfig,
    node_sets: &[NodeSet<T>],
    residual_ok: impl Fn(&T, f64) -> bool,
) -> Result<Vec<LemmaRow>> {
    let mut rows = Vec::new();
    for s in cfg.s_min..=cfg.s_max {
        let mut row = LemmaRow {
            n: cfg.n,
            s,
            value: f64::NAN,
            max_residual: 0.0,
            max_term: 0.0,
            pass: true,
        };
        for (trial, x) in node_sets.iter().enumerate() {
            let direct = lagrange_power_sum_terms(s, x)?;
            let closed = lagrange_closed_form(s, x)?;
            if trial == 0 {
                row.value = closed.approx();
            }
            let residual = (direct.value - closed).abs();
            row.pass &= residual_ok(&residual, direct.max_term);
            row.max_residual = row.max_residual.max(residual.magnitude());
            row.max_term = row.max_term.max(direct.max_term);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Compares direct summation against the closed form over random node
/// sets, one row per exponent `s`.
///
/// Exact mode uses rational nodes and requires residuals to vanish
/// identically; float mode accepts `residual ≤ FLOAT_LEMMA_TOL · max_term`.
pub fn lemma_sweep(cfg: &SweepConfig) -> Result<Vec<LemmaRow>> {
    if cfg.n < 1 {
        return Err(Error::InvalidArgument("n must be >= 1".to_string()));
    }
    if cfg.s_min > cfg.s_max {
        return Err(Error::InvalidArgument("s_min > s_max".to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let trials = cfg.trials.max(1);
    match cfg.mode {
        SweepMode::Exact => {
            let sets = (0..trials)
                .map(|_| NodeSet::new(random_rational_nodes(&mut rng, cfg.n + 1)))
                .collect::<Result<Vec<_>>>()?;
            sweep_rows(cfg, &sets, |r, _| r.is_zero())
        }
        SweepMode::Float => {
            let sets = (0..trials)
                .map(|_| NodeSet::new(random_float_nodes(&mut rng, cfg.n + 1)))
                .collect::<Result<Vec<_>>>()?;
            sweep_rows(cfg, &sets, |r, max_term| *r <= FLOAT_LEMMA_TOL * max_term)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn qs(v: &[i64]) -> NodeSet<BigRational> {
        NodeSet::new(v.iter().map(|&n| q(n, 1)).collect()).unwrap()
    }

    #[test]
    fn complete_homogeneous_small_cases() {
        assert_eq!(complete_homogeneous(0, &[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(complete_homogeneous(0, &[] as &[f64]), 1.0);
        assert_eq!(complete_homogeneous(1, &[1.0, 2.0, 3.0]), 6.0);
        assert_eq!(complete_homogeneous(2, &[1.0, 2.0, 3.0]), 25.0);
        assert_eq!(complete_homogeneous(3, &[] as &[f64]), 0.0);
    }

    #[test]
    fn complete_homogeneous_matches_enumeration() {
        // brute force over all multi-indices of total degree l
        fn brute(l: usize, u: &[i64]) -> i64 {
            fn rec(l: usize, u: &[i64]) -> i64 {
                match u.split_first() {
                    None => i64::from(l == 0),
                    Some((head, tail)) => (0..=l)
                        .map(|m| head.pow(m as u32) * rec(l - m, tail))
                        .sum(),
                }
            }
            rec(l, u)
        }
        let u = [2_i64, -3, 5, 1];
        for l in 0..7 {
            let uq: Vec<BigRational> = u.iter().map(|&v| q(v, 1)).collect();
            assert_eq!(complete_homogeneous(l, &uq), q(brute(l, &u), 1), "l = {l}");
        }
    }

    #[test]
    fn power_sum_examples() {
        let x = qs(&[1, 2, 3]);
        assert_eq!(lagrange_power_sum(0, &x).unwrap(), q(0, 1));
        assert_eq!(lagrange_power_sum(-1, &x).unwrap(), q(1, 6));
        assert_eq!(lagrange_power_sum(4, &x).unwrap(), q(25, 1));
    }

    #[test]
    fn closed_form_examples() {
        let x = qs(&[1, 2, 3]);
        assert_eq!(lagrange_closed_form(2, &x).unwrap(), q(1, 1));
        assert_eq!(lagrange_closed_form(1, &x).unwrap(), q(0, 1));
        // direct: (1/4)/(2-4) + (1/16)/(4-2) = -1/8 + 1/32 = -3/32
        let y = qs(&[2, 4]);
        assert_eq!(lagrange_power_sum(-2, &y).unwrap(), q(-3, 32));
        assert_eq!(lagrange_closed_form(-2, &y).unwrap(), q(-3, 32));
    }

    #[test]
    fn recursion_examples() {
        assert!(recursion_check(0, &qs(&[1, 2, 3])).unwrap().is_zero());
        assert!(recursion_check(3, &qs(&[1, 2, 5])).unwrap().is_zero());
        assert!(recursion_check(-1, &qs(&[1, 2, 3])).unwrap().is_zero());
        let r = recursion_check(3, &NodeSet::new(vec![1.0, 2.0, 5.0]).unwrap()).unwrap();
        assert!(r < 1e-12);
    }

    #[test]
    fn rejects_zero_node_for_negative_power() {
        let x = qs(&[0, 2, 3]);
        assert!(lagrange_power_sum(-1, &x).is_err());
        assert!(lagrange_closed_form(-3, &x).is_err());
        assert_eq!(lagrange_power_sum(2, &x).unwrap(), q(1, 1));
    }

    #[test]
    fn rejects_bad_node_sets() {
        assert!(NodeSet::new(vec![1.0]).is_err());
        assert!(NodeSet::new(vec![1.0, 2.0, 1.0]).is_err());
        assert!(recursion_check(1, &NodeSet::new(vec![1.0, 2.0]).unwrap()).is_err());
    }

    #[test]
    fn two_variable_geometric_identity() {
        let (x0, x1) = (q(3, 2), q(-5, 7));
        for s in 1..9 {
            let lhs = complete_homogeneous(s - 1, &[x0.clone(), x1.clone()]);
            let rhs = (num_traits::pow(x0.clone(), s) - num_traits::pow(x1.clone(), s))
                / (x0.clone() - x1.clone());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn exact_sweep_is_exact() {
        for n in 1..=4 {
            let rows = lemma_sweep(&SweepConfig {
                n,
                s_min: -4,
                s_max: n as i64 + 4,
                trials: 3,
                seed: 7,
                mode: SweepMode::Exact,
            })
            .unwrap();
            assert!(rows.iter().all(|r| r.pass && r.max_residual == 0.0));
            let diag = rows.iter().find(|r| r.s == n as i64).unwrap();
            assert_eq!(diag.value, 1.0);
        }
    }
}
