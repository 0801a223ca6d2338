//! Closed forms and recurrences: the edge growth rate `mu`, exact expected
//! edge counts, the limit degree sequence `d_k`, asymptotic exponents and the
//! envelopes of the degree, descendant and concentration bounds.

use serde::Serialize;
use thiserror::Error;

use crate::process::{validate_hard_copy, ModelError, RegimeReport};

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticError {
    #[error(transparent)]
    Params(#[from] ModelError),
    #[error("mu = alpha*m/(2*alpha - 1) is undefined for alpha = {0} <= 1/2")]
    MuUndefined(f64),
    #[error("alpha={alpha}, m={m} violates {hypothesis}")]
    OutOfRegime { alpha: f64, m: u32, hypothesis: &'static str },
    #[error("epsilon0 = {eps0} must satisfy 0 < eps0 and 1 + 2*eps0 + 2m(1-alpha) < 2")]
    InvalidEpsilon { eps0: f64 },
    #[error("invalid range: {0}")]
    InvalidRange(String),
}

const THEOREM: &str = "2m(1-alpha) < alpha";
const LEMMA: &str = "2m(1-alpha) < 1";

fn require_theorem(alpha: f64, m: u32) -> Result<RegimeReport, AnalyticError> {
    let regime = validate_hard_copy(alpha, m)?;
    if !regime.theorem_regime {
        return Err(AnalyticError::OutOfRegime { alpha, m, hypothesis: THEOREM });
    }
    Ok(regime)
}

fn require_lemma(alpha: f64, m: u32) -> Result<RegimeReport, AnalyticError> {
    let regime = validate_hard_copy(alpha, m)?;
    if !regime.lemma_regime {
        return Err(AnalyticError::OutOfRegime { alpha, m, hypothesis: LEMMA });
    }
    Ok(regime)
}

/// Linear edge growth rate `alpha*m / (2*alpha - 1)`.
pub fn mu(alpha: f64, m: u32) -> Result<f64, AnalyticError> {
    validate_hard_copy(alpha, m)?;
    if alpha <= 0.5 {
        return Err(AnalyticError::MuUndefined(alpha));
    }
    Ok(alpha * f64::from(m) / (2.0 * alpha - 1.0))
}

pub fn asymptotic_exponent(alpha: f64) -> f64 {
    1.0 + 2.0 * alpha
}

/// In-degree exponent `(2 - c)/(1 - c)` of the Kumar et al. copying model.
pub fn kumar_exponent(copy_factor: f64) -> f64 {
    (2.0 - copy_factor) / (1.0 - copy_factor)
}

// Beyond this degree the sequence is continued in log space.
const LOG_SPACE_FROM: u64 = 10_000;

/// Limit proportions `d_k` for `m <= k <= k_max`.
#[derive(Clone, Debug, Serialize)]
pub struct TheoreticalSequence {
    pub alpha: f64,
    pub m: u32,
    pub mu: f64,
    pub exponent: f64,
    values: Vec<f64>,
}

impl TheoreticalSequence {
    pub fn k_max(&self) -> u64 {
        u64::from(self.m) + self.values.len() as u64 - 1
    }

    /// `d_k`, zero below `m`. Panics past `k_max`.
    pub fn d(&self, k: u64) -> f64 {
        let m = u64::from(self.m);
        if k < m {
            return 0.0;
        }
        assert!(k <= self.k_max(), "k = {k} beyond computed range {}", self.k_max());
        self.values[(k - m) as usize]
    }

    /// `(k, d_k)` for `m <= k <= k_max`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        let m = u64::from(self.m);
        self.values.iter().enumerate().map(move |(i, &d)| (m + i as u64, d))
    }

    pub fn partial_sum(&self, k: u64) -> f64 {
        self.iter().take_while(|&(j, _)| j <= k).map(|(_, d)| d).sum()
    }

    /// `C` in `d_k ~ C k^-(1+2 alpha)`, estimated at `k_max`.
    pub fn tail_constant(&self) -> f64 {
        let k = self.k_max() as f64;
        self.d(self.k_max()) * k.powf(self.exponent)
    }

    /// Estimate of `sum_{k > k_max} d_k` from the power-law tail.
    pub fn tail_mass(&self) -> f64 {
        let k = self.k_max() as f64;
        self.tail_constant() * k.powf(-2.0 * self.alpha) / (2.0 * self.alpha)
    }

    /// `sum_k k d_k` including a power-law estimate of the tail past `k_max`.
    pub fn mean_degree(&self) -> f64 {
        let k_max = self.k_max() as f64;
        let head: f64 = self.iter().map(|(k, d)| k as f64 * d).sum();
        let tail = self.tail_constant() * k_max.powf(1.0 - 2.0 * self.alpha) / (2.0 * self.alpha - 1.0);
        head + tail
    }
}

/// Solves `(k + 2a)/2 d_k = (k - 1)/2 d_{k-1} + a [k = m]` with `d_k = 0`
/// below `m`, giving `d_m = 2a/(m + 2a)` and `d_k = d_{k-1} (k-1)/(k+2a)`.
pub fn limit_degree_sequence(alpha: f64, m: u32, k_max: u64) -> Result<TheoreticalSequence, AnalyticError> {
    require_theorem(alpha, m)?;
    let m64 = u64::from(m);
    if k_max < m64 {
        return Err(AnalyticError::InvalidRange(format!("k_max = {k_max} is below m = {m}")));
    }
    let two_a = 2.0 * alpha;
    let mut values = Vec::with_capacity((k_max - m64 + 1) as usize);
    let mut d = two_a / (f64::from(m) + two_a);
    values.push(d);
    let mut k = m64 + 1;
    while k <= k_max.min(LOG_SPACE_FROM) {
        d *= (k - 1) as f64 / (k as f64 + two_a);
        values.push(d);
        k += 1;
    }
    let mut log_d = d.ln();
    while k <= k_max {
        log_d += (-(1.0 + two_a) / (k as f64 + two_a)).ln_1p();
        values.push(log_d.exp());
        k += 1;
    }
    Ok(TheoreticalSequence { alpha, m, mu: mu(alpha, m)?, exponent: asymptotic_exponent(alpha), values })
}

/// Exact `E(e_t)` for `2 <= t <= T` by forward iteration of
/// `E(e_{t+1}) = E(e_t)(1 + 2(1-a)/t) + a m` from `E(e_2) = 2m`.
#[derive(Clone, Debug, Serialize)]
pub struct EdgeGrowth {
    pub alpha: f64,
    pub m: u32,
    pub mu: Option<f64>,
    expected: Vec<f64>,
}

impl EdgeGrowth {
    pub fn t_max(&self) -> u64 {
        self.expected.len() as u64 + 1
    }

    pub fn expected_edges(&self, t: u64) -> f64 {
        assert!((2..=self.t_max()).contains(&t), "t = {t} outside [2, {}]", self.t_max());
        self.expected[(t - 2) as usize]
    }

    /// `E(e_t) - mu t`.
    pub fn eta(&self, t: u64) -> Option<f64> {
        self.mu.map(|mu| self.expected_edges(t) - mu * t as f64)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.expected.iter().enumerate().map(|(i, &e)| (i as u64 + 2, e))
    }
}

pub fn expected_edges_exact(alpha: f64, m: u32, t_max: u64) -> Result<EdgeGrowth, AnalyticError> {
    validate_hard_copy(alpha, m)?;
    if t_max < 2 {
        return Err(AnalyticError::InvalidRange(format!("T = {t_max} is below 2")));
    }
    let am = alpha * f64::from(m);
    let growth = 2.0 * (1.0 - alpha);
    let mut expected = Vec::with_capacity((t_max - 1) as usize);
    let mut e = 2.0 * f64::from(m);
    expected.push(e);
    for t in 2..t_max {
        e = e * (1.0 + growth / t as f64) + am;
        expected.push(e);
    }
    Ok(EdgeGrowth { alpha, m, mu: mu(alpha, m).ok(), expected })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LemmaBounds {
    /// `(t/s)^(a/2 + m(1-a)) (ln t)^3`
    pub degree_bound: f64,
    /// `(t/s)^(1-a) (ln t)^3`
    pub descendant_bound: f64,
}

/// Degree and descendant-count envelopes for the original vertex born at `s`.
pub fn lemma_bounds(alpha: f64, m: u32, s: u64, t: u64) -> Result<LemmaBounds, AnalyticError> {
    require_lemma(alpha, m)?;
    if s == 0 || s > t {
        return Err(AnalyticError::InvalidRange(format!("need 1 <= s <= t, got s={s}, t={t}")));
    }
    let ratio = t as f64 / s as f64;
    let log3 = (t as f64).ln().powi(3);
    Ok(LemmaBounds {
        degree_bound: ratio.powf(degree_growth_exponent(alpha, m)) * log3,
        descendant_bound: ratio.powf(1.0 - alpha) * log3,
    })
}

/// `a/2 + m(1-a)`.
pub fn degree_growth_exponent(alpha: f64, m: u32) -> f64 {
    alpha / 2.0 + f64::from(m) * (1.0 - alpha)
}

/// Max-degree envelope `t^(a/2 + m(1-a)) (ln t)^3`.
pub fn max_degree_envelope(alpha: f64, m: u32, t: u64) -> f64 {
    let t = t as f64;
    t.powf(degree_growth_exponent(alpha, m)) * t.ln().powi(3)
}

/// Multi-edge vertex envelope `t^(a/2 + m(1-a) + eps)` with unit constant.
pub fn multi_edge_envelope(alpha: f64, m: u32, eps: f64, t: u64) -> f64 {
    (t as f64).powf(degree_growth_exponent(alpha, m) + eps)
}

/// Crude edge envelope `t (ln t)^6`.
pub fn edge_envelope(t: u64) -> f64 {
    let t = t as f64;
    t * t.ln().powi(6)
}

fn check_eps0(alpha: f64, m: u32, eps0: f64) -> Result<(), AnalyticError> {
    validate_hard_copy(alpha, m)?;
    if !(eps0 > 0.0 && 1.0 + 2.0 * eps0 + 2.0 * f64::from(m) * (1.0 - alpha) < 2.0) {
        return Err(AnalyticError::InvalidEpsilon { eps0 });
    }
    Ok(())
}

/// Exponent `1/2 + eps0 + m(1-a)` of the concentration threshold.
pub fn concentration_exponent(alpha: f64, m: u32, eps0: f64) -> Result<f64, AnalyticError> {
    check_eps0(alpha, m, eps0)?;
    Ok(0.5 + eps0 + f64::from(m) * (1.0 - alpha))
}

/// `t^(1/2 + eps0 + m(1-a))`, the deviation of `e_t` from `mu t` that is
/// exceeded with probability `O(t^-eps0)`.
pub fn concentration_threshold(alpha: f64, m: u32, eps0: f64, t: u64) -> Result<f64, AnalyticError> {
    Ok((t as f64).powf(concentration_exponent(alpha, m, eps0)?))
}

/// Growth exponent bound `1 + 2m(1-a) + eps0` of `Var(e_t)`.
pub fn variance_exponent_bound(alpha: f64, m: u32, eps0: f64) -> Result<f64, AnalyticError> {
    check_eps0(alpha, m, eps0)?;
    Ok(1.0 + 2.0 * f64::from(m) * (1.0 - alpha) + eps0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Epsilons {
    pub epsilon0: f64,
    pub epsilon1: f64,
}

/// `eps1 = min{eps0, 1 - a/2 - m(1-a), 1/2 - eps0 - m(1-a)} / 2`.
pub fn epsilon1(alpha: f64, m: u32, eps0: f64) -> Result<f64, AnalyticError> {
    require_theorem(alpha, m)?;
    check_eps0(alpha, m, eps0)?;
    let copy = f64::from(m) * (1.0 - alpha);
    Ok(0.5 * eps0.min(1.0 - alpha / 2.0 - copy).min(0.5 - eps0 - copy))
}

/// `eps0` at the midpoint of `(0, (1 - 2m(1-a))/2)` and the matching `eps1`.
pub fn default_epsilons(alpha: f64, m: u32) -> Result<Epsilons, AnalyticError> {
    require_theorem(alpha, m)?;
    let epsilon0 = (1.0 - 2.0 * f64::from(m) * (1.0 - alpha)) / 4.0;
    Ok(Epsilons { epsilon0, epsilon1: epsilon1(alpha, m, epsilon0)? })
}
