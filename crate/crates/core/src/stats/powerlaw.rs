//! Discrete power-law exponent by maximum likelihood at a fixed `k_min`.
//!
//! For the tail `k >= k_min` the model is `P(k) = k^-γ / ζ(γ, k_min)`, so the
//! mean log-likelihood is `-γ <ln k> - ln ζ(γ, k_min)`. It is concave in γ and
//! is maximized by golden-section search on `(1.05, 6)`.

use serde::Serialize;
use thiserror::Error;

use super::histogram::DegreeHistogram;
use super::zeta::hurwitz_zeta;

pub const GAMMA_LOWER: f64 = 1.05;
pub const GAMMA_UPPER: f64 = 6.0;
const MIN_TAIL: u64 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub gamma_hat: f64,
    pub k_min: u64,
    /// Observations with `k >= k_min`.
    pub n_tail: u64,
    pub log_likelihood: f64,
    /// Kolmogorov-Smirnov distance between fitted and empirical tail CDFs.
    pub ks_distance: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("k_min must be at least 1")]
    InvalidKMin,
    #[error("only {n_tail} observations at or above k_min (need {MIN_TAIL})")]
    TooFewObservations { n_tail: u64 },
    #[error("degenerate tail: every observation equals {0}")]
    DegenerateTail(u64),
    #[error("likelihood maximum at gamma={0} is not inside ({GAMMA_LOWER}, {GAMMA_UPPER})")]
    NotBracketed(f64),
}

pub fn fit_power_law(hist: &DegreeHistogram, k_min: u64) -> Result<PowerLawFit, FitError> {
    if k_min == 0 {
        return Err(FitError::InvalidKMin);
    }
    let tail: Vec<(u64, u64)> = hist.iter().filter(|&(k, _)| k >= k_min).collect();
    let n_tail: u64 = tail.iter().map(|&(_, c)| c).sum();
    if n_tail < MIN_TAIL {
        return Err(FitError::TooFewObservations { n_tail });
    }
    if tail.len() == 1 {
        return Err(FitError::DegenerateTail(tail[0].0));
    }
    let n = n_tail as f64;
    let mean_log = tail.iter().map(|&(k, c)| c as f64 * (k as f64).ln()).sum::<f64>() / n;
    let q = k_min as f64;
    let neg_ll = |gamma: f64| gamma * mean_log + hurwitz_zeta(gamma, q).ln();

    let gamma_hat = golden_section(neg_ll, GAMMA_LOWER, GAMMA_UPPER, 1e-10);
    let edge = 1e-6;
    if gamma_hat - GAMMA_LOWER < edge || GAMMA_UPPER - gamma_hat < edge {
        return Err(FitError::NotBracketed(gamma_hat));
    }

    Ok(PowerLawFit {
        gamma_hat,
        k_min,
        n_tail,
        log_likelihood: -n * neg_ll(gamma_hat),
        ks_distance: ks_distance(&tail, n_tail, gamma_hat, k_min),
    })
}

fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

// Both CDFs are step functions on the integers. The empirical one only jumps
// at observed values, so the supremum is attained at an observed k or just
// before one.
fn ks_distance(tail: &[(u64, u64)], n_tail: u64, gamma: f64, k_min: u64) -> f64 {
    let norm = hurwitz_zeta(gamma, k_min as f64);
    let model_cdf = |k: u64| 1.0 - hurwitz_zeta(gamma, (k + 1) as f64) / norm;
    let n = n_tail as f64;
    let mut below = 0u64;
    let mut worst: f64 = 0.0;
    for &(k, c) in tail {
        if k > k_min {
            worst = worst.max((below as f64 / n - model_cdf(k - 1)).abs());
        }
        below += c;
        worst = worst.max((below as f64 / n - model_cdf(k)).abs());
    }
    worst
}
