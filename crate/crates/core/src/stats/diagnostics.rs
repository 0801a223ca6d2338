//! Theory-versus-simulation checks.

use std::ops::RangeInclusive;

use log::warn;
use serde::Serialize;
use thiserror::Error;

use super::ensemble::DegreeMoment;
use crate::analytic::{
    self, concentration_threshold, edge_envelope, max_degree_envelope, multi_edge_envelope, AnalyticError,
    TheoreticalSequence,
};
use crate::process::{validate_hard_copy, Trajectory};

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticError {
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("k range {lo}..={hi} is not covered by the theoretical sequence (k_max = {k_max})")]
    Range { lo: u64, hi: u64, k_max: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub k: u64,
    pub empirical: f64,
    pub theory: f64,
    pub stderr: f64,
    /// `(empirical - theory) / stderr`; zero when both the difference and the
    /// standard error vanish.
    pub z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub t: u64,
    pub epsilon1: f64,
    pub rows: Vec<ComparisonRow>,
    pub max_abs_diff: f64,
    /// `max_k |t * mean_k - t d_k| / t^(1 - eps1)`: the smallest constant that
    /// makes the approximation bound hold on this data.
    pub slack: f64,
}

/// Per-degree table of empirical `D_k(t)/t` against `d_k`.
pub fn compare_to_theory(
    t: u64,
    empirical: &[DegreeMoment],
    theory: &TheoreticalSequence,
    k_range: RangeInclusive<u64>,
    epsilon1: f64,
) -> Result<Comparison, DiagnosticError> {
    let (lo, hi) = (*k_range.start(), *k_range.end());
    if hi > theory.k_max() || lo > hi {
        return Err(DiagnosticError::Range { lo, hi, k_max: theory.k_max() });
    }
    let lookup = |k: u64| match empirical.binary_search_by_key(&k, |d| d.k) {
        Ok(i) => (empirical[i].mean, empirical[i].stderr),
        Err(_) => (0.0, 0.0),
    };
    let rows: Vec<ComparisonRow> = k_range
        .map(|k| {
            let (mean, stderr) = lookup(k);
            let theory = theory.d(k);
            let diff = mean - theory;
            let z = if diff == 0.0 { 0.0 } else { diff / stderr };
            ComparisonRow { k, empirical: mean, theory, stderr, z }
        })
        .collect();
    let max_abs_diff = rows.iter().map(|r| (r.empirical - r.theory).abs()).fold(0.0, f64::max);
    let tf = t as f64;
    let slack = tf * max_abs_diff / tf.powf(1.0 - epsilon1);
    Ok(Comparison { t, epsilon1, rows, max_abs_diff, slack })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QsRow {
    pub t: u64,
    pub max_degree: u64,
    pub degree_envelope: f64,
    pub degree_ok: bool,
    pub multi_edge_vertices: usize,
    pub multi_edge_envelope: f64,
    pub multi_edge_ok: bool,
    pub edges: u64,
    pub edge_envelope: f64,
    pub edges_ok: bool,
    /// `|e_t - mu t|` and its threshold, when `mu` is defined.
    pub deviation: Option<f64>,
    pub concentration_threshold: Option<f64>,
    pub concentration_ok: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct QsReport {
    pub t_min: u64,
    pub rows: Vec<QsRow>,
    pub degree_violations: usize,
    pub multi_edge_violations: usize,
    pub edge_violations: usize,
    pub concentration_violations: usize,
}

impl QsReport {
    pub fn total_violations(&self) -> usize {
        self.degree_violations + self.multi_edge_violations + self.edge_violations + self.concentration_violations
    }
}

/// Checks every checkpoint at or after `t_min` against the max-degree,
/// multi-edge, crude edge and concentration envelopes (all with constant 1).
/// Violations are logged and counted, never fatal. The multi-edge envelope
/// uses `eps0` as its free exponent slack.
pub fn qs_diagnostics(
    trajectory: &Trajectory,
    alpha: f64,
    m: u32,
    eps0: f64,
    t_min: u64,
) -> Result<QsReport, DiagnosticError> {
    let regime = validate_hard_copy(alpha, m).map_err(AnalyticError::from)?;
    if !regime.lemma_regime {
        return Err(AnalyticError::OutOfRegime { alpha, m, hypothesis: "2m(1-alpha) < 1" }.into());
    }
    // Validates eps0 even when mu is undefined.
    analytic::concentration_exponent(alpha, m, eps0)?;
    let mu = analytic::mu(alpha, m).ok();

    let mut report = QsReport { t_min, ..Default::default() };
    for p in trajectory.points.iter().filter(|p| p.t >= t_min) {
        let degree_envelope = max_degree_envelope(alpha, m, p.t);
        let multi = multi_edge_envelope(alpha, m, eps0, p.t);
        let edges_env = edge_envelope(p.t);
        let deviation = mu.map(|mu| (p.edges as f64 - mu * p.t as f64).abs());
        let threshold = match mu {
            Some(_) => Some(concentration_threshold(alpha, m, eps0, p.t)?),
            None => None,
        };
        let row = QsRow {
            t: p.t,
            max_degree: p.max_degree,
            degree_envelope,
            degree_ok: p.max_degree as f64 <= degree_envelope,
            multi_edge_vertices: p.multi_edge_vertices,
            multi_edge_envelope: multi,
            multi_edge_ok: p.multi_edge_vertices as f64 <= multi,
            edges: p.edges,
            edge_envelope: edges_env,
            edges_ok: p.edges as f64 <= edges_env,
            deviation,
            concentration_threshold: threshold,
            concentration_ok: match (deviation, threshold) {
                (Some(d), Some(th)) => d <= th,
                _ => true,
            },
        };
        if !row.degree_ok {
            report.degree_violations += 1;
            warn!("t={}: max degree {} above envelope {:.1}", row.t, row.max_degree, row.degree_envelope);
        }
        if !row.multi_edge_ok {
            report.multi_edge_violations += 1;
            warn!("t={}: X_t={} above envelope {:.1}", row.t, row.multi_edge_vertices, row.multi_edge_envelope);
        }
        if !row.edges_ok {
            report.edge_violations += 1;
            warn!("t={}: e_t={} above t (ln t)^6", row.t, row.edges);
        }
        if !row.concentration_ok {
            report.concentration_violations += 1;
            warn!("t={}: |e_t - mu t| = {:?} above threshold {:?}", row.t, row.deviation, row.concentration_threshold);
        }
        report.rows.push(row);
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum VarianceGrowth {
    /// Least-squares fit of `ln Var(e_T) = intercept + slope ln T`.
    Slope {
        slope: f64,
        intercept: f64,
        points: usize,
    },
    Degenerate(String),
}

impl VarianceGrowth {
    pub fn slope(&self) -> Option<f64> {
        match self {
            Self::Slope { slope, .. } => Some(*slope),
            Self::Degenerate(_) => None,
        }
    }
}

/// Growth exponent of the edge-count variance from `(T, Var(e_T))` pairs.
pub fn variance_growth_fit(points: &[(u64, f64)]) -> VarianceGrowth {
    if let Some(&(t, _)) = points.iter().find(|&&(_, v)| v <= 0.0 || !v.is_finite()) {
        return VarianceGrowth::Degenerate(format!("non-positive variance at T={t}"));
    }
    let mut distinct: Vec<u64> = points.iter().map(|p| p.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return VarianceGrowth::Degenerate("need at least two distinct T".into());
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    VarianceGrowth::Slope { slope, intercept: my - slope * mx, points: points.len() }
}
