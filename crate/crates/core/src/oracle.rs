//! Exact expectations of the hard-copy process for tiny `T` by expanding the
//! full probability tree.
//!
//! The enumeration keeps its own dense multiplicity matrix instead of using
//! [`crate::graph::MultiGraph`], so it checks the simulator through an
//! independent code path. New-vertex branches enumerate ordered `m`-tuples of
//! neighbours with weight `alpha * prod(deg/2e)`; copy branches have weight
//! `(1 - alpha)/t` per target. States are never merged.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::analytic::expected_edges_exact;
use crate::process::{validate_hard_copy, ModelError};

pub const MAX_STEPS: u64 = 6;
pub const MAX_EDGES_PER_STEP: u32 = 2;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error(transparent)]
    Params(#[from] ModelError),
    #[error("T={steps}, m={m} exceeds the enumeration guard (T <= {MAX_STEPS}, m <= {MAX_EDGES_PER_STEP})")]
    TooLarge { steps: u64, m: u32 },
    #[error("T must be at least 2, got {0}")]
    TooSmall(u64),
}

/// Neumaier-compensated sum.
#[derive(Clone, Copy, Debug, Default)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactExpectations {
    pub alpha: f64,
    pub m: u32,
    pub t: u64,
    /// `E[D_k(T)]` for every `k` with positive probability.
    pub e_dk: BTreeMap<u64, f64>,
    /// `E[D_k(T)^2]`, for exact Monte Carlo standard errors.
    pub e_dk_sq: BTreeMap<u64, f64>,
    pub e_edges: f64,
    pub e_edges_sq: f64,
    pub e_max_degree: f64,
    /// Total probability at each tree level `t = 2..=T`.
    pub level_mass: Vec<f64>,
    pub leaves: u64,
}

impl ExactExpectations {
    pub fn e_dk(&self, k: u64) -> f64 {
        self.e_dk.get(&k).copied().unwrap_or(0.0)
    }

    /// `Var(D_k(T))`.
    pub fn var_dk(&self, k: u64) -> f64 {
        let mean = self.e_dk(k);
        (self.e_dk_sq.get(&k).copied().unwrap_or(0.0) - mean * mean).max(0.0)
    }

    pub fn var_edges(&self) -> f64 {
        (self.e_edges_sq - self.e_edges * self.e_edges).max(0.0)
    }
}

#[derive(Clone)]
struct DenseState {
    size: usize,
    t: usize,
    degree: Vec<u32>,
    mult: Vec<u32>,
    edges: u32,
}

impl DenseState {
    fn initial(m: u32, size: usize) -> Self {
        let mut s = Self { size, t: 2, degree: vec![0; size], mult: vec![0; size * size], edges: 2 * m };
        s.degree[0] = 2 * m;
        s.degree[1] = 2 * m;
        s.mult[1] = 2 * m;
        s.mult[size] = 2 * m;
        s
    }

    fn link(&mut self, a: usize, b: usize, c: u32) {
        self.mult[a * self.size + b] += c;
        self.mult[b * self.size + a] += c;
        self.degree[a] += c;
        self.degree[b] += c;
        self.edges += c;
    }

    fn with_new_vertex(&self, neighbors: &[usize]) -> Self {
        let mut next = self.clone();
        let new = self.t;
        for &w in neighbors {
            next.link(new, w, 1);
        }
        next.t += 1;
        next
    }

    fn with_copy(&self, target: usize) -> Self {
        let mut next = self.clone();
        let new = self.t;
        for w in 0..self.t {
            let c = self.mult[target * self.size + w];
            if c > 0 {
                next.link(new, w, c);
            }
        }
        next.t += 1;
        next
    }
}

struct Accumulator {
    dk: BTreeMap<u64, CompensatedSum>,
    dk_sq: BTreeMap<u64, CompensatedSum>,
    edges: CompensatedSum,
    edges_sq: CompensatedSum,
    max_degree: CompensatedSum,
    level_mass: Vec<CompensatedSum>,
    leaves: u64,
}

fn expand(state: &DenseState, prob: f64, alpha: f64, m: u32, steps: usize, acc: &mut Accumulator) {
    acc.level_mass[state.t - 2].add(prob);
    if state.t == steps {
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for &d in &state.degree[..state.t] {
            *counts.entry(u64::from(d)).or_default() += 1;
        }
        for (k, c) in counts {
            let c = c as f64;
            acc.dk.entry(k).or_default().add(prob * c);
            acc.dk_sq.entry(k).or_default().add(prob * c * c);
        }
        let e = f64::from(state.edges);
        acc.edges.add(prob * e);
        acc.edges_sq.add(prob * e * e);
        let max = state.degree[..state.t].iter().copied().max().unwrap_or(0);
        acc.max_degree.add(prob * f64::from(max));
        acc.leaves += 1;
        return;
    }

    let t = state.t;
    let two_e = f64::from(2 * state.edges);
    // Ordered m-tuples over the t current vertices, odometer style.
    let mut tuple = vec![0usize; m as usize];
    loop {
        let weight: f64 = tuple.iter().map(|&w| f64::from(state.degree[w]) / two_e).product();
        expand(&state.with_new_vertex(&tuple), prob * alpha * weight, alpha, m, steps, acc);
        let mut pos = 0;
        while pos < tuple.len() {
            tuple[pos] += 1;
            if tuple[pos] < t {
                break;
            }
            tuple[pos] = 0;
            pos += 1;
        }
        if pos == tuple.len() {
            break;
        }
    }
    if alpha < 1.0 {
        let weight = (1.0 - alpha) / t as f64;
        for target in 0..t {
            expand(&state.with_copy(target), prob * weight, alpha, m, steps, acc);
        }
    }
}

/// Exact `E[D_k(T)]`, `E[e_T]` and `E[Δ_T]` by full tree expansion.
pub fn enumerate(alpha: f64, m: u32, steps: u64) -> Result<ExactExpectations, OracleError> {
    validate_hard_copy(alpha, m)?;
    if steps < 2 {
        return Err(OracleError::TooSmall(steps));
    }
    if steps > MAX_STEPS || m > MAX_EDGES_PER_STEP {
        return Err(OracleError::TooLarge { steps, m });
    }
    let size = steps as usize;
    let mut acc = Accumulator {
        dk: BTreeMap::new(),
        dk_sq: BTreeMap::new(),
        edges: CompensatedSum::default(),
        edges_sq: CompensatedSum::default(),
        max_degree: CompensatedSum::default(),
        level_mass: vec![CompensatedSum::default(); size - 1],
        leaves: 0,
    };
    expand(&DenseState::initial(m, size), 1.0, alpha, m, size, &mut acc);
    Ok(ExactExpectations {
        alpha,
        m,
        t: steps,
        e_dk: acc.dk.iter().map(|(&k, s)| (k, s.value())).collect(),
        e_dk_sq: acc.dk_sq.iter().map(|(&k, s)| (k, s.value())).collect(),
        e_edges: acc.edges.value(),
        e_edges_sq: acc.edges_sq.value(),
        e_max_degree: acc.max_degree.value(),
        level_mass: acc.level_mass.iter().map(CompensatedSum::value).collect(),
        leaves: acc.leaves,
    })
}

pub const RECURRENCE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RecurrenceCheck {
    pub t: u64,
    pub oracle: f64,
    pub analytic: f64,
    pub relative_error: f64,
    pub agrees: bool,
}

/// Compares the enumerated `E[e_T]` with the forward edge recurrence.
pub fn check_against_recurrence(exact: &ExactExpectations) -> Result<RecurrenceCheck, OracleError> {
    let growth = expected_edges_exact(exact.alpha, exact.m, exact.t)
        .map_err(|_| OracleError::Params(ModelError::InvalidAlpha(exact.alpha)))?;
    let analytic = growth.expected_edges(exact.t);
    let relative_error = (exact.e_edges - analytic).abs() / analytic.abs();
    Ok(RecurrenceCheck {
        t: exact.t,
        oracle: exact.e_edges,
        analytic,
        relative_error,
        agrees: relative_error <= RECURRENCE_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn hand_enumerated_three_vertices() {
        let x = enumerate(0.9, 1, 3).unwrap();
        assert!(close(x.e_dk(1), 0.9));
        assert!(close(x.e_dk(2), 1.1));
        assert!(close(x.e_dk(3), 0.9));
        assert!(close(x.e_dk(4), 0.1));
        assert!(close(x.e_edges, 3.1));
        assert!(close(x.e_max_degree, 0.9 * 3.0 + 0.1 * 4.0));
        assert_eq!(x.leaves, 4);
    }

    #[test]
    fn initial_graph_only() {
        let x = enumerate(0.7, 2, 2).unwrap();
        assert_eq!(x.e_edges, 4.0);
        assert_eq!(x.e_dk(4), 2.0);
        assert_eq!(check_against_recurrence(&x).unwrap().relative_error, 0.0);
    }

    // Pure preferential attachment with m = 1, tracked on degree vectors only.
    fn pure_pa(degrees: Vec<u32>, prob: f64, steps: usize, out: &mut BTreeMap<u32, f64>) {
        if degrees.len() == steps {
            for &d in &degrees {
                *out.entry(d).or_default() += prob;
            }
            return;
        }
        let total: u32 = degrees.iter().sum();
        for w in 0..degrees.len() {
            let mut next = degrees.clone();
            next[w] += 1;
            next.push(1);
            pure_pa(next, prob * f64::from(degrees[w]) / f64::from(total), steps, out);
        }
    }

    #[test]
    fn pure_attachment_tree() {
        for steps in 3..=6 {
            let mut reference = BTreeMap::new();
            pure_pa(vec![2, 2], 1.0, steps, &mut reference);
            let x = enumerate(1.0, 1, steps as u64).unwrap();
            assert_eq!(x.e_dk.len(), reference.len());
            for (&k, &p) in &reference {
                assert!(close(x.e_dk(u64::from(k)), p), "T={steps} k={k}");
            }
            assert!(close(x.e_edges, steps as f64));
        }
    }

    #[test]
    fn conservation_identities() {
        for &(alpha, m) in &[(0.9, 1u32), (0.6, 2), (0.3, 1), (1.0, 2)] {
            for steps in 2..=6 {
                let x = enumerate(alpha, m, steps).unwrap();
                let vertices: f64 = x.e_dk.values().sum();
                let half_degree: f64 = x.e_dk.iter().map(|(&k, &v)| k as f64 * v).sum::<f64>() / 2.0;
                assert!((vertices - steps as f64).abs() < 1e-12);
                assert!((half_degree - x.e_edges).abs() < 1e-12 * x.e_edges);
                assert!(x.level_mass.iter().all(|&p| (p - 1.0).abs() < 1e-12), "{:?}", x.level_mass);
                assert!(x.e_dk.keys().all(|&k| k >= u64::from(m)));
            }
        }
    }

    #[test]
    fn agrees_with_edge_recurrence() {
        for &(alpha, m) in &[(0.9, 1u32), (0.8, 1), (0.55, 2), (0.2, 1), (1.0, 1)] {
            for steps in 2..=6 {
                let check = check_against_recurrence(&enumerate(alpha, m, steps).unwrap()).unwrap();
                assert!(check.agrees, "{check:?}");
            }
        }
        let check = check_against_recurrence(&enumerate(0.9, 1, 4).unwrap()).unwrap();
        assert!((check.oracle - 4.206_666_666_666_667).abs() < 1e-12);
    }

    #[test]
    fn guard() {
        assert_eq!(enumerate(0.9, 1, 7).unwrap_err(), OracleError::TooLarge { steps: 7, m: 1 });
        assert_eq!(enumerate(0.9, 3, 4).unwrap_err(), OracleError::TooLarge { steps: 4, m: 3 });
        assert!(enumerate(0.0, 1, 4).is_err());
        assert_eq!(enumerate(0.9, 1, 1).unwrap_err(), OracleError::TooSmall(1));
    }
}
