//! Replicated runs with exact, order-independent aggregation.
//!
//! Every per-replica quantity (`D_k(t)`, `e_t`, `Δ_t`, `X_t`) is an integer, so
//! replicas are merged by summing first and second moments in `u128`. Integer
//! addition is associative and commutative, which makes the summary identical
//! for any scheduling or merge order.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::process::{simulate, CheckpointSchedule, EvolveError, HardCopyParams, RegimeReport, Trajectory};
use crate::seed::derive_seed;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct MomentSums {
    sum: u128,
    sum_sq: u128,
}

impl MomentSums {
    fn push(&mut self, x: u64) {
        let x = u128::from(x);
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(&mut self, other: &Self) {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    // Sample variance over `n` observations, scaled by `1/scale^2`.
    fn moment(&self, n: u64, scale: f64) -> Moment {
        let n128 = u128::from(n);
        let mean = self.sum as f64 / n as f64 / scale;
        let variance = if n > 1 {
            // n*sum_sq - sum^2 >= 0 by Cauchy-Schwarz, and is exact in integers.
            let numerator = n128 * self.sum_sq - self.sum * self.sum;
            numerator as f64 / (n as f64 * (n - 1) as f64) / (scale * scale)
        } else {
            0.0
        };
        Moment { mean, variance, stderr: (variance / n as f64).sqrt() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct CheckpointSums {
    t: u64,
    edges: MomentSums,
    max_degree: MomentSums,
    multi_edge_vertices: MomentSums,
    degree_counts: BTreeMap<u64, MomentSums>,
}

/// Exact running sums over replicas, one entry per checkpoint.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EnsembleAccumulator {
    replicas: u64,
    checkpoints: Vec<CheckpointSums>,
}

impl EnsembleAccumulator {
    pub fn replicas(&self) -> u64 {
        self.replicas
    }

    pub fn push(&mut self, trajectory: &Trajectory) {
        if self.checkpoints.is_empty() {
            self.checkpoints =
                trajectory.points.iter().map(|p| CheckpointSums { t: p.t, ..Default::default() }).collect();
        }
        assert_eq!(self.checkpoints.len(), trajectory.points.len(), "replicas must share a checkpoint schedule");
        for (sums, point) in self.checkpoints.iter_mut().zip(&trajectory.points) {
            assert_eq!(sums.t, point.t, "replicas must share a checkpoint schedule");
            sums.edges.push(point.edges);
            sums.max_degree.push(point.max_degree);
            sums.multi_edge_vertices.push(point.multi_edge_vertices as u64);
            for (k, c) in point.histogram.iter() {
                sums.degree_counts.entry(k).or_default().push(c);
            }
        }
        self.replicas += 1;
    }

    pub fn merge(mut self, other: Self) -> Self {
        if other.replicas == 0 {
            return self;
        }
        if self.replicas == 0 {
            return other;
        }
        assert_eq!(self.checkpoints.len(), other.checkpoints.len(), "replicas must share a checkpoint schedule");
        for (a, b) in self.checkpoints.iter_mut().zip(&other.checkpoints) {
            assert_eq!(a.t, b.t, "replicas must share a checkpoint schedule");
            a.edges.merge(&b.edges);
            a.max_degree.merge(&b.max_degree);
            a.multi_edge_vertices.merge(&b.multi_edge_vertices);
            for (k, s) in &b.degree_counts {
                a.degree_counts.entry(*k).or_default().merge(s);
            }
        }
        self.replicas += other.replicas;
        self
    }

    fn summarize(&self, params: &HardCopyParams, master_seed: u64) -> EnsembleSummary {
        let n = self.replicas;
        let checkpoints = self
            .checkpoints
            .iter()
            .map(|c| {
                let t = c.t as f64;
                CheckpointSummary {
                    t: c.t,
                    edges: c.edges.moment(n, 1.0),
                    max_degree: c.max_degree.moment(n, 1.0),
                    multi_edge_vertices: c.multi_edge_vertices.moment(n, 1.0),
                    degree_fractions: c
                        .degree_counts
                        .iter()
                        .map(|(&k, s)| {
                            let m = s.moment(n, t);
                            DegreeMoment { k, mean: m.mean, stderr: m.stderr }
                        })
                        .collect(),
                }
            })
            .collect();
        EnsembleSummary {
            alpha: params.alpha,
            m: params.m,
            steps: params.steps,
            replicas: n,
            master_seed,
            regime: params.regime(),
            checkpoints,
        }
    }
}

/// Mean, sample variance and standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moment {
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
}

/// Mean and standard error of `D_k(t)/t` across replicas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DegreeMoment {
    pub k: u64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckpointSummary {
    pub t: u64,
    pub edges: Moment,
    pub max_degree: Moment,
    pub multi_edge_vertices: Moment,
    /// Ascending in `k`; degrees never observed in any replica are omitted.
    pub degree_fractions: Vec<DegreeMoment>,
}

impl CheckpointSummary {
    /// Mean and standard error of `D_k(t)/t`; zero for unobserved `k`.
    pub fn fraction(&self, k: u64) -> DegreeMoment {
        match self.degree_fractions.binary_search_by_key(&k, |d| d.k) {
            Ok(i) => self.degree_fractions[i],
            Err(_) => DegreeMoment { k, mean: 0.0, stderr: 0.0 },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub alpha: f64,
    pub m: u32,
    pub steps: u64,
    pub replicas: u64,
    pub master_seed: u64,
    pub regime: RegimeReport,
    pub checkpoints: Vec<CheckpointSummary>,
}

impl EnsembleSummary {
    pub fn checkpoint(&self, t: u64) -> Option<&CheckpointSummary> {
        self.checkpoints.iter().find(|c| c.t == t)
    }

    pub fn last(&self) -> &CheckpointSummary {
        self.checkpoints.last().expect("an ensemble has at least one checkpoint")
    }

    /// `(t, sample Var(e_t))` at every checkpoint.
    pub fn edge_variances(&self) -> Vec<(u64, f64)> {
        self.checkpoints.iter().map(|c| (c.t, c.edges.variance)).collect()
    }
}

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("at least 2 replicas are needed for standard errors, got {0}")]
    TooFewReplicas(u64),
    #[error(transparent)]
    Schedule(EvolveError),
    #[error("{} replica(s) failed, first: replica {}: {}", failures.len(), failures[0].0, failures[0].1)]
    Replicas {
        failures: Vec<(u64, String)>,
        /// Summary over the replicas that completed, if any did.
        partial: Option<Box<EnsembleSummary>>,
    },
}

#[derive(Default)]
struct Partial {
    acc: EnsembleAccumulator,
    failures: Vec<(u64, String)>,
}

/// Runs `replicas` independent copies of the process to `params.steps`.
///
/// Replica `i` is seeded with `derive_seed(master_seed, i)`; `params.seed` is
/// ignored. Work is spread over the current rayon pool.
pub fn run_ensemble(
    params: &HardCopyParams,
    replicas: u64,
    schedule: &CheckpointSchedule,
    master_seed: u64,
) -> Result<EnsembleSummary, EnsembleError> {
    if replicas < 2 {
        return Err(EnsembleError::TooFewReplicas(replicas));
    }
    schedule.times(2, params.steps).map_err(EnsembleError::Schedule)?;

    let result = (0..replicas)
        .into_par_iter()
        .fold(Partial::default, |mut part, i| {
            let replica = HardCopyParams { seed: derive_seed(master_seed, i), ..params.clone() };
            match simulate(&replica, schedule) {
                Ok((_, trajectory)) => part.acc.push(&trajectory),
                Err(e) => part.failures.push((i, e.to_string())),
            }
            part
        })
        .reduce(Partial::default, |mut a, b| {
            a.acc = a.acc.merge(b.acc);
            a.failures.extend(b.failures);
            a
        });

    if result.failures.is_empty() {
        return Ok(result.acc.summarize(params, master_seed));
    }
    let mut failures = result.failures;
    failures.sort_by_key(|f| f.0);
    let partial = (result.acc.replicas > 0).then(|| Box::new(result.acc.summarize(params, master_seed)));
    Err(EnsembleError::Replicas { failures, partial })
}
