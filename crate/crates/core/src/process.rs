//! Stochastic step rules: the hard-copy process and the Kumar et al. copying
//! baseline, plus parameter validation and the evolution driver.

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic;
use crate::graph::{GraphError, MultiGraph, StepDelta, StepKind, VertexId};
use crate::seed::rng_from_seed;
use crate::stats::{degree_histogram, DegreeHistogram};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("alpha must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("m must be at least 1")]
    InvalidEdgesPerStep,
    #[error("copy factor must lie in (0, 1), got {0}")]
    InvalidCopyFactor(f64),
    #[error("out-degree must be at least 1")]
    InvalidOutDegree,
    #[error("step budget {steps} is below the initial size {min}")]
    InvalidSteps { steps: u64, min: u64 },
}

/// Parameters of the hard-copy process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardCopyParams {
    pub alpha: f64,
    pub m: u32,
    pub seed: u64,
    /// Final time `T` (the number of vertices when the run stops).
    pub steps: u64,
    /// Optional cap on the edge count; exceeding it stops the run cleanly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_edges: Option<u64>,
}

impl HardCopyParams {
    pub fn new(alpha: f64, m: u32, seed: u64, steps: u64) -> Result<Self, ModelError> {
        check_alpha_m(alpha, m)?;
        if steps < 2 {
            return Err(ModelError::InvalidSteps { steps, min: 2 });
        }
        Ok(Self { alpha, m, seed, steps, max_edges: None })
    }

    pub fn with_max_edges(mut self, max_edges: u64) -> Self {
        self.max_edges = Some(max_edges);
        self
    }

    pub fn regime(&self) -> RegimeReport {
        RegimeReport::compute(self.alpha, self.m)
    }
}

fn check_alpha_m(alpha: f64, m: u32) -> Result<(), ModelError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(ModelError::InvalidAlpha(alpha));
    }
    if m == 0 {
        return Err(ModelError::InvalidEdgesPerStep);
    }
    Ok(())
}

/// Which analytic hypotheses hold for a parameter pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeReport {
    /// `2m(1-alpha) < alpha`: the limit degree sequence exists.
    pub theorem_regime: bool,
    /// `2m(1-alpha) < 1`: degree, descendant and concentration bounds apply.
    pub lemma_regime: bool,
    /// `alpha > 1/2`: the linear edge growth rate is finite.
    pub mu_defined: bool,
}

impl RegimeReport {
    fn compute(alpha: f64, m: u32) -> Self {
        let copy_load = 2.0 * f64::from(m) * (1.0 - alpha);
        Self { theorem_regime: copy_load < alpha, lemma_regime: copy_load < 1.0, mu_defined: alpha > 0.5 }
    }
}

pub fn validate_hard_copy(alpha: f64, m: u32) -> Result<RegimeReport, ModelError> {
    check_alpha_m(alpha, m)?;
    Ok(RegimeReport::compute(alpha, m))
}

/// Draws a vertex with probability `degree / 2e`.
#[inline]
pub fn sample_pa_neighbor<R: Rng + ?Sized>(g: &MultiGraph, rng: &mut R) -> VertexId {
    let endpoints = g.endpoints();
    endpoints[rng.random_range(0..endpoints.len())]
}

/// One step of the hard-copy process.
///
/// With probability `alpha` a new vertex attaches to `m` neighbours drawn
/// independently from the pre-step degree distribution; otherwise a vertex
/// chosen uniformly among all current vertices is copied with its edges.
pub fn step_hard_copy<R: Rng + ?Sized>(g: &mut MultiGraph, alpha: f64, rng: &mut R) -> Result<StepDelta, GraphError> {
    if rng.random_bool(alpha) {
        // All m draws happen before the mutation, so they see G_{t-1} only.
        let neighbors: Vec<VertexId> = (0..g.m()).map(|_| sample_pa_neighbor(g, rng)).collect();
        let vertex = g.add_vertex_with_edges(&neighbors)?;
        Ok(StepDelta { kind: StepKind::NewVertex { neighbors }, vertex, edges_added: u64::from(g.m()) })
    } else {
        let slot = rng.random_range(0..g.vertex_count()) as u32;
        let target = VertexId::new(slot + 1).expect("slot + 1 is positive");
        let edges_added = g.degree(target);
        let vertex = g.copy_vertex(target)?;
        Ok(StepDelta { kind: StepKind::Copy { target }, vertex, edges_added })
    }
}

/// Times at which [`evolve`] records a checkpoint.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CheckpointSchedule {
    /// `{2, 4, 8, ...} ∪ {T}`.
    #[default]
    Geometric,
    /// Explicit strictly increasing times.
    Explicit(Vec<u64>),
}

impl CheckpointSchedule {
    pub fn explicit(times: Vec<u64>) -> Result<Self, EvolveError> {
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(EvolveError::Schedule("checkpoint times must be strictly increasing".into()));
        }
        Ok(Self::Explicit(times))
    }

    /// Resolved times within `[from, until]`.
    pub fn times(&self, from: u64, until: u64) -> Result<Vec<u64>, EvolveError> {
        match self {
            Self::Geometric => {
                let mut times = Vec::new();
                let mut t = 2u64;
                while t < until {
                    if t >= from {
                        times.push(t);
                    }
                    t = t.saturating_mul(2);
                }
                times.push(until);
                Ok(times)
            }
            Self::Explicit(times) => {
                if times.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(EvolveError::Schedule("checkpoint times must be strictly increasing".into()));
                }
                if let Some(&bad) = times.iter().find(|&&t| t < from || t > until) {
                    return Err(EvolveError::Schedule(format!(
                        "checkpoint {bad} outside the simulated range [{from}, {until}]"
                    )));
                }
                Ok(times.clone())
            }
        }
    }
}

/// Snapshot of the process at one checkpoint.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub t: u64,
    pub edges: u64,
    pub max_degree: u64,
    pub multi_edge_vertices: usize,
    /// `e_t - mu * t`, present when `mu` is defined.
    pub eta: Option<f64>,
    pub histogram: DegreeHistogram,
}

impl Checkpoint {
    pub fn capture(g: &MultiGraph, mu: Option<f64>) -> Self {
        let t = g.vertex_count();
        Self {
            t,
            edges: g.edge_count(),
            max_degree: g.max_degree(),
            multi_edge_vertices: g.multi_edge_vertex_count(),
            eta: mu.map(|mu| g.edge_count() as f64 - mu * t as f64),
            histogram: degree_histogram(g),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub points: Vec<Checkpoint>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&Checkpoint> {
        self.points.last()
    }
}

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("invalid checkpoint schedule: {0}")]
    Schedule(String),
    #[error("target time {until} is before the current time {current}")]
    TimeReversed { until: u64, current: u64 },
    #[error("edge budget of {limit} exceeded at t={t}")]
    EdgeBudget { limit: u64, t: u64, partial: Trajectory },
    #[error("graph mutation failed at t={t}: {source}")]
    Graph { t: u64, source: GraphError, partial: Trajectory },
}

impl EvolveError {
    /// Checkpoints recorded before the failure.
    pub fn partial(&self) -> Option<&Trajectory> {
        match self {
            Self::EdgeBudget { partial, .. } | Self::Graph { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

/// Runs [`step_hard_copy`] until the graph has `until` vertices, recording
/// checkpoints and calling `observer` after every step.
pub fn evolve<R, F>(
    g: &mut MultiGraph,
    params: &HardCopyParams,
    rng: &mut R,
    until: u64,
    schedule: &CheckpointSchedule,
    mut observer: F,
) -> Result<Trajectory, EvolveError>
where
    R: Rng + ?Sized,
    F: FnMut(&MultiGraph, &StepDelta),
{
    let current = g.vertex_count();
    if until < current {
        return Err(EvolveError::TimeReversed { until, current });
    }
    let times = schedule.times(current, until)?;
    let regime = params.regime();
    if !regime.theorem_regime {
        warn!(
            "alpha={} m={} is outside 2m(1-alpha) < alpha; the limit degree sequence is not guaranteed",
            params.alpha, params.m
        );
    }
    let mu = analytic::mu(params.alpha, params.m).ok();

    let mut trajectory = Trajectory { points: Vec::with_capacity(times.len()) };
    let mut next = times.iter().copied().peekable();
    loop {
        let t = g.vertex_count();
        if next.peek() == Some(&t) {
            next.next();
            trajectory.points.push(Checkpoint::capture(g, mu));
        }
        if t >= until {
            break;
        }
        if let Some(limit) = params.max_edges {
            if g.edge_count() + g.max_degree().max(u64::from(g.m())) > limit {
                return Err(EvolveError::EdgeBudget { limit, t, partial: trajectory });
            }
        }
        match step_hard_copy(g, params.alpha, rng) {
            Ok(delta) => observer(g, &delta),
            Err(source) => return Err(EvolveError::Graph { t, source, partial: trajectory }),
        }
    }
    Ok(trajectory)
}

/// A complete run from the seed graph to `params.steps` using `params.seed`.
pub fn simulate(
    params: &HardCopyParams,
    schedule: &CheckpointSchedule,
) -> Result<(MultiGraph, Trajectory), EvolveError> {
    let mut g = MultiGraph::new_initial(params.m).map_err(|source| EvolveError::Graph {
        t: 0,
        source,
        partial: Trajectory::default(),
    })?;
    let mut rng = rng_from_seed(params.seed);
    let trajectory = evolve(&mut g, params, &mut rng, params.steps, schedule, |_, _| {})?;
    Ok((g, trajectory))
}

/// Parameters of the Kumar et al. linear copying model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KumarParams {
    /// Probability that an out-link goes to a uniformly random vertex instead
    /// of copying the prototype's link in the same slot.
    pub copy_factor: f64,
    pub out_degree: u32,
    pub seed: u64,
    /// Final vertex count.
    pub steps: u64,
}

impl KumarParams {
    pub fn new(copy_factor: f64, out_degree: u32, seed: u64, steps: u64) -> Result<Self, ModelError> {
        if !(copy_factor > 0.0 && copy_factor < 1.0) {
            return Err(ModelError::InvalidCopyFactor(copy_factor));
        }
        if out_degree == 0 {
            return Err(ModelError::InvalidOutDegree);
        }
        let min = u64::from(out_degree) + 1;
        if steps < min {
            return Err(ModelError::InvalidSteps { steps, min });
        }
        Ok(Self { copy_factor, out_degree, seed, steps })
    }
}

/// Directed state of the Kumar model: `d` ordered out-links per vertex and
/// in-degree counters.
#[derive(Clone, Debug)]
pub struct KumarState {
    out_degree: u32,
    out_links: Vec<VertexId>,
    in_degree: Vec<u64>,
}

impl KumarState {
    /// `d + 1` vertices; every out-link of vertex `i` points to `(i mod (d+1)) + 1`.
    pub fn bootstrap(out_degree: u32) -> Result<Self, ModelError> {
        if out_degree == 0 {
            return Err(ModelError::InvalidOutDegree);
        }
        let n = out_degree + 1;
        let mut out_links = Vec::with_capacity((n * out_degree) as usize);
        let mut in_degree = vec![0u64; n as usize];
        for i in 1..=n {
            let dest = i % n + 1;
            for _ in 0..out_degree {
                out_links.push(VertexId::new(dest).expect("dest >= 1"));
            }
            in_degree[(dest - 1) as usize] += u64::from(out_degree);
        }
        Ok(Self { out_degree, out_links, in_degree })
    }

    pub fn vertex_count(&self) -> u64 {
        self.in_degree.len() as u64
    }

    pub fn out_degree(&self) -> u32 {
        self.out_degree
    }

    pub fn out_links(&self, v: VertexId) -> &[VertexId] {
        let d = self.out_degree as usize;
        let start = (v.index() as usize - 1) * d;
        &self.out_links[start..start + d]
    }

    pub fn in_degree(&self, v: VertexId) -> u64 {
        self.in_degree[v.index() as usize - 1]
    }

    pub fn in_degrees(&self) -> &[u64] {
        &self.in_degree
    }

    pub fn in_degree_histogram(&self) -> DegreeHistogram {
        DegreeHistogram::from_values(self.in_degree.iter().copied())
    }
}

/// Adds one vertex to the Kumar model and returns its id.
pub fn step_kumar<R: Rng + ?Sized>(state: &mut KumarState, params: &KumarParams, rng: &mut R) -> VertexId {
    let n = state.vertex_count();
    let prototype = VertexId::new(rng.random_range(0..n) as u32 + 1).expect("positive id");
    let d = state.out_degree as usize;
    let base = (prototype.index() as usize - 1) * d;
    for slot in 0..d {
        let dest = if rng.random_bool(params.copy_factor) {
            VertexId::new(rng.random_range(0..n) as u32 + 1).expect("positive id")
        } else {
            state.out_links[base + slot]
        };
        state.out_links.push(dest);
        state.in_degree[dest.index() as usize - 1] += 1;
    }
    state.in_degree.push(0);
    VertexId::new(n as u32 + 1).expect("positive id")
}

/// Grows a Kumar model from the bootstrap state to `params.steps` vertices.
pub fn run_kumar(params: &KumarParams) -> KumarState {
    let mut state = KumarState::bootstrap(params.out_degree).expect("validated out-degree");
    let mut rng = rng_from_seed(params.seed);
    while state.vertex_count() < params.steps {
        step_kumar(&mut state, params, &mut rng);
    }
    state
}
