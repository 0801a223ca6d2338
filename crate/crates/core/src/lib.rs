//! Scale-free random graph process with hard copying.
//!
//! At every step, with probability `alpha` a new vertex joins with `m` edges
//! attached by preferential attachment; otherwise a uniformly chosen vertex is
//! duplicated together with all of its edges. The crate provides the
//! multigraph state ([`graph`]), the step rules and the Kumar et al. copying
//! baseline ([`process`]), closed-form theory ([`analytic`]), empirical
//! statistics ([`stats`]) and an exact enumeration oracle ([`oracle`]).

pub mod analytic;
pub mod graph;
pub mod oracle;
pub mod process;
pub mod seed;
pub mod stats;

pub use graph::{GraphError, Lineage, MultiGraph, Origin, StepDelta, StepKind, VertexId};
pub use process::{
    evolve, simulate, step_hard_copy, validate_hard_copy, CheckpointSchedule, EvolveError, HardCopyParams, KumarParams,
    KumarState, RegimeReport, Trajectory,
};
