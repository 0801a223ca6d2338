//! Undirected multigraph state for the hard-copying growth process.
//!
//! Vertices are append-only and numbered from 1 in creation order. Besides the
//! per-vertex degree and sparse multiplicity lists, the graph keeps a flat
//! endpoint list in which every vertex appears exactly `degree` times, so a
//! degree-proportional draw is a single uniform index into it.
//!
//! Every new edge is incident to the newest vertex, which has the largest id.
//! Appending `(new, multiplicity)` to a neighbour's list therefore keeps every
//! adjacency list sorted by neighbour id without any reordering, and the
//! multiplicity of a pair never changes once the pair has been created.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// 1-based vertex identifier, assigned in creation order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(u32);

impl VertexId {
    /// Returns `None` for index 0.
    pub fn new(index: u32) -> Option<Self> {
        (index >= 1).then_some(Self(index))
    }

    pub fn index(self) -> u32 {
        self.0
    }

    #[inline]
    fn slot(self) -> usize {
        (self.0 - 1) as usize
    }

    #[inline]
    fn from_slot(slot: usize) -> Self {
        Self(slot as u32 + 1)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    /// One of the two seed vertices or a vertex added by preferential attachment.
    Original,
    CopiedFrom(VertexId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lineage {
    pub origin: Origin,
    /// The original vertex at the top of the copy chain; equals the vertex
    /// itself for originals.
    pub family_root: VertexId,
}

/// Outcome of a single growth step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepKind {
    NewVertex { neighbors: Vec<VertexId> },
    Copy { target: VertexId },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepDelta {
    pub kind: StepKind,
    /// The vertex created by the step.
    pub vertex: VertexId,
    /// Number of edges the step added (`m` for a new vertex, the target's
    /// degree for a copy).
    pub edges_added: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edges per new vertex must be at least 1")]
    InvalidEdgesPerStep,
    #[error("vertex {id} does not exist (graph has {vertex_count} vertices)")]
    VertexOutOfRange { id: u32, vertex_count: u64 },
    #[error("expected {expected} neighbours, got {got}")]
    WrongNeighborCount { expected: u32, got: usize },
    #[error("{0} is not an original vertex")]
    NotOriginal(VertexId),
    #[error("could not reserve memory for {edges} more edges")]
    Allocation { edges: u64 },
}

/// A violated structural invariant, reported by [`MultiGraph::check_invariants`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum InvariantViolation {
    #[error("degree sum {degree_sum} != 2 * edge count {edge_count}")]
    DegreeSum { degree_sum: u64, edge_count: u64 },
    #[error("vertex count {vertices} disagrees with per-vertex storage {storage}")]
    VertexCount { vertices: u64, storage: usize },
    #[error("self-loop at {0}")]
    SelfLoop(VertexId),
    #[error("multiplicity {multiplicity} between {u} and {v} exceeds 2m = {cap}")]
    MultiplicityCap { u: VertexId, v: VertexId, multiplicity: u32, cap: u32 },
    #[error("multiplicity of ({u}, {v}) is not symmetric")]
    Asymmetric { u: VertexId, v: VertexId },
    #[error("adjacency list of {0} is not strictly sorted")]
    Unsorted(VertexId),
    #[error("degree of {v} is {degree}, below m = {m}")]
    MinDegree { v: VertexId, degree: u64, m: u32 },
    #[error("degree of {v} is {degree} but its multiplicities sum to {sum}")]
    DegreeMismatch { v: VertexId, degree: u64, sum: u64 },
    #[error("edge count {edges} below m * t = {bound}")]
    EdgeLowerBound { edges: u64, bound: u64 },
    #[error("endpoint list has {len} entries, expected {expected}")]
    EndpointLength { len: usize, expected: u64 },
    #[error("{v} appears {count} times in the endpoint list but has degree {degree}")]
    EndpointCount { v: VertexId, count: u64, degree: u64 },
    #[error("cached maximum degree {cached} != actual {actual}")]
    MaxDegree { cached: u64, actual: u64 },
    #[error("cached multi-edge vertex count {cached} != actual {actual}")]
    MultiEdgeCount { cached: usize, actual: usize },
    #[error("lineage of {0} is inconsistent")]
    Lineage(VertexId),
    #[error("family sizes sum to {sum}, expected {t}")]
    FamilyPartition { sum: u64, t: u64 },
}

#[derive(Clone, Debug)]
pub struct MultiGraph {
    m: u32,
    edge_count: u64,
    degrees: Vec<u64>,
    adjacency: Vec<Vec<(VertexId, u32)>>,
    endpoints: Vec<VertexId>,
    lineage: Vec<Lineage>,
    // Family size per original vertex slot; zero for copies.
    family_sizes: Vec<u64>,
    // Number of neighbours sharing at least two parallel edges with the vertex.
    parallel_neighbors: Vec<u32>,
    multi_edge_vertices: usize,
    max_degree: u64,
}

impl MultiGraph {
    /// The seed graph: `v1` and `v2` joined by `2m` parallel edges.
    pub fn new_initial(m: u32) -> Result<Self, GraphError> {
        if m == 0 {
            return Err(GraphError::InvalidEdgesPerStep);
        }
        let v1 = VertexId(1);
        let v2 = VertexId(2);
        let mult = 2 * m;
        let mut endpoints = Vec::with_capacity(4 * m as usize);
        for _ in 0..mult {
            endpoints.push(v1);
            endpoints.push(v2);
        }
        Ok(Self {
            m,
            edge_count: u64::from(mult),
            degrees: vec![u64::from(mult); 2],
            adjacency: vec![vec![(v2, mult)], vec![(v1, mult)]],
            endpoints,
            lineage: vec![
                Lineage { origin: Origin::Original, family_root: v1 },
                Lineage { origin: Origin::Original, family_root: v2 },
            ],
            family_sizes: vec![1, 1],
            // With m >= 1 the seed pair always carries at least two parallel edges.
            parallel_neighbors: vec![1, 1],
            multi_edge_vertices: 2,
            max_degree: u64::from(mult),
        })
    }

    /// Edges attached by each new vertex.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Current time `t`, equal to the number of vertices.
    pub fn vertex_count(&self) -> u64 {
        self.degrees.len() as u64
    }

    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    /// # Panics
    /// If `v` is not a vertex of this graph.
    pub fn degree(&self, v: VertexId) -> u64 {
        self.degrees[v.slot()]
    }

    /// Degrees indexed by `id - 1`.
    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    /// Number of parallel edges between `u` and `v` (zero when `u == v`).
    pub fn multiplicity(&self, u: VertexId, v: VertexId) -> u32 {
        let list = &self.adjacency[u.slot()];
        match list.binary_search_by_key(&v, |&(w, _)| w) {
            Ok(pos) => list[pos].1,
            Err(_) => 0,
        }
    }

    /// Distinct neighbours of `v` with their multiplicities, ascending by id.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, u32)] {
        &self.adjacency[v.slot()]
    }

    pub fn max_degree(&self) -> u64 {
        self.max_degree
    }

    /// `X_t`: vertices sharing at least two parallel edges with some other vertex.
    pub fn multi_edge_vertex_count(&self) -> usize {
        self.multi_edge_vertices
    }

    /// Flat list in which every vertex appears exactly `degree` times.
    pub fn endpoints(&self) -> &[VertexId] {
        &self.endpoints
    }

    pub fn lineage(&self, v: VertexId) -> Lineage {
        self.lineage[v.slot()]
    }

    pub fn is_original(&self, v: VertexId) -> bool {
        self.lineage[v.slot()].origin == Origin::Original
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.degrees.len()).map(VertexId::from_slot)
    }

    /// The set `V_t^o` of original vertices.
    pub fn originals(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices().filter(|&v| self.is_original(v))
    }

    /// Size of the descendant family of an original vertex, the vertex itself
    /// included.
    pub fn descendant_count(&self, v: VertexId) -> Result<u64, GraphError> {
        self.check_id(v)?;
        if !self.is_original(v) {
            return Err(GraphError::NotOriginal(v));
        }
        Ok(self.family_sizes[v.slot()])
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.slot() < self.degrees.len()
    }

    fn check_id(&self, v: VertexId) -> Result<(), GraphError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange { id: v.0, vertex_count: self.vertex_count() })
        }
    }

    fn reserve_edges(&mut self, edges: u64) -> Result<(), GraphError> {
        let extra = usize::try_from(2 * edges).map_err(|_| GraphError::Allocation { edges })?;
        self.endpoints.try_reserve(extra).map_err(|_| GraphError::Allocation { edges })
    }

    fn push_vertex(&mut self, degree: u64, neighbors: Vec<(VertexId, u32)>, lineage: Lineage) -> VertexId {
        let id = VertexId::from_slot(self.degrees.len());
        let parallel = neighbors.iter().filter(|&&(_, c)| c >= 2).count() as u32;
        self.degrees.push(degree);
        self.adjacency.push(neighbors);
        self.lineage.push(lineage);
        self.family_sizes.push(0);
        self.parallel_neighbors.push(0);
        self.mark_parallel(id.slot(), parallel);
        self.max_degree = self.max_degree.max(degree);
        id
    }

    fn mark_parallel(&mut self, slot: usize, added: u32) {
        if added == 0 {
            return;
        }
        if self.parallel_neighbors[slot] == 0 {
            self.multi_edge_vertices += 1;
        }
        self.parallel_neighbors[slot] += added;
    }

    // Links an existing vertex `w` to the newest vertex `new` with multiplicity `c`.
    fn link_to_new(&mut self, w: VertexId, new: VertexId, c: u32) {
        let slot = w.slot();
        self.adjacency[slot].push((new, c));
        self.degrees[slot] += u64::from(c);
        self.max_degree = self.max_degree.max(self.degrees[slot]);
        if c >= 2 {
            self.mark_parallel(slot, 1);
        }
        for _ in 0..c {
            self.endpoints.push(w);
            self.endpoints.push(new);
        }
    }

    /// Adds an original vertex joined to each listed neighbour; repeated ids
    /// accumulate multiplicity.
    pub fn add_vertex_with_edges(&mut self, neighbors: &[VertexId]) -> Result<VertexId, GraphError> {
        if neighbors.len() != self.m as usize {
            return Err(GraphError::WrongNeighborCount { expected: self.m, got: neighbors.len() });
        }
        for &w in neighbors {
            self.check_id(w)?;
        }
        self.reserve_edges(u64::from(self.m))?;

        let mut sorted = neighbors.to_vec();
        sorted.sort_unstable();
        let mut grouped: Vec<(VertexId, u32)> = Vec::with_capacity(sorted.len());
        for w in sorted {
            match grouped.last_mut() {
                Some((last, c)) if *last == w => *c += 1,
                _ => grouped.push((w, 1)),
            }
        }

        let slot = self.degrees.len();
        let id = VertexId::from_slot(slot);
        let links = grouped.clone();
        self.push_vertex(u64::from(self.m), grouped, Lineage { origin: Origin::Original, family_root: id });
        self.family_sizes[slot] = 1;
        for (w, c) in links {
            self.link_to_new(w, id, c);
        }
        self.edge_count += u64::from(self.m);
        Ok(id)
    }

    /// Hard copy: the new vertex inherits every incident edge of `target`,
    /// multiplicities included. No edge joins the copy to `target`.
    pub fn copy_vertex(&mut self, target: VertexId) -> Result<VertexId, GraphError> {
        self.check_id(target)?;
        let degree = self.degree(target);
        self.reserve_edges(degree)?;

        let links = self.adjacency[target.slot()].clone();
        let root = self.lineage[target.slot()].family_root;
        let id =
            self.push_vertex(degree, links.clone(), Lineage { origin: Origin::CopiedFrom(target), family_root: root });
        self.family_sizes[root.slot()] += 1;
        for (w, c) in links {
            self.link_to_new(w, id, c);
        }
        self.edge_count += degree;
        Ok(id)
    }

    /// Writes `u v multiplicity` lines (u < v, ascending) after a
    /// `# t=.. e=.. m=..` header.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# t={} e={} m={}", self.vertex_count(), self.edge_count, self.m)?;
        for u in self.vertices() {
            for &(v, c) in self.neighbors(u) {
                if v > u {
                    writeln!(out, "{} {} {}", u.0, v.0, c)?;
                }
            }
        }
        Ok(())
    }

    /// Full O(t + e) structural audit.
    pub fn check_invariants(&self) -> Result<(), InvariantViolation> {
        let t = self.degrees.len();
        if self.adjacency.len() != t
            || self.lineage.len() != t
            || self.family_sizes.len() != t
            || self.parallel_neighbors.len() != t
        {
            return Err(InvariantViolation::VertexCount { vertices: t as u64, storage: self.adjacency.len() });
        }
        let degree_sum: u64 = self.degrees.iter().sum();
        if degree_sum != 2 * self.edge_count {
            return Err(InvariantViolation::DegreeSum { degree_sum, edge_count: self.edge_count });
        }
        let bound = u64::from(self.m) * t as u64;
        if self.edge_count < bound {
            return Err(InvariantViolation::EdgeLowerBound { edges: self.edge_count, bound });
        }
        let cap = 2 * self.m;
        let mut multi = 0;
        for u in self.vertices() {
            let list = self.neighbors(u);
            let mut sum = 0u64;
            let mut has_parallel = false;
            for (i, &(v, c)) in list.iter().enumerate() {
                if v == u {
                    return Err(InvariantViolation::SelfLoop(u));
                }
                if i > 0 && list[i - 1].0 >= v {
                    return Err(InvariantViolation::Unsorted(u));
                }
                if !self.contains(v) || self.multiplicity(v, u) != c || c == 0 {
                    return Err(InvariantViolation::Asymmetric { u, v });
                }
                if c > cap {
                    return Err(InvariantViolation::MultiplicityCap { u, v, multiplicity: c, cap });
                }
                has_parallel |= c >= 2;
                sum += u64::from(c);
            }
            let degree = self.degree(u);
            if sum != degree {
                return Err(InvariantViolation::DegreeMismatch { v: u, degree, sum });
            }
            if degree < u64::from(self.m) {
                return Err(InvariantViolation::MinDegree { v: u, degree, m: self.m });
            }
            multi += usize::from(has_parallel);
        }
        if multi != self.multi_edge_vertices {
            return Err(InvariantViolation::MultiEdgeCount { cached: self.multi_edge_vertices, actual: multi });
        }
        let actual_max = self.degrees.iter().copied().max().unwrap_or(0);
        if actual_max != self.max_degree {
            return Err(InvariantViolation::MaxDegree { cached: self.max_degree, actual: actual_max });
        }

        if self.endpoints.len() as u64 != 2 * self.edge_count {
            return Err(InvariantViolation::EndpointLength {
                len: self.endpoints.len(),
                expected: 2 * self.edge_count,
            });
        }
        let mut seen = vec![0u64; t];
        for &v in &self.endpoints {
            if !self.contains(v) {
                return Err(InvariantViolation::EndpointLength {
                    len: self.endpoints.len(),
                    expected: 2 * self.edge_count,
                });
            }
            seen[v.slot()] += 1;
        }
        for (slot, (&count, &degree)) in seen.iter().zip(&self.degrees).enumerate() {
            if count != degree {
                return Err(InvariantViolation::EndpointCount { v: VertexId::from_slot(slot), count, degree });
            }
        }

        let mut families = vec![0u64; t];
        for v in self.vertices() {
            let lineage = self.lineage(v);
            let root = lineage.family_root;
            let consistent = match lineage.origin {
                Origin::Original => root == v,
                Origin::CopiedFrom(mother) => mother < v && self.lineage(mother).family_root == root && root != v,
            };
            if !consistent || !self.is_original(root) {
                return Err(InvariantViolation::Lineage(v));
            }
            families[root.slot()] += 1;
        }
        if families != self.family_sizes {
            let sum = self.family_sizes.iter().sum();
            return Err(InvariantViolation::FamilyPartition { sum, t: t as u64 });
        }
        Ok(())
    }
}
