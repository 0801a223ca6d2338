use std::collections::BTreeMap;

use crate::graph::MultiGraph;

/// Sparse count of vertices by degree; absent keys are zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DegreeHistogram {
    total: u64,
    counts: BTreeMap<u64, u64>,
}

impl DegreeHistogram {
    pub fn from_values(values: impl IntoIterator<Item = u64>) -> Self {
        let mut h = Self::default();
        for k in values {
            *h.counts.entry(k).or_default() += 1;
            h.total += 1;
        }
        h
    }

    /// From `(k, count)` pairs; repeated keys accumulate, zero counts are dropped.
    pub fn from_counts(pairs: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut h = Self::default();
        for (k, c) in pairs {
            if c > 0 {
                *h.counts.entry(k).or_default() += c;
                h.total += c;
            }
        }
        h
    }

    /// Number of vertices, `t` for a graph snapshot.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, k: u64) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    pub fn fraction(&self, k: u64) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(k) as f64 / self.total as f64
        }
    }

    /// `(k, count)` in ascending `k`, nonzero counts only.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&k, &c)| (k, c))
    }

    /// `sum_k k * count_k`, which is `2e` for a graph snapshot.
    pub fn degree_sum(&self) -> u64 {
        self.iter().map(|(k, c)| k * c).sum()
    }

    pub fn max_key(&self) -> Option<u64> {
        self.counts.keys().next_back().copied()
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }
}

/// `D_k(t)` for every `k`.
pub fn degree_histogram(g: &MultiGraph) -> DegreeHistogram {
    DegreeHistogram::from_values(g.degrees().iter().copied())
}
