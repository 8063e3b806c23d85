//! Benchmark networks with planted multilevel community structure.

mod hb;
mod hnrg;

pub use hb::{hb_sample, HbConfig};
pub use hnrg::{
    hnrg_critical_degree, hnrg_expected_degree, hnrg_probabilities, hnrg_sample, HnrgConfig,
    HnrgLevels,
};

use serde::Serialize;

use crate::distance::WeightedGraph;
use crate::partition::Partition;
use crate::seed::derive_seed;

/// A generated network with its planted hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlantedNetwork {
    pub n_nodes: usize,
    /// Undirected simple edges `(u, v)` with `u < v`, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Planted partitions, finest level first; each coarsens the previous.
    pub ground_truth: Vec<Partition>,
}

impl PlantedNetwork {
    pub fn degrees(&self) -> Vec<usize> {
        let mut degree = vec![0; self.n_nodes];
        for &(u, v) in &self.edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        degree
    }

    pub fn mean_degree(&self) -> f64 {
        if self.n_nodes == 0 {
            return 0.0;
        }
        2.0 * self.edges.len() as f64 / self.n_nodes as f64
    }

    /// Finest planted level shared by `u` and `v`; the number of levels
    /// when they share none.
    pub fn shared_level(&self, u: usize, v: usize) -> usize {
        self.ground_truth
            .iter()
            .position(|p| p.label(u) == p.label(v))
            .unwrap_or(self.ground_truth.len())
    }

    /// Fraction of edges whose finest shared level is `0..=L`.
    pub fn level_fractions(&self) -> Vec<f64> {
        let mut counts = vec![0usize; self.ground_truth.len() + 1];
        for &(u, v) in &self.edges {
            counts[self.shared_level(u, v)] += 1;
        }
        let m = self.edges.len().max(1) as f64;
        counts.into_iter().map(|c| c as f64 / m).collect()
    }

    /// Unit-weight graph of the edges.
    pub fn to_graph(&self) -> WeightedGraph {
        WeightedGraph::from_edges(self.n_nodes, self.edges.iter().map(|&(u, v)| (u, v, 1.0)))
            .expect("generated edges are valid")
    }
}

/// Seed of instance `k` in an ensemble rooted at `seed`.
pub fn instance_seed(seed: u64, k: u64) -> u64 {
    derive_seed(seed, "instance", k)
}
