//! Seeded fixtures shared by the benchmarks.

use hce_core::seed::derived_rng;
use hce_core::{
    hnrg_sample, upgma_linkage, CondensedDistances, HnrgConfig, Linkage, Partition,
    TimeSeriesMatrix, WeightedGraph,
};
use rand::Rng;

/// Uniform distances in (0, 1) for `n` points.
pub fn random_distances(n: usize, seed: u64) -> CondensedDistances {
    let mut rng = derived_rng(seed, "bench-distances", n as u64);
    let values = (0..n * (n - 1) / 2).map(|_| rng.random::<f64>()).collect();
    CondensedDistances::new(n, values).expect("valid condensed length")
}

pub fn random_linkage(n: usize, seed: u64) -> Linkage {
    upgma_linkage(&random_distances(n, seed)).expect("finite distances")
}

/// A four-level HNRG graph with `s0 * r^3` nodes.
pub fn hnrg_graph(s0: usize, mean_degree: f64, seed: u64) -> WeightedGraph {
    let cfg = HnrgConfig {
        s0,
        r: 4,
        l: 4,
        mean_degree,
        rho: 1.0,
        seed,
    };
    hnrg_sample(&cfg).expect("feasible configuration").to_graph()
}

pub fn random_partition(n: usize, k: usize, seed: u64) -> Partition {
    let mut rng = derived_rng(seed, "bench-partition", k as u64);
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    Partition::from_labels(&labels)
}

pub fn random_series(rows: usize, cols: usize, seed: u64) -> TimeSeriesMatrix {
    let mut rng = derived_rng(seed, "bench-series", rows as u64);
    let values = (0..rows * cols).map(|_| rng.random::<f64>()).collect();
    TimeSeriesMatrix::from_flat(rows, cols, values).expect("matching shape")
}
