//! `cluster`/`hce`, `bench`, `mcc-convert` and `ami`.

use std::path::Path;

use hce_core::{
    ami_report, consensus_to_linkage, correlation_distances, euclidean_distances,
    extract_hierarchy_with, graph_cosine_distances_with, hb_sample, hnrg_expected_degree,
    hnrg_probabilities, hnrg_sample, upgma_linkage_in_place, CondensedDistances, ConsensusTree,
    HbConfig, HnrgConfig, Linkage, PlantedNetwork, WeightedGraph,
};
use serde::Serialize;

use crate::error::{CliError, CoreContext, Result};
use crate::formats;
use crate::jobs::{ClusterJob, DistanceChoice, Input, Outputs};
use crate::report::{write_hierarchy, write_json};

fn distance_mismatch(input: &str, choice: DistanceChoice) -> CliError {
    CliError::Validation(format!("distance {choice:?} does not apply to {input} input").to_lowercase())
}

fn cluster_graph(g: WeightedGraph, job: &ClusterJob) -> Result<Linkage> {
    let g = if job.log1p {
        g.map_weights(f64::ln_1p).context("log1p transform")?
    } else {
        g
    };
    let d = graph_cosine_distances_with(&g, job.zero_norm.into()).context("graph cosine distances")?;
    upgma_linkage_in_place(d).context("UPGMA")
}

fn check_symmetric(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    for (i, row) in rows.iter().enumerate() {
        if row[i] != 0.0 {
            return Err(CliError::parse(path, i + 1, "distance matrix diagonal must be zero"));
        }
        for (j, &v) in row.iter().enumerate().skip(i + 1) {
            if v != rows[j][i] {
                return Err(CliError::parse(path, i + 1, format!("distance matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Builds the dendrogram a cluster job asks for.
pub fn build_linkage(job: &ClusterJob) -> Result<Linkage> {
    use DistanceChoice::*;
    if job.log1p && !matches!(job.input, Input::Edges { .. } | Input::Dense { .. }) {
        return Err(CliError::Validation("--log1p applies to graph inputs only".into()));
    }
    match &job.input {
        Input::Edges { path, nodes } => match job.distance {
            Auto | Cosine => cluster_graph(formats::read_edge_list(path, *nodes)?, job),
            other => Err(distance_mismatch("edge-list", other)),
        },
        Input::Dense { path } => {
            let rows = formats::read_dense(path)?;
            match job.distance {
                Auto | Cosine => cluster_graph(
                    WeightedGraph::from_dense(&rows).context(path.display().to_string())?,
                    job,
                ),
                Precomputed if job.log1p => {
                    Err(CliError::Validation("--log1p does not apply to precomputed distances".into()))
                }
                Precomputed => {
                    check_symmetric(path, &rows)?;
                    let d = CondensedDistances::from_square(&rows).context(path.display().to_string())?;
                    upgma_linkage_in_place(d).context("UPGMA")
                }
                other => Err(distance_mismatch("dense-matrix", other)),
            }
        }
        Input::Series { path } => match job.distance {
            Auto | Correlation => {
                let m = formats::read_series(path)?;
                let d = correlation_distances(&m).context("correlation distances")?;
                upgma_linkage_in_place(d).context("UPGMA")
            }
            other => Err(distance_mismatch("time-series", other)),
        },
        Input::Points { path } => match job.distance {
            Auto | Euclidean => {
                let points = formats::read_points(path)?;
                let d = euclidean_distances(&points).context("Euclidean distances")?;
                upgma_linkage_in_place(d).context("UPGMA")
            }
            other => Err(distance_mismatch("point-cloud", other)),
        },
        Input::Linkage { path } => match job.distance {
            Auto => formats::read_linkage(path),
            other => Err(distance_mismatch("linkage", other)),
        },
        Input::Tree { path, communities } => match job.distance {
            Auto => {
                let tree = ConsensusTree {
                    edges: formats::read_tree(path)?,
                    s_c: formats::read_communities(communities)?,
                };
                consensus_to_linkage(&tree).context(path.display().to_string())
            }
            other => Err(distance_mismatch("consensus-tree", other)),
        },
    }
}

pub fn run_cluster(job: &ClusterJob, dir: &Path, outputs: &mut Outputs) -> Result<()> {
    let linkage = build_linkage(job)?;
    if !matches!(job.input, Input::Linkage { .. }) {
        formats::write_linkage(&outputs.path(dir, "linkage.csv"), &linkage)?;
    }
    let hierarchy = extract_hierarchy_with(&linkage, job.max_levels).context("HCE hierarchy")?;
    let nodes: Vec<usize> = (0..linkage.n_leaves()).collect();
    write_hierarchy(dir, &nodes, &hierarchy, outputs)?;
    if job.log1p {
        outputs.notes.push("edge weights transformed with w = ln(1 + f)".into());
    }
    Ok(())
}

#[derive(Serialize)]
struct NetworkStats {
    n_nodes: usize,
    n_edges: usize,
    mean_degree: f64,
    min_degree: usize,
    max_degree: usize,
    /// Fraction of edges whose finest shared planted level is 0..=L.
    level_fractions: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected_mean_degree: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    level_probabilities: Option<Vec<f64>>,
}

fn write_network(dir: &Path, net: &PlantedNetwork, mut stats: NetworkStats, outputs: &mut Outputs) -> Result<()> {
    formats::write_edge_list(&outputs.path(dir, "edges.tsv"), &net.edges)?;
    let nodes: Vec<usize> = (0..net.n_nodes).collect();
    for (level, truth) in net.ground_truth.iter().enumerate() {
        formats::write_partition(&outputs.path(dir, &format!("truth_L{level}.csv")), &nodes, truth)?;
    }
    let degrees = net.degrees();
    stats.n_nodes = net.n_nodes;
    stats.n_edges = net.edges.len();
    stats.mean_degree = net.mean_degree();
    stats.min_degree = degrees.iter().copied().min().unwrap_or(0);
    stats.max_degree = degrees.iter().copied().max().unwrap_or(0);
    stats.level_fractions = net.level_fractions();
    write_json(&outputs.path(dir, "stats.json"), &stats)
}

fn empty_stats() -> NetworkStats {
    NetworkStats {
        n_nodes: 0,
        n_edges: 0,
        mean_degree: 0.0,
        min_degree: 0,
        max_degree: 0,
        level_fractions: Vec::new(),
        expected_mean_degree: None,
        level_probabilities: None,
    }
}

pub fn run_bench_hnrg(cfg: &HnrgConfig, dir: &Path, outputs: &mut Outputs) -> Result<()> {
    let levels = hnrg_probabilities(cfg).context("HNRG")?;
    let net = hnrg_sample(cfg).context("HNRG")?;
    let stats = NetworkStats {
        expected_mean_degree: Some(hnrg_expected_degree(&levels)),
        level_probabilities: Some(levels.probabilities.clone()),
        ..empty_stats()
    };
    write_network(dir, &net, stats, outputs)
}

pub fn run_bench_hb(cfg: &HbConfig, dir: &Path, outputs: &mut Outputs) -> Result<()> {
    let net = hb_sample(cfg).context("HB")?;
    write_network(dir, &net, empty_stats(), outputs)
}

pub fn run_mcc_convert(tree: &Path, communities: &Path, out: &Path) -> Result<()> {
    let consensus = ConsensusTree {
        edges: formats::read_tree(tree)?,
        s_c: formats::read_communities(communities)?,
    };
    let linkage = consensus_to_linkage(&consensus).context(tree.display().to_string())?;
    formats::write_linkage(out, &linkage)
}

pub fn run_ami(u: &Path, v: &Path) -> Result<String> {
    let pu = formats::read_partition(u)?;
    let pv = formats::read_partition(v)?;
    let report = ami_report(&pu, &pv).context("AMI")?;
    Ok(serde_json::to_string_pretty(&report).expect("report serializes"))
}
