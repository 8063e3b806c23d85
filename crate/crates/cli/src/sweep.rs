//! Benchmark sweeps: per grid cell, mean and standard error of
//! AMI(R_i, L_i) and of the best AMI reachable by any dendrogram cut.

use std::path::Path;

use hce_core::seed::derive_seed;
use hce_core::{
    ami, extract_hierarchy, graph_cosine_distances_with, hb_sample, hnrg_probabilities,
    hnrg_sample, instance_seed, upgma_linkage_in_place, BenchError, HbConfig, HnrgConfig,
    PlantedNetwork, ZeroNorm,
};
use rayon::prelude::*;

use crate::error::{CliError, CoreContext, Result};
use crate::formats;
use crate::jobs::{HbSweepJob, HnrgSweepJob, Outputs};

/// AMI(R_i, L_i) and best-cut AMI for every planted level of one network.
fn score(net: &PlantedNetwork, zero_norm: ZeroNorm) -> Result<Vec<(f64, f64)>> {
    let d = graph_cosine_distances_with(&net.to_graph(), zero_norm).context("graph cosine distances")?;
    let l = upgma_linkage_in_place(d).context("UPGMA")?;
    let h = extract_hierarchy(&l).context("HCE hierarchy")?;
    let cuts: Vec<_> = (1..=net.n_nodes)
        .map(|k| l.cut(k).expect("k in range"))
        .collect();
    net.ground_truth
        .iter()
        .enumerate()
        .map(|(level, truth)| {
            let at_level = match h.levels.get(level) {
                Some(r) => ami(&r.partition, truth).context("AMI")?,
                None => 0.0,
            };
            let mut best = f64::NEG_INFINITY;
            for cut in &cuts {
                best = best.max(ami(cut, truth).context("AMI")?);
            }
            Ok((at_level, best))
        })
        .collect()
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// A generated network, or the reason a cell was skipped.
type Sample = std::result::Result<PlantedNetwork, String>;

enum Cell {
    Scored(Vec<Vec<(f64, f64)>>),
    Skipped(String),
}

/// Runs every (cell, instance) pair in the shared pool and regroups the
/// results by cell, in grid order.
fn run_cells<F>(
    n_cells: usize,
    levels: usize,
    instances: usize,
    zero_norm: ZeroNorm,
    sample: F,
) -> Result<Vec<Cell>>
where
    F: Fn(usize, u64) -> Result<Sample> + Sync,
{
    let tasks: Vec<(usize, usize)> = (0..n_cells)
        .flat_map(|c| (0..instances).map(move |i| (c, i)))
        .collect();
    type Scores = std::result::Result<Vec<(f64, f64)>, String>;
    let results: Vec<Result<Scores>> = tasks
        .par_iter()
        .map(|&(cell, i)| match sample(cell, i as u64)? {
            Ok(net) => Ok(Ok(score(&net, zero_norm)?)),
            Err(reason) => Ok(Err(reason)),
        })
        .collect();
    let mut cells = Vec::with_capacity(n_cells);
    let mut iter = results.into_iter();
    for _ in 0..n_cells {
        let mut scored = Vec::with_capacity(instances);
        let mut skipped = None;
        for _ in 0..instances {
            match iter.next().expect("one result per task")? {
                Ok(s) => scored.push(s),
                Err(reason) => skipped = Some(reason),
            }
        }
        debug_assert!(scored.iter().all(|s| s.len() == levels));
        cells.push(match skipped {
            Some(reason) => Cell::Skipped(reason),
            None => Cell::Scored(scored),
        });
    }
    Ok(cells)
}

fn write_rows(text: &mut String, prefix: &str, levels: usize, instances: usize, cell: &Cell) {
    for level in 0..levels {
        match cell {
            Cell::Scored(scores) => {
                let at: Vec<f64> = scores.iter().map(|s| s[level].0).collect();
                let best: Vec<f64> = scores.iter().map(|s| s[level].1).collect();
                let (am, ase) = mean_se(&at);
                let (bm, bse) = mean_se(&best);
                text.push_str(&format!("{prefix},{level},{instances},{am},{ase},{bm},{bse},ok\n"));
            }
            Cell::Skipped(reason) => {
                text.push_str(&format!("{prefix},{level},0,,,,,{reason}\n"));
            }
        }
    }
}

const COLUMNS: &str = "level,instances,ami_mean,ami_se,best_cut_ami_mean,best_cut_ami_se,status";

pub fn run_sweep_hnrg(job: &HnrgSweepJob, dir: &Path, outputs: &mut Outputs) -> Result<()> {
    if job.instances == 0 || job.mean_degrees.is_empty() {
        return Err(CliError::Validation("sweep needs at least one cell and one instance".into()));
    }
    // Infeasible mean degrees are reported up front rather than skipped.
    for &k in &job.mean_degrees {
        hnrg_probabilities(&HnrgConfig {
            mean_degree: k,
            ..job.base
        })
        .context(format!("HNRG cell <k> = {k}"))?;
    }
    let cells = run_cells(job.mean_degrees.len(), job.base.l, job.instances, job.zero_norm.into(), |cell, i| {
        let cfg = HnrgConfig {
            mean_degree: job.mean_degrees[cell],
            seed: instance_seed(derive_seed(job.seed, "sweep-cell", cell as u64), i),
            ..job.base
        };
        Ok(Ok(hnrg_sample(&cfg).context("HNRG")?))
    })?;
    let mut text = format!("mean_degree,{COLUMNS}\n");
    for (k, cell) in job.mean_degrees.iter().zip(&cells) {
        write_rows(&mut text, &k.to_string(), job.base.l, job.instances, cell);
    }
    formats::write_text(&outputs.path(dir, "sweep.csv"), &text)
}

fn hb_fractions(job: &HbSweepJob, p1: f64, p2: f64) -> [f64; 4] {
    [1.0 - p1 - p2 - job.background, p1, p2, job.background]
}

pub fn run_sweep_hb(job: &HbSweepJob, dir: &Path, outputs: &mut Outputs) -> Result<()> {
    if job.instances == 0 || job.p1.is_empty() || job.p2.is_empty() {
        return Err(CliError::Validation("sweep needs at least one cell and one instance".into()));
    }
    let grid: Vec<(f64, f64)> = job
        .p1
        .iter()
        .flat_map(|&a| job.p2.iter().map(move |&b| (a, b)))
        .collect();
    let levels = 3;
    let cells = run_cells(grid.len(), levels, job.instances, job.zero_norm.into(), |cell, i| {
        let (p1, p2) = grid[cell];
        let fractions = hb_fractions(job, p1, p2);
        // Invalid samples (p_0 < 0) are rejected and marked skipped.
        if fractions.iter().any(|&p| p < -1e-12) {
            return Ok(Err("skipped: p0 < 0".to_string()));
        }
        let fractions = fractions.map(|p| p.max(0.0)).to_vec();
        let cfg = HbConfig::new(
            job.n,
            fractions,
            instance_seed(derive_seed(job.seed, "sweep-cell", cell as u64), i),
        );
        match hb_sample(&cfg) {
            Ok(net) => Ok(Ok(net)),
            Err(BenchError::InfeasibleBudget { level, .. }) => {
                Ok(Err(format!("skipped: level {level} budget infeasible")))
            }
            Err(e) => Err(e).context("HB"),
        }
    })?;
    let mut text = format!("p0,p1,p2,p3,{COLUMNS}\n");
    for (&(p1, p2), cell) in grid.iter().zip(&cells) {
        let f = hb_fractions(job, p1, p2);
        let prefix = format!("{},{},{},{}", f[0], f[1], f[2], f[3]);
        write_rows(&mut text, &prefix, levels, job.instances, cell);
    }
    formats::write_text(&outputs.path(dir, "sweep.csv"), &text)
}
