use std::path::Path;

use hce_core::{HierarchyResult, StoppingReason};
use serde::Serialize;

use crate::error::Result;
use crate::formats;
use crate::jobs::Outputs;

#[derive(Serialize)]
struct LevelReport<'a> {
    label: &'a str,
    /// Nodes of the dendrogram this level was selected from.
    n_nodes: usize,
    k: usize,
    hce: f64,
    /// `(K, HCE)` for every K of that dendrogram, largest K first.
    curve: Vec<(usize, f64)>,
    partition: String,
}

#[derive(Serialize)]
struct HierarchyReport<'a> {
    n_leaves: usize,
    stopping_reason: StoppingReason,
    levels: Vec<LevelReport<'a>>,
}

/// Writes `hierarchy.json` and one `partition_R<m>.csv` per level. `nodes`
/// maps rows of the clustered data to the ids written in partition files.
pub fn write_hierarchy(
    dir: &Path,
    nodes: &[usize],
    hierarchy: &HierarchyResult,
    outputs: &mut Outputs,
) -> Result<()> {
    let mut levels = Vec::with_capacity(hierarchy.levels.len());
    for (m, level) in hierarchy.levels.iter().enumerate() {
        let name = format!("partition_R{m}.csv");
        formats::write_partition(&outputs.path(dir, &name), nodes, &level.partition)?;
        levels.push(LevelReport {
            label: &level.label,
            n_nodes: level.profile.n_nodes,
            k: level.k,
            hce: level.hce,
            curve: level.profile.records.iter().map(|r| (r.k, r.hce)).collect(),
            partition: name,
        });
    }
    let report = HierarchyReport {
        n_leaves: nodes.len(),
        stopping_reason: hierarchy.stopping_reason,
        levels,
    };
    // Curves hold one entry per K, so this file is written compactly.
    let text = serde_json::to_string(&report).expect("report serializes");
    formats::write_text(&outputs.path(dir, "hierarchy.json"), &(text + "\n"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    formats::write_text(path, &(text + "\n"))
}
