//! Time-series preprocessing and the circular-shift null pipeline.

use std::path::Path;

use hce_core::seed::derive_seed;
use hce_core::{
    circular_shift_null, community_sizes, correlation_distances, extract_hierarchy_with,
    filter_communities_by_nct, filter_rois, jaccard_assign, nct_estimate, upgma_linkage_in_place,
    HierarchyResult, NctEstimate, SizeEnsemble, TimeSeriesMatrix,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CoreContext, Result};
use crate::formats;
use crate::jobs::{NullJob, Outputs, TsprepJob};
use crate::report::{write_hierarchy, write_json};

pub fn run_tsprep(job: &TsprepJob, dir: &Path, outputs: &mut Outputs) -> Result<()> {
    let m = formats::read_series(&job.series)?;
    let filter = filter_rois(&m).context("ROI filter")?;
    let binary = formats::is_binary_series(&job.series)?;
    let name = if binary { "filtered.hcet" } else { "filtered.csv" };
    formats::write_series(&outputs.path(dir, name), &m.select_rows(&filter.kept), binary)?;
    let kept: String = filter.kept.iter().map(|r| format!("{r}\n")).collect();
    formats::write_text(&outputs.path(dir, "kept_rois.csv"), &format!("roi\n{kept}"))?;
    write_json(&outputs.path(dir, "roi_filter.json"), &filter)
}

fn hierarchy_of(m: &TimeSeriesMatrix, levels: usize) -> Result<HierarchyResult> {
    let d = correlation_distances(m).context("correlation distances")?;
    let l = upgma_linkage_in_place(d).context("UPGMA")?;
    extract_hierarchy_with(&l, Some(levels)).context("HCE hierarchy")
}

#[derive(Serialize)]
struct LevelNct<'a> {
    label: String,
    /// Null instances that produced this level.
    instances_with_level: usize,
    threshold: Option<f64>,
    bandwidth: Option<f64>,
    bin_edges: Option<&'a [f64]>,
    histogram: Option<&'a [f64]>,
    surviving_communities: usize,
}

pub fn run_null(job: &NullJob, dir: &Path, outputs: &mut Outputs) -> Result<()> {
    if job.instances == 0 {
        return Err(CliError::Validation("null pipeline needs at least one instance".into()));
    }
    if job.levels == 0 {
        return Err(CliError::Validation("null pipeline needs at least one level".into()));
    }
    let m = formats::read_series(&job.series)?;
    let regions = job.regions.as_deref().map(formats::read_regions).transpose()?;
    let coords = job.coords.as_deref().map(formats::read_points).transpose()?;
    if let Some(c) = &coords {
        if c.len() != m.rows() {
            return Err(CliError::Validation(format!(
                "coordinates list {} ROIs but the series has {}",
                c.len(),
                m.rows()
            )));
        }
    }
    let filter = filter_rois(&m).context("ROI filter")?;
    write_json(&outputs.path(dir, "roi_filter.json"), &filter)?;
    let kept = &filter.kept;
    let filtered = m.select_rows(kept);
    let hierarchy = hierarchy_of(&filtered, job.levels)?;
    write_hierarchy(dir, kept, &hierarchy, outputs)?;

    let null_sizes: Vec<Vec<Vec<usize>>> = (0..job.instances)
        .into_par_iter()
        .map(|i| {
            let shifted = circular_shift_null(&filtered, derive_seed(job.seed, "null-instance", i as u64));
            let h = hierarchy_of(&shifted, job.levels)?;
            Ok(h.levels.iter().map(|l| community_sizes(&l.partition)).collect())
        })
        .collect::<Result<_>>()?;

    let mut report = Vec::new();
    let mut estimates: Vec<Option<NctEstimate>> = Vec::new();
    for level in 0..hierarchy.levels.len() {
        let pooled: Vec<usize> = null_sizes
            .iter()
            .filter_map(|inst| inst.get(level))
            .flatten()
            .copied()
            .collect();
        let estimate = if pooled.is_empty() {
            None
        } else {
            Some(
                nct_estimate(&SizeEnsemble {
                    sizes: pooled,
                    instances: job.instances,
                })
                .context("NCT")?,
            )
        };
        estimates.push(estimate);
    }

    for (level, (r, estimate)) in hierarchy.levels.iter().zip(&estimates).enumerate() {
        let threshold = estimate.as_ref().and_then(|e| e.threshold);
        let survivors = filter_communities_by_nct(&r.partition, threshold);
        let communities = r.partition.communities();
        let mut header: Vec<String> = vec!["label".into(), "size".into()];
        if regions.is_some() {
            header.extend(["region".into(), "jaccard".into()]);
        }
        if let Some(c) = &coords {
            let d = c.first().map_or(0, Vec::len);
            if d <= 3 {
                header.extend(["x", "y", "z"].iter().take(d).map(|s| s.to_string()));
            } else {
                header.extend((0..d).map(|i| format!("coord{i}")));
            }
        }
        let mut text = header.join(",") + "\n";
        for &label in &survivors {
            let members: Vec<usize> = communities[label].iter().map(|&i| kept[i]).collect();
            let mut row = vec![label.to_string(), members.len().to_string()];
            if let Some(regions) = &regions {
                let a = jaccard_assign(&members, regions).context("region assignment")?;
                row.push(a.region);
                row.push(a.jaccard.to_string());
            }
            if let Some(c) = &coords {
                let mut centroid = vec![0.0; c[0].len()];
                for &i in &members {
                    centroid.iter_mut().zip(&c[i]).for_each(|(s, x)| *s += x);
                }
                row.extend(centroid.iter().map(|s| (s / members.len() as f64).to_string()));
            }
            text.push_str(&row.join(","));
            text.push('\n');
        }
        formats::write_text(&outputs.path(dir, &format!("survivors_R{level}.csv")), &text)?;
        report.push(LevelNct {
            label: r.label.clone(),
            instances_with_level: null_sizes.iter().filter(|inst| inst.len() > level).count(),
            threshold,
            bandwidth: estimate.as_ref().map(|e| e.bandwidth),
            bin_edges: estimate.as_ref().map(|e| e.bin_edges.as_slice()),
            histogram: estimate.as_ref().map(|e| e.histogram.as_slice()),
            surviving_communities: survivors.len(),
        });
    }
    write_json(&outputs.path(dir, "nct.json"), &report)?;
    if regions.is_none() {
        outputs.notes.push("no region file given; region labeling skipped".into());
    }
    Ok(())
}
