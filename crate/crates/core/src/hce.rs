//! Hierarchical clustering entropy (HCE) and renormalization.
//!
//! For a partition of `N` nodes into `K` communities of sizes `n_c`, the
//! effective community fractions are `p_c = (n_c − 1) / (N − K)` and
//!
//! ```text
//! HCE(K) = (N − K) / (N − 1) · Σ_c p_c ln(1 / p_c)
//! ```
//!
//! Singletons carry `p_c = 0` and contribute nothing, so both the all-singleton
//! partition and the root score exactly zero. Values are in nats.
//!
//! Renormalization collapses the communities of the selected cut into
//! supernodes, trims the dendrogram to the merges above that cut and repeats
//! the selection with `N` set to the supernode count.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::HceError;
use crate::linkage::Linkage;
use crate::partition::Partition;

/// HCE of one cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HceRecord {
    pub k: usize,
    pub hce: f64,
}

/// HCE for every community count of one dendrogram.
///
/// Records run from `K = N` down to `K = 1`. Community sizes per `K` are not
/// stored (that would be quadratic in `N`); recover them with
/// [`crate::community_sizes`] on [`Linkage::cut`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HceProfile {
    pub n_nodes: usize,
    pub records: Vec<HceRecord>,
}

impl HceProfile {
    pub fn hce_at(&self, k: usize) -> Option<f64> {
        if k == 0 || k > self.n_nodes {
            return None;
        }
        Some(self.records[self.n_nodes - k].hce)
    }
}

/// The maximal-HCE cut of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub k: usize,
    pub hce: f64,
}

/// Size histogram of the non-singleton communities: size → multiplicity.
type SizeHistogram = BTreeMap<usize, usize>;

/// Entropy term of an HCE evaluation; `retained` is `N − K`.
fn hce_from_histogram(histogram: &SizeHistogram, retained: usize, n_nodes: usize) -> f64 {
    if retained == 0 {
        return 0.0;
    }
    let m = retained as f64;
    let entropy: f64 = histogram
        .iter()
        .map(|(&size, &count)| {
            let effective = (size - 1) as f64;
            count as f64 * (effective / m) * (m / effective).ln()
        })
        .sum();
    m / (n_nodes - 1) as f64 * entropy
}

fn check_sizes(sizes: &[usize], n_nodes: usize) -> Result<(), HceError> {
    let sum: usize = sizes.iter().sum();
    if sum != n_nodes || sizes.contains(&0) {
        return Err(HceError::SizesDoNotSumToN { sum, n: n_nodes });
    }
    Ok(())
}

/// Effective community fractions, in the order of `sizes`.
///
/// With `K = N` (all singletons) every fraction is zero by convention.
pub fn effective_fractions(sizes: &[usize], n_nodes: usize) -> Result<Vec<f64>, HceError> {
    check_sizes(sizes, n_nodes)?;
    let retained = n_nodes - sizes.len();
    if retained == 0 {
        return Ok(vec![0.0; sizes.len()]);
    }
    Ok(sizes
        .iter()
        .map(|&s| (s - 1) as f64 / retained as f64)
        .collect())
}

/// HCE of a single partition given its community sizes.
pub fn hce_value(sizes: &[usize], n_nodes: usize) -> Result<f64, HceError> {
    if n_nodes < 2 {
        return Err(HceError::NTooSmall(n_nodes));
    }
    check_sizes(sizes, n_nodes)?;
    let mut histogram = SizeHistogram::new();
    for &s in sizes.iter().filter(|&&s| s > 1) {
        *histogram.entry(s).or_default() += 1;
    }
    Ok(hce_from_histogram(
        &histogram,
        n_nodes - sizes.len(),
        n_nodes,
    ))
}

/// HCE at every `K = N..1`, replaying the merges once.
pub fn hce_profile(linkage: &Linkage) -> Result<HceProfile, HceError> {
    let n = linkage.n_leaves();
    if n < 2 {
        return Err(HceError::NTooSmall(n));
    }
    let mut node_size = vec![1usize; 2 * n - 1];
    let mut histogram = SizeHistogram::new();
    let mut records = Vec::with_capacity(n);
    records.push(HceRecord { k: n, hce: 0.0 });

    fn remove_size(histogram: &mut SizeHistogram, size: usize) {
        if size > 1 {
            let count = histogram.get_mut(&size).expect("size present");
            *count -= 1;
            if *count == 0 {
                histogram.remove(&size);
            }
        }
    }
    for (m, merge) in linkage.merges().iter().enumerate() {
        remove_size(&mut histogram, node_size[merge.left]);
        remove_size(&mut histogram, node_size[merge.right]);
        let size = node_size[merge.left] + node_size[merge.right];
        node_size[n + m] = size;
        *histogram.entry(size).or_default() += 1;
        let k = n - m - 1;
        records.push(HceRecord {
            k,
            hce: hce_from_histogram(&histogram, n - k, n),
        });
    }
    Ok(HceProfile {
        n_nodes: n,
        records,
    })
}

/// Argmax of the profile, ties going to the largest `K`. `None` when the
/// maximum is zero.
pub fn select_level(profile: &HceProfile) -> Option<Selection> {
    let mut best: Option<Selection> = None;
    // Records run from large K to small, so only a strict improvement may
    // replace the incumbent.
    for r in &profile.records {
        if r.hce > best.map_or(0.0, |b| b.hce) {
            best = Some(Selection { k: r.k, hce: r.hce });
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingReason {
    /// The current dendrogram has no cut with positive HCE.
    NoInformativeLevel,
    /// Fewer than two (super)nodes remain.
    TooFewNodes,
    /// The configured level cap was reached.
    MaxLevels,
}

/// One renormalization level `R_m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierarchyLevel {
    pub label: String,
    pub k: usize,
    pub hce: f64,
    /// Membership of the original nodes.
    pub partition: Partition,
    /// Profile of the dendrogram this level was selected from.
    pub profile: HceProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierarchyResult {
    pub levels: Vec<HierarchyLevel>,
    pub stopping_reason: StoppingReason,
}

/// Recursive HCE selection with renormalization, finest level first.
pub fn extract_hierarchy(linkage: &Linkage) -> Result<HierarchyResult, HceError> {
    extract_hierarchy_with(linkage, None)
}

/// As [`extract_hierarchy`], stopping after at most `max_levels` levels.
pub fn extract_hierarchy_with(
    linkage: &Linkage,
    max_levels: Option<usize>,
) -> Result<HierarchyResult, HceError> {
    let mut current = linkage.clone();
    let mut membership = Partition::singletons(linkage.n_leaves());
    let mut levels = Vec::new();

    let stopping_reason = loop {
        if max_levels.is_some_and(|cap| levels.len() >= cap) {
            break StoppingReason::MaxLevels;
        }
        if current.n_leaves() < 2 {
            break StoppingReason::TooFewNodes;
        }
        let profile = hce_profile(&current)?;
        let Some(selection) = select_level(&profile) else {
            break StoppingReason::NoInformativeLevel;
        };
        let trimmed = current.trim(selection.k)?;
        membership = membership
            .compose(&trimmed.membership)
            .expect("supernode membership covers every community");
        levels.push(HierarchyLevel {
            label: format!("R_{}", levels.len()),
            k: selection.k,
            hce: selection.hce,
            partition: membership.clone(),
            profile,
        });
        current = trimmed.linkage;
    };

    Ok(HierarchyResult {
        levels,
        stopping_reason,
    })
}
