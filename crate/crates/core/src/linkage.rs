//! Dendrograms as ordered merge lists.
//!
//! Node ids follow the usual linkage-matrix convention: leaves are
//! `0..N`, and the merge at position `m` creates internal node `N + m`.
//! Every operation here depends only on merge *order*; distances are carried
//! along but never consulted, so tied distances still give one partition per
//! community count.

use serde::{Deserialize, Serialize};

use crate::error::LinkageError;
use crate::partition::Partition;

/// One merge of two existing nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    /// Number of leaves under the new node.
    pub size: usize,
}

/// An unvalidated merge row as read from a file; the size column is optional.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawMerge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub size: Option<usize>,
}

impl RawMerge {
    pub fn new(left: usize, right: usize, distance: f64) -> Self {
        RawMerge {
            left,
            right,
            distance,
            size: None,
        }
    }
}

impl From<(usize, usize, f64)> for RawMerge {
    fn from((left, right, distance): (usize, usize, f64)) -> Self {
        RawMerge::new(left, right, distance)
    }
}

/// A validated, monotone, binary dendrogram over `n_leaves` observations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Linkage {
    n_leaves: usize,
    merges: Vec<MergeRecord>,
}

/// Result of collapsing the communities at a cut into supernodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Trimmed {
    /// Dendrogram over the supernodes; leaf `c` is community `c` of `membership`.
    pub linkage: Linkage,
    /// Original node → supernode.
    pub membership: Partition,
}

/// Validates a raw merge list and recomputes sizes.
pub fn validate_linkage<R>(rows: &[R], n_leaves: usize) -> Result<Linkage, LinkageError>
where
    R: Copy + Into<RawMerge>,
{
    if n_leaves == 0 {
        return Err(LinkageError::NoLeaves);
    }
    if rows.len() != n_leaves - 1 {
        return Err(LinkageError::WrongRowCount {
            n_leaves,
            expected: n_leaves - 1,
            found: rows.len(),
        });
    }
    let total = 2 * n_leaves - 1;
    let mut size = vec![0usize; total];
    size[..n_leaves].fill(1);
    let mut used = vec![false; total];
    let mut merges = Vec::with_capacity(rows.len());
    let mut previous = f64::NEG_INFINITY;

    for (row, raw) in rows.iter().enumerate() {
        let raw: RawMerge = (*raw).into();
        let limit = n_leaves + row;
        for id in [raw.left, raw.right] {
            if id >= limit {
                return Err(LinkageError::IdOutOfRange { row, id, limit });
            }
        }
        if raw.left == raw.right {
            return Err(LinkageError::ChildReused { row, id: raw.right });
        }
        for id in [raw.left, raw.right] {
            if used[id] {
                return Err(LinkageError::ChildReused { row, id });
            }
        }
        if !raw.distance.is_finite() || raw.distance < 0.0 {
            return Err(LinkageError::InvalidDistance {
                row,
                distance: raw.distance,
            });
        }
        if raw.distance < previous {
            return Err(LinkageError::NonMonotoneDistances {
                row,
                distance: raw.distance,
                previous,
            });
        }
        let merged = size[raw.left] + size[raw.right];
        if let Some(found) = raw.size {
            if found != merged {
                return Err(LinkageError::SizeMismatch {
                    row,
                    expected: merged,
                    found,
                });
            }
        }
        used[raw.left] = true;
        used[raw.right] = true;
        size[limit] = merged;
        previous = raw.distance;
        merges.push(MergeRecord {
            left: raw.left,
            right: raw.right,
            distance: raw.distance,
            size: merged,
        });
    }
    Ok(Linkage { n_leaves, merges })
}

/// Partition obtained by applying the first `N − k` merges.
pub fn cut_at_k(linkage: &Linkage, k: usize) -> Result<Partition, LinkageError> {
    linkage.cut(k)
}

/// Collapses the `k` communities at cut `k` into supernodes and keeps the
/// remaining `k − 1` merges.
pub fn trim_to_supernodes(linkage: &Linkage, k: usize) -> Result<Trimmed, LinkageError> {
    linkage.trim(k)
}

impl Linkage {
    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn merges(&self) -> &[MergeRecord] {
        &self.merges
    }

    /// Rows with sizes, suitable for re-validation.
    pub fn raw_rows(&self) -> Vec<RawMerge> {
        self.merges
            .iter()
            .map(|m| RawMerge {
                left: m.left,
                right: m.right,
                distance: m.distance,
                size: Some(m.size),
            })
            .collect()
    }

    fn check_k(&self, k: usize, min: usize) -> Result<(), LinkageError> {
        if k < min || k > self.n_leaves {
            return Err(LinkageError::KOutOfRange {
                k,
                min,
                max: self.n_leaves,
            });
        }
        Ok(())
    }

    /// Root node id (over `0..2N−1`) of every leaf after the first
    /// `n_applied` merges.
    fn roots_after(&self, n_applied: usize) -> Vec<usize> {
        let n = self.n_leaves;
        let mut parent: Vec<usize> = (0..n + n_applied).collect();
        for (m, merge) in self.merges[..n_applied].iter().enumerate() {
            parent[merge.left] = n + m;
            parent[merge.right] = n + m;
        }
        // Internal ids are created in increasing order, so resolving from the
        // top down makes every lookup O(1).
        for id in (0..n + n_applied).rev() {
            let p = parent[id];
            if p != id {
                parent[id] = parent[p];
            }
        }
        parent.truncate(n);
        parent
    }

    pub fn cut(&self, k: usize) -> Result<Partition, LinkageError> {
        self.check_k(k, 1)?;
        let roots = self.roots_after(self.n_leaves - k);
        Ok(Partition::from_labels(&roots))
    }

    pub fn trim(&self, k: usize) -> Result<Trimmed, LinkageError> {
        self.check_k(k, 2)?;
        let n = self.n_leaves;
        let applied = n - k;
        let roots = self.roots_after(applied);
        let membership = Partition::from_labels(&roots);

        // Old node id → new id. Roots of the cut become leaves 0..k by label;
        // the surviving merges become k.. in their original order.
        let mut remap = vec![usize::MAX; 2 * n - 1];
        for (leaf, &root) in roots.iter().enumerate() {
            remap[root] = membership.label(leaf);
        }
        let mut merges = Vec::with_capacity(k - 1);
        let mut size = vec![1usize; 2 * k - 1];
        for (offset, merge) in self.merges[applied..].iter().enumerate() {
            let left = remap[merge.left];
            let right = remap[merge.right];
            debug_assert!(left != usize::MAX && right != usize::MAX);
            let new_id = k + offset;
            size[new_id] = size[left] + size[right];
            remap[n + applied + offset] = new_id;
            merges.push(MergeRecord {
                left,
                right,
                distance: merge.distance,
                size: size[new_id],
            });
        }
        Ok(Trimmed {
            linkage: Linkage {
                n_leaves: k,
                merges,
            },
            membership,
        })
    }
}
