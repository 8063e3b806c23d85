//! Flat partitions with canonical labels.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::PartitionError;

/// A node → community membership vector.
///
/// Labels are canonical: community ids are `0, 1, 2, …` numbered in order of
/// first appearance when scanning nodes from 0 upward. Two partitions that
/// group nodes identically therefore compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition {
    membership: Vec<usize>,
    n_communities: usize,
}

impl Partition {
    /// Canonicalizes arbitrary labels.
    pub fn from_labels<T: Hash + Eq>(labels: &[T]) -> Self {
        let mut seen: HashMap<&T, usize> = HashMap::with_capacity(labels.len() / 2 + 1);
        let mut membership = Vec::with_capacity(labels.len());
        for label in labels {
            let next = seen.len();
            membership.push(*seen.entry(label).or_insert(next));
        }
        Partition {
            n_communities: seen.len(),
            membership,
        }
    }

    /// Wraps a membership vector that must already be canonical.
    pub fn from_canonical(membership: Vec<usize>) -> Result<Self, PartitionError> {
        let mut next = 0usize;
        for (node, &label) in membership.iter().enumerate() {
            if label == next {
                next += 1;
            } else if label > next {
                return Err(PartitionError::NotCanonical { node, label });
            }
        }
        Ok(Partition {
            membership,
            n_communities: next,
        })
    }

    /// Every node in its own community.
    pub fn singletons(n: usize) -> Self {
        Partition {
            membership: (0..n).collect(),
            n_communities: n,
        }
    }

    pub fn membership(&self) -> &[usize] {
        &self.membership
    }

    pub fn label(&self, node: usize) -> usize {
        self.membership[node]
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.membership.len()
    }

    pub fn is_empty(&self) -> bool {
        self.membership.is_empty()
    }

    /// Number of distinct communities `K`.
    pub fn n_communities(&self) -> usize {
        self.n_communities
    }

    /// Community sizes indexed by label.
    pub fn sizes_by_label(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.n_communities];
        for &label in &self.membership {
            sizes[label] += 1;
        }
        sizes
    }

    /// Node lists per community, indexed by label; nodes ascending.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_communities];
        for (node, &label) in self.membership.iter().enumerate() {
            out[label].push(node);
        }
        out
    }

    /// Relabels the communities of `self` through a partition over them.
    ///
    /// `coarse` must have one entry per community of `self`; node `i` ends up
    /// in `coarse[self[i]]`.
    pub fn compose(&self, coarse: &Partition) -> Result<Partition, PartitionError> {
        if coarse.len() != self.n_communities {
            return Err(PartitionError::LengthMismatch {
                left: self.n_communities,
                right: coarse.len(),
            });
        }
        let labels: Vec<usize> = self.membership.iter().map(|&c| coarse.membership[c]).collect();
        Ok(Partition::from_labels(&labels))
    }

    /// True if every community of `self` lies inside a single community of
    /// `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.len() != coarser.len() {
            return false;
        }
        let mut parent = vec![usize::MAX; self.n_communities];
        for (node, &fine) in self.membership.iter().enumerate() {
            let coarse = coarser.membership[node];
            if parent[fine] == usize::MAX {
                parent[fine] = coarse;
            } else if parent[fine] != coarse {
                return false;
            }
        }
        true
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = PartitionError;

    fn try_from(value: Vec<usize>) -> Result<Self, Self::Error> {
        Partition::from_canonical(value)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.membership
    }
}

/// Community sizes as a multiset, sorted descending. Sums to the node count.
pub fn community_sizes(partition: &Partition) -> Vec<usize> {
    let mut sizes = partition.sizes_by_label();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalizes_by_first_appearance() {
        let p = Partition::from_labels(&[7, 7, 3, 9, 3]);
        assert_eq!(p.membership(), &[0, 0, 1, 2, 1]);
        assert_eq!(p.n_communities(), 3);
    }

    #[test]
    fn rejects_non_canonical() {
        assert!(Partition::from_canonical(vec![0, 2, 1]).is_err());
        assert!(Partition::from_canonical(vec![1, 0]).is_err());
        assert!(Partition::from_canonical(vec![0, 1, 0, 2]).is_ok());
    }

    #[test]
    fn sizes() {
        let sizes = |m: Vec<usize>| community_sizes(&Partition::from_canonical(m).unwrap());
        assert_eq!(sizes(vec![0, 0, 1, 1]), vec![2, 2]);
        assert_eq!(sizes(vec![0, 1, 2, 3]), vec![1, 1, 1, 1]);
        assert_eq!(sizes(vec![0, 0, 0, 1, 2]), vec![3, 1, 1]);
    }

    #[test]
    fn compose_and_refine() {
        let fine = Partition::from_labels(&[0, 0, 1, 1, 2, 2]);
        let over_communities = Partition::from_labels(&[0, 0, 1]);
        let coarse = fine.compose(&over_communities).unwrap();
        assert_eq!(coarse.membership(), &[0, 0, 0, 0, 1, 1]);
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
        assert!(fine.compose(&Partition::singletons(2)).is_err());
    }
}
