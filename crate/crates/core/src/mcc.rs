//! Conversion of consensus-clustering output to a [`Linkage`].
//!
//! The input is a finest-level membership vector over `N` nodes plus a
//! community-to-community merge tree with similarities in `(0, 1]`.
//! Conversion first completes the tree with leaf edges (node → finest
//! community, similarity 1), then replays it in decreasing similarity,
//! emitting merges at distance `1 − similarity`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::MccError;
use crate::linkage::{validate_linkage, Linkage, RawMerge};

/// One `parent → child` edge of the community merge tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeEdge<Id> {
    pub parent: Id,
    pub child: Id,
    pub similarity: f64,
}

/// Consensus-clustering output as read from disk; ids are whatever the
/// upstream tool produced.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConsensusTree {
    pub edges: Vec<TreeEdge<u64>>,
    /// Finest community of each node.
    pub s_c: Vec<u64>,
}

/// Tree with node leaves attached. Nodes are `0..n_nodes`; community with
/// original id `community_ids[c]` is `n_nodes + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletedTree {
    pub n_nodes: usize,
    pub community_ids: Vec<u64>,
    pub edges: Vec<TreeEdge<usize>>,
}

fn check_similarity(e: &TreeEdge<u64>) -> Result<(), MccError> {
    if !(e.similarity > 0.0 && e.similarity <= 1.0) {
        return Err(MccError::InvalidSimilarity {
            parent: e.parent,
            child: e.child,
            similarity: e.similarity,
        });
    }
    Ok(())
}

/// Validates the tree, renumbers communities in ascending id order from
/// `N` and adds a similarity-1 edge from each finest community to each of
/// its nodes.
pub fn complete_tree(tree: &ConsensusTree) -> Result<CompletedTree, MccError> {
    let n = tree.s_c.len();
    if n == 0 {
        return Err(MccError::NoNodes);
    }
    let mut parent_of: BTreeMap<u64, u64> = BTreeMap::new();
    let mut ids: BTreeSet<u64> = BTreeSet::new();
    for e in &tree.edges {
        check_similarity(e)?;
        if e.parent == e.child || parent_of.insert(e.child, e.parent).is_some() {
            return Err(MccError::CyclicTree(e.child));
        }
        ids.insert(e.parent);
        ids.insert(e.child);
    }

    if tree.edges.is_empty() {
        // A lone community: every node must belong to it.
        let distinct: BTreeSet<u64> = tree.s_c.iter().copied().collect();
        if distinct.len() != 1 {
            return Err(MccError::RootCount(distinct.len()));
        }
        ids.extend(distinct);
    } else {
        let roots = ids.iter().filter(|id| !parent_of.contains_key(id)).count();
        if roots != 1 {
            return Err(MccError::RootCount(roots));
        }
        // With one parent per child and a single root, a cycle shows up as
        // a walk that never reaches the root.
        for &start in parent_of.keys() {
            let mut current = start;
            let mut steps = 0;
            while let Some(&p) = parent_of.get(&current) {
                current = p;
                steps += 1;
                if steps > ids.len() {
                    return Err(MccError::CyclicTree(start));
                }
            }
        }
        for (node, &c) in tree.s_c.iter().enumerate() {
            if !ids.contains(&c) {
                return Err(MccError::OrphanNode { node, community: c });
            }
        }
    }

    let edge_sim: BTreeMap<(u64, u64), f64> = tree
        .edges
        .iter()
        .map(|e| ((e.parent, e.child), e.similarity))
        .collect();
    for e in &tree.edges {
        if let Some(&p) = parent_of.get(&e.parent) {
            if edge_sim[&(p, e.parent)] > e.similarity {
                return Err(MccError::NonMonotoneSimilarity {
                    parent: p,
                    child: e.parent,
                });
            }
        }
    }

    let community_ids: Vec<u64> = ids.into_iter().collect();
    let renumber = |id: u64| -> usize {
        n + community_ids
            .binary_search(&id)
            .expect("community id collected above")
    };
    let has_children: BTreeSet<u64> = tree.edges.iter().map(|e| e.parent).collect();
    let mut has_members = vec![false; community_ids.len()];
    for &c in &tree.s_c {
        has_members[renumber(c) - n] = true;
    }
    for (c, &id) in community_ids.iter().enumerate() {
        if !has_members[c] && !has_children.contains(&id) {
            return Err(MccError::EmptyCommunity(id));
        }
    }

    let mut edges: Vec<TreeEdge<usize>> = tree
        .edges
        .iter()
        .map(|e| TreeEdge {
            parent: renumber(e.parent),
            child: renumber(e.child),
            similarity: e.similarity,
        })
        .collect();
    edges.extend(tree.s_c.iter().enumerate().map(|(node, &c)| TreeEdge {
        parent: renumber(c),
        child: node,
        similarity: 1.0,
    }));
    Ok(CompletedTree {
        n_nodes: n,
        community_ids,
        edges,
    })
}

/// Replays a completed tree as a dendrogram.
///
/// Parents are processed in decreasing similarity; within one similarity,
/// nested parents go before their ancestors and otherwise in ascending id.
/// A parent's children, in ascending id, are merged as a chain: the first
/// two, then the result with the third, and so on, all at `1 − s`. A
/// parent whose child edges disagree uses the smallest similarity.
pub fn tree_to_linkage(tree: &CompletedTree) -> Result<Linkage, MccError> {
    let n = tree.n_nodes;
    let total = n + tree.community_ids.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); total];
    let mut similarity = vec![f64::INFINITY; total];
    for e in &tree.edges {
        children[e.parent].push(e.child);
        similarity[e.parent] = similarity[e.parent].min(e.similarity);
    }
    for list in &mut children {
        list.sort_unstable();
    }

    // Height above the nodes, for ordering nested parents of equal
    // similarity.
    let mut height = vec![0usize; total];
    let mut state = vec![0u8; total];
    for start in n..total {
        let mut stack = vec![start];
        while let Some(&v) = stack.last() {
            if state[v] == 2 {
                stack.pop();
                continue;
            }
            if state[v] == 1 {
                height[v] = children[v].iter().map(|&c| height[c] + 1).max().unwrap_or(0);
                state[v] = 2;
                stack.pop();
                continue;
            }
            state[v] = 1;
            for &c in &children[v] {
                match state[c] {
                    0 => stack.push(c),
                    1 => return Err(MccError::CyclicTree(community_id(tree, c))),
                    _ => {}
                }
            }
        }
    }

    let mut parents: Vec<usize> = (n..total).filter(|&p| !children[p].is_empty()).collect();
    parents.sort_by(|&a, &b| {
        similarity[b]
            .total_cmp(&similarity[a])
            .then(height[a].cmp(&height[b]))
            .then(a.cmp(&b))
    });

    let mut linkage_id: Vec<Option<usize>> = (0..total).map(|v| (v < n).then_some(v)).collect();
    let mut rows: Vec<RawMerge> = Vec::with_capacity(n.saturating_sub(1));
    for &p in &parents {
        let d = 1.0 - similarity[p];
        let mut rep: Option<usize> = None;
        for &c in &children[p] {
            let Some(id) = linkage_id[c] else {
                return Err(MccError::NonMonotoneSimilarity {
                    parent: community_id(tree, p),
                    child: community_id(tree, c),
                });
            };
            rep = Some(match rep {
                None => id,
                Some(r) => {
                    rows.push(RawMerge::new(r.min(id), r.max(id), d));
                    n + rows.len() - 1
                }
            });
        }
        linkage_id[p] = rep;
    }
    Ok(validate_linkage(&rows, n)?)
}

fn community_id(tree: &CompletedTree, v: usize) -> u64 {
    if v < tree.n_nodes {
        v as u64
    } else {
        tree.community_ids[v - tree.n_nodes]
    }
}

/// [`complete_tree`] followed by [`tree_to_linkage`].
pub fn consensus_to_linkage(tree: &ConsensusTree) -> Result<Linkage, MccError> {
    tree_to_linkage(&complete_tree(tree)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(parent: u64, child: u64, similarity: f64) -> TreeEdge<u64> {
        TreeEdge {
            parent,
            child,
            similarity,
        }
    }

    fn rows(l: &Linkage) -> Vec<(usize, usize, f64, usize)> {
        l.merges()
            .iter()
            .map(|m| (m.left, m.right, m.distance, m.size))
            .collect()
    }

    #[test]
    fn four_node_example() {
        let tree = ConsensusTree {
            edges: vec![edge(2, 0, 0.5), edge(2, 1, 0.5)],
            s_c: vec![0, 0, 1, 1],
        };
        let completed = complete_tree(&tree).unwrap();
        assert_eq!(completed.edges.len(), 6);
        assert_eq!(
            completed.edges.iter().filter(|e| e.similarity == 1.0).count(),
            4
        );
        let l = tree_to_linkage(&completed).unwrap();
        assert_eq!(
            rows(&l),
            vec![(0, 1, 0.0, 2), (2, 3, 0.0, 2), (4, 5, 0.5, 4)]
        );
    }

    #[test]
    fn three_children_chain() {
        let tree = ConsensusTree {
            edges: vec![edge(9, 1, 0.4), edge(9, 2, 0.4), edge(9, 3, 0.4)],
            s_c: vec![1, 2, 3],
        };
        let l = consensus_to_linkage(&tree).unwrap();
        assert_eq!(rows(&l), vec![(0, 1, 0.6, 2), (2, 3, 0.6, 3)]);
    }

    #[test]
    fn single_community_star() {
        let tree = ConsensusTree {
            edges: vec![],
            s_c: vec![7; 4],
        };
        let completed = complete_tree(&tree).unwrap();
        assert_eq!(completed.edges.len(), 4);
        let l = tree_to_linkage(&completed).unwrap();
        assert_eq!(l.merges().len(), 3);
        assert!(l.merges().iter().all(|m| m.distance == 0.0));
    }

    #[test]
    fn malformed_trees() {
        let orphan = ConsensusTree {
            edges: vec![edge(2, 0, 0.5), edge(2, 1, 0.5)],
            s_c: vec![0, 5],
        };
        assert_eq!(
            complete_tree(&orphan),
            Err(MccError::OrphanNode {
                node: 1,
                community: 5
            })
        );
        let two_parents = ConsensusTree {
            edges: vec![edge(2, 0, 0.5), edge(3, 0, 0.5)],
            s_c: vec![0],
        };
        assert_eq!(complete_tree(&two_parents), Err(MccError::CyclicTree(0)));
        let cycle = ConsensusTree {
            edges: vec![edge(0, 1, 0.5), edge(1, 0, 0.5), edge(5, 6, 0.5)],
            s_c: vec![6],
        };
        assert!(complete_tree(&cycle).is_err());
        let rising = ConsensusTree {
            edges: vec![edge(3, 2, 0.9), edge(2, 0, 0.5), edge(2, 1, 0.5)],
            s_c: vec![0, 1],
        };
        assert_eq!(
            complete_tree(&rising),
            Err(MccError::NonMonotoneSimilarity {
                parent: 3,
                child: 2
            })
        );
        let empty = ConsensusTree {
            edges: vec![edge(2, 0, 0.5), edge(2, 1, 0.5)],
            s_c: vec![0, 0],
        };
        assert_eq!(complete_tree(&empty), Err(MccError::EmptyCommunity(1)));
        let bad_sim = ConsensusTree {
            edges: vec![edge(2, 0, 0.0)],
            s_c: vec![0],
        };
        assert!(matches!(
            complete_tree(&bad_sim),
            Err(MccError::InvalidSimilarity { .. })
        ));
    }
}
