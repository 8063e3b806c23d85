//! Average-linkage (UPGMA) clustering.
//!
//! [`upgma_linkage`] runs the nearest-neighbor-chain algorithm directly on
//! the condensed array: `O(n²)` time and `O(n)` memory on top of the
//! distances. [`upgma_naive_oracle`] is a deliberately plain `O(n³)`
//! reference used to check it.

use crate::distance::CondensedDistances;
use crate::error::UpgmaError;
use crate::linkage::{validate_linkage, Linkage, RawMerge};

/// Largest input accepted by the naive oracle.
pub const ORACLE_LIMIT: usize = 512;

/// Work counters of one clustering run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UpgmaStats {
    /// Distance lookups made while searching for nearest neighbors.
    pub candidate_evaluations: u64,
    /// Inter-cluster distances rewritten by the average update.
    pub updates: u64,
}

#[inline]
fn idx(n: usize, i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

/// UPGMA dendrogram of `d`. The distances are copied; use
/// [`upgma_linkage_in_place`] to avoid holding two arrays.
pub fn upgma_linkage(d: &CondensedDistances) -> Result<Linkage, UpgmaError> {
    let mut values = d.values().to_vec();
    Ok(nn_chain(d.n(), &mut values)?.0)
}

/// As [`upgma_linkage`], consuming the distances and reusing their storage.
pub fn upgma_linkage_in_place(d: CondensedDistances) -> Result<Linkage, UpgmaError> {
    Ok(upgma_linkage_with_stats(d)?.0)
}

/// Consuming variant that also reports work counters.
pub fn upgma_linkage_with_stats(
    d: CondensedDistances,
) -> Result<(Linkage, UpgmaStats), UpgmaError> {
    let n = d.n();
    let mut values = d.into_values();
    nn_chain(n, &mut values)
}

fn nn_chain(n: usize, dist: &mut [f64]) -> Result<(Linkage, UpgmaStats), UpgmaError> {
    if n < 2 {
        return Err(UpgmaError::TooFewObservations(n));
    }
    if let Some(i) = dist.iter().position(|v| !v.is_finite()) {
        return Err(UpgmaError::NonFiniteDistance(i));
    }
    let mut stats = UpgmaStats::default();
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut chain: Vec<usize> = Vec::with_capacity(n);
    // (x, y, distance) with x, y the representative positions at merge time.
    let mut raw: Vec<(usize, usize, f64)> = Vec::with_capacity(n - 1);
    let mut first_active = 0usize;

    for _ in 0..n - 1 {
        if chain.is_empty() {
            while !active[first_active] {
                first_active += 1;
            }
            chain.push(first_active);
        }
        let (x, y, d_xy) = loop {
            let x = *chain.last().expect("chain is non-empty");
            // Prefer the previous chain element on ties so the chain
            // always terminates at a reciprocal pair.
            let (mut y, mut best) = if chain.len() >= 2 {
                let prev = chain[chain.len() - 2];
                (prev, dist[idx(n, x, prev)])
            } else {
                (usize::MAX, f64::INFINITY)
            };
            for z in 0..n {
                if !active[z] || z == x {
                    continue;
                }
                stats.candidate_evaluations += 1;
                let v = dist[idx(n, x, z)];
                if v < best {
                    best = v;
                    y = z;
                }
            }
            if chain.len() >= 2 && y == chain[chain.len() - 2] {
                break (x, y, best);
            }
            chain.push(y);
        };
        chain.pop();
        chain.pop();

        let (sx, sy) = (size[x] as f64, size[y] as f64);
        let total = sx + sy;
        for z in 0..n {
            if !active[z] || z == x || z == y {
                continue;
            }
            let iy = idx(n, y, z);
            let updated = (sx * dist[idx(n, x, z)] + sy * dist[iy]) / total;
            // Reducibility puts the update at or above d_xy; the clamp keeps
            // that true after rounding, so the final sort stays a valid tree.
            dist[iy] = updated.max(d_xy);
            stats.updates += 1;
        }
        active[x] = false;
        size[y] += size[x];
        raw.push((x, y, d_xy));
    }

    // Stable, so equal-distance merges keep their discovery order, in which
    // children always precede parents.
    raw.sort_by(|a, b| a.2.total_cmp(&b.2));
    let rows = relabel(n, &raw);
    let linkage = validate_linkage(&rows, n).expect("NN-chain output is a valid dendrogram");
    Ok((linkage, stats))
}

/// Maps representative positions to linkage node ids with a union-find.
fn relabel(n: usize, raw: &[(usize, usize, f64)]) -> Vec<RawMerge> {
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        while parent[x] != root {
            let next = parent[x];
            parent[x] = root;
            x = next;
        }
        root
    }
    raw.iter()
        .enumerate()
        .map(|(m, &(x, y, d))| {
            let a = find(&mut parent, x);
            let b = find(&mut parent, y);
            let new_id = n + m;
            parent[a] = new_id;
            parent[b] = new_id;
            RawMerge::new(a.min(b), a.max(b), d)
        })
        .collect()
}

/// Reference UPGMA: every step recomputes all cluster-pair averages from
/// the original distances and merges the closest pair, ties going to the
/// smallest `(left id, right id)`.
pub fn upgma_naive_oracle(d: &CondensedDistances) -> Result<Linkage, UpgmaError> {
    let n = d.n();
    if n > ORACLE_LIMIT {
        return Err(UpgmaError::TooLargeForOracle {
            n,
            limit: ORACLE_LIMIT,
        });
    }
    if n < 2 {
        return Err(UpgmaError::TooFewObservations(n));
    }
    if let Some(i) = d.values().iter().position(|v| !v.is_finite()) {
        return Err(UpgmaError::NonFiniteDistance(i));
    }
    // (node id, members), kept sorted by id.
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut rows = Vec::with_capacity(n - 1);
    for m in 0..n - 1 {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let (ma, mb) = (&clusters[a].1, &clusters[b].1);
                let mut sum = 0.0;
                for &p in ma {
                    for &q in mb {
                        sum += d.get(p, q);
                    }
                }
                let avg = sum / (ma.len() * mb.len()) as f64;
                if best.is_none_or(|(_, _, v)| avg < v) {
                    best = Some((a, b, avg));
                }
            }
        }
        let (a, b, avg) = best.expect("at least two clusters remain");
        let (id_b, members_b) = clusters.remove(b);
        let (id_a, members_a) = clusters.remove(a);
        rows.push(RawMerge::new(id_a, id_b, avg));
        let mut members = members_a;
        members.extend(members_b);
        clusters.push((n + m, members));
    }
    Ok(validate_linkage(&rows, n).expect("oracle output is a valid dendrogram"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn merges(l: &Linkage) -> Vec<(usize, usize, f64, usize)> {
        l.merges()
            .iter()
            .map(|m| (m.left, m.right, m.distance, m.size))
            .collect()
    }

    #[test]
    fn three_points() {
        let d = CondensedDistances::new(3, vec![1.0, 4.0, 6.0]).unwrap();
        let expected = vec![(0, 1, 1.0, 2), (2, 3, 5.0, 3)];
        assert_eq!(merges(&upgma_linkage(&d).unwrap()), expected);
        assert_eq!(merges(&upgma_naive_oracle(&d).unwrap()), expected);
    }

    #[test]
    fn two_points() {
        let d = CondensedDistances::new(2, vec![0.7]).unwrap();
        assert_eq!(merges(&upgma_linkage(&d).unwrap()), vec![(0, 1, 0.7, 2)]);
        assert_eq!(merges(&upgma_naive_oracle(&d).unwrap()), vec![(0, 1, 0.7, 2)]);
    }

    #[test]
    fn all_tied() {
        let d = CondensedDistances::new(6, vec![2.5; 15]).unwrap();
        for l in [upgma_linkage(&d).unwrap(), upgma_naive_oracle(&d).unwrap()] {
            assert!(l.merges().iter().all(|m| m.distance == 2.5));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let d = CondensedDistances::new(1, vec![]).unwrap();
        assert_eq!(upgma_linkage(&d), Err(UpgmaError::TooFewObservations(1)));
        let n = ORACLE_LIMIT + 1;
        let d = CondensedDistances::new(n, vec![1.0; n * (n - 1) / 2]).unwrap();
        assert!(matches!(
            upgma_naive_oracle(&d),
            Err(UpgmaError::TooLargeForOracle { .. })
        ));
    }

    #[test]
    fn six_points_match_oracle() {
        let values: Vec<f64> = (0..15).map(|i| ((i * 7919) % 97) as f64 + 0.01 * i as f64).collect();
        let d = CondensedDistances::new(6, values).unwrap();
        let fast = upgma_linkage(&d).unwrap();
        let slow = upgma_naive_oracle(&d).unwrap();
        for (a, b) in fast.merges().iter().zip(slow.merges()) {
            assert_eq!((a.left, a.right, a.size), (b.left, b.right, b.size));
            assert!((a.distance - b.distance).abs() < 1e-12);
        }
    }
}
