//! Partition comparison: mutual information, its expectation under random
//! relabeling, adjusted mutual information, and Jaccard region assignment.
//! Everything is in nats.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::partition::Partition;

/// Sparse contingency table of two partitions over the same nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    /// Non-zero cells `(i, j, n_ij)` sorted by `(i, j)`.
    cells: Vec<(usize, usize, usize)>,
    row_sums: Vec<usize>,
    col_sums: Vec<usize>,
    total: usize,
}

impl ContingencyTable {
    pub fn from_partitions(u: &Partition, v: &Partition) -> Result<Self, MetricsError> {
        if u.len() != v.len() {
            return Err(MetricsError::LengthMismatch(u.len(), v.len()));
        }
        let mut pairs: Vec<(usize, usize)> = u
            .membership()
            .iter()
            .copied()
            .zip(v.membership().iter().copied())
            .collect();
        pairs.sort_unstable();
        let mut cells: Vec<(usize, usize, usize)> = Vec::new();
        for (i, j) in pairs {
            match cells.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += 1,
                _ => cells.push((i, j, 1)),
            }
        }
        Ok(ContingencyTable {
            cells,
            row_sums: u.sizes_by_label(),
            col_sums: v.sizes_by_label(),
            total: u.len(),
        })
    }

    pub fn cells(&self) -> &[(usize, usize, usize)] {
        &self.cells
    }

    pub fn row_sums(&self) -> &[usize] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[usize] {
        &self.col_sums
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Mutual information of the table.
    pub fn mutual_information(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let n = self.total as f64;
        let mi: f64 = self
            .cells
            .iter()
            .map(|&(i, j, c)| {
                let c = c as f64;
                let ab = self.row_sums[i] as f64 * self.col_sums[j] as f64;
                c / n * (n * c / ab).ln()
            })
            .sum();
        mi.max(0.0)
    }

    /// True when every row and every column has exactly one non-zero cell,
    /// i.e. the partitions agree up to relabeling.
    pub fn is_bijective(&self) -> bool {
        self.cells.len() == self.row_sums.len() && self.cells.len() == self.col_sums.len()
    }
}

/// Shannon entropy of a list of group sizes.
pub fn entropy_from_sizes(sizes: &[usize]) -> f64 {
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.ln()
        })
        .sum()
}

pub fn entropy(p: &Partition) -> f64 {
    entropy_from_sizes(&p.sizes_by_label())
}

pub fn mutual_information(u: &Partition, v: &Partition) -> Result<f64, MetricsError> {
    Ok(ContingencyTable::from_partitions(u, v)?.mutual_information())
}

/// `ln k!` for `k = 0..=n`.
fn log_factorials(n: usize) -> Vec<f64> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    table.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        table.push(acc);
    }
    table
}

/// Expected mutual information of two partitions with the given margins
/// when labels are assigned uniformly at random (hypergeometric cells).
pub fn expected_mi(row_sums: &[usize], col_sums: &[usize]) -> f64 {
    let total: usize = row_sums.iter().sum();
    debug_assert_eq!(total, col_sums.iter().sum::<usize>());
    if total == 0 {
        return 0.0;
    }
    let lf = log_factorials(total);
    let n = total as f64;
    let big = total;
    row_sums
        .par_iter()
        .map(|&a| {
            if a == 0 {
                return 0.0;
            }
            let mut acc = 0.0;
            for &b in col_sums {
                if b == 0 {
                    continue;
                }
                // Terms shared by every n of this cell.
                let fixed = lf[a] + lf[b] + lf[big - a] + lf[big - b] - lf[big];
                let ab = a as f64 * b as f64;
                let lo = (a + b).saturating_sub(big).max(1);
                for k in lo..=a.min(b) {
                    let log_p =
                        fixed - lf[k] - lf[a - k] - lf[b - k] - lf[big + k - a - b];
                    let kf = k as f64;
                    acc += kf / n * (n * kf / ab).ln() * log_p.exp();
                }
            }
            acc
        })
        .sum()
}

/// Everything the `ami` report prints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmiReport {
    pub mi: f64,
    pub emi: f64,
    pub h_u: f64,
    pub h_v: f64,
    pub ami: f64,
}

pub fn ami_report(u: &Partition, v: &Partition) -> Result<AmiReport, MetricsError> {
    let table = ContingencyTable::from_partitions(u, v)?;
    let mi = table.mutual_information();
    let h_u = entropy_from_sizes(table.row_sums());
    let h_v = entropy_from_sizes(table.col_sums());
    let emi = expected_mi(table.row_sums(), table.col_sums());
    let ami = if h_u == 0.0 && h_v == 0.0 {
        1.0
    } else if table.is_bijective() {
        // Identical up to labels; avoids 0/0 when every expectation equals
        // the entropy (all-singleton partitions).
        1.0
    } else {
        let denominator = h_u.max(h_v) - emi;
        if denominator == 0.0 {
            0.0
        } else {
            (mi - emi) / denominator
        }
    };
    Ok(AmiReport {
        mi,
        emi,
        h_u,
        h_v,
        ami,
    })
}

/// Adjusted mutual information, normalized by the larger entropy.
pub fn ami(u: &Partition, v: &Partition) -> Result<f64, MetricsError> {
    Ok(ami_report(u, v)?.ami)
}

/// Outcome of assigning one community to its best-overlapping region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionAssignment {
    pub region: String,
    pub index: usize,
    pub jaccard: f64,
    /// No region overlaps the community; `region` is then the first one.
    pub degenerate: bool,
}

/// Region with the largest Jaccard index `|C ∩ X| / |C ∪ X|`; ties go to
/// the region listed first.
pub fn jaccard_assign<S: AsRef<str>>(
    community: &[usize],
    regions: &[(S, Vec<usize>)],
) -> Result<RegionAssignment, MetricsError> {
    let members: HashSet<usize> = community.iter().copied().collect();
    if members.is_empty() {
        return Err(MetricsError::EmptyCommunity);
    }
    if regions.is_empty() {
        return Err(MetricsError::NoRegions);
    }
    let mut best = (0usize, -1.0f64);
    for (index, (_, nodes)) in regions.iter().enumerate() {
        let region: HashSet<usize> = nodes.iter().copied().collect();
        let inter = region.intersection(&members).count();
        let union = members.len() + region.len() - inter;
        let j = inter as f64 / union as f64;
        if j > best.1 {
            best = (index, j);
        }
    }
    let (index, jaccard) = best;
    Ok(RegionAssignment {
        region: regions[index].0.as_ref().to_string(),
        index,
        jaccard,
        degenerate: jaccard == 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(labels: &[usize]) -> Partition {
        Partition::from_labels(labels)
    }

    #[test]
    fn mi_examples() {
        let u = p(&[0, 0, 1, 1]);
        assert!((mutual_information(&u, &u).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(mutual_information(&u, &p(&[0, 1, 0, 1])).unwrap(), 0.0);
        assert_eq!(mutual_information(&u, &p(&[0, 0, 0, 0])).unwrap(), 0.0);
        assert!(matches!(
            mutual_information(&u, &p(&[0, 1])),
            Err(MetricsError::LengthMismatch(4, 2))
        ));
    }

    #[test]
    fn emi_single_cluster_is_zero() {
        assert_eq!(expected_mi(&[6], &[2, 2, 2]), 0.0);
    }

    #[test]
    fn ami_examples() {
        let u = p(&[0, 0, 1, 1, 2, 2]);
        assert_eq!(ami(&u, &u).unwrap(), 1.0);
        assert_eq!(ami(&u, &p(&[2, 2, 0, 0, 1, 1])).unwrap(), 1.0);
        let a = ami(&p(&[0, 0, 1, 1]), &p(&[0, 1, 0, 1])).unwrap();
        assert!(a < 0.0);
        assert_eq!(ami(&p(&[0, 0, 0]), &p(&[0, 0, 0])).unwrap(), 1.0);
        assert_eq!(ami(&p(&[0, 1, 2]), &p(&[0, 1, 2])).unwrap(), 1.0);
    }

    #[test]
    fn jaccard_examples() {
        let regions = vec![("X", vec![1, 2, 3, 4, 5]), ("Y", vec![3, 4])];
        let a = jaccard_assign(&[1, 2, 3], &regions).unwrap();
        assert_eq!(a.region, "X");
        assert!((a.jaccard - 0.6).abs() < 1e-15);

        let exact = jaccard_assign(&[3, 4], &regions).unwrap();
        assert_eq!((exact.region.as_str(), exact.jaccard), ("Y", 1.0));

        let none = jaccard_assign(&[9], &regions).unwrap();
        assert_eq!(none.index, 0);
        assert!(none.degenerate);

        assert_eq!(
            jaccard_assign::<&str>(&[], &regions[..0]),
            Err(MetricsError::EmptyCommunity)
        );
    }
}
