//! Pairwise distance construction: graph-adapted cosine, correlation and
//! Euclidean, all stored as condensed upper-triangular arrays.

use rayon::prelude::*;

use crate::error::DistanceError;
use crate::signal::TimeSeriesMatrix;

/// Upper-triangular pairwise distances, pairs `(i, j)` with `i < j` in
/// row-major order. Length `n (n − 1) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedDistances {
    n: usize,
    values: Vec<f64>,
}

#[inline]
fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl CondensedDistances {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self, DistanceError> {
        if values.len() != n * n.saturating_sub(1) / 2 {
            return Err(DistanceError::BadCondensedLength { len: values.len() });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(DistanceError::InvalidDistance { index, value });
        }
        Ok(CondensedDistances { n, values })
    }

    /// Infers `n` from the array length.
    pub fn from_values(values: Vec<f64>) -> Result<Self, DistanceError> {
        let len = values.len();
        // n (n − 1) / 2 = len  ⇒  n = (1 + sqrt(1 + 8 len)) / 2
        let n = ((1.0 + (1.0 + 8.0 * len as f64).sqrt()) / 2.0).round() as usize;
        if n * n.saturating_sub(1) / 2 != len {
            return Err(DistanceError::BadCondensedLength { len });
        }
        Self::new(n.max(1), values)
    }

    /// Builds from a symmetric square matrix, reading the upper triangle.
    pub fn from_square(rows: &[Vec<f64>]) -> Result<Self, DistanceError> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(DistanceError::Ragged {
                    row: i,
                    expected: n,
                    found: row.len(),
                });
            }
            values.extend_from_slice(&row[i + 1..]);
        }
        Self::new(n, values)
    }

    /// Fills row blocks in parallel; `fill(i, row)` writes the distances
    /// `d(i, j)` for `j = i + 1..n` into `row`.
    pub fn par_from_rows<F>(n: usize, fill: F) -> Result<Self, DistanceError>
    where
        F: Fn(usize, &mut [f64]) -> Result<(), DistanceError> + Sync,
    {
        let mut values = vec![0.0; n * n.saturating_sub(1) / 2];
        let mut rows: Vec<(usize, &mut [f64])> = Vec::with_capacity(n);
        let mut rest = values.as_mut_slice();
        for i in 0..n.saturating_sub(1) {
            let (row, tail) = rest.split_at_mut(n - i - 1);
            rows.push((i, row));
            rest = tail;
        }
        rows.into_par_iter().try_for_each(|(i, row)| fill(i, row))?;
        Ok(CondensedDistances { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        condensed_index(self.n, a, b)
    }

    /// `d(i, j)`; zero on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.values[self.index(i, j)]
        }
    }
}

/// Undirected weighted graph with optional self-weights.
///
/// Neighbor lists are sorted by node id and never contain the node itself;
/// self-weights `v_i(i)` live in a separate array.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
    self_weight: Vec<f64>,
}

fn check_weight(i: usize, j: usize, weight: f64) -> Result<(), DistanceError> {
    if !weight.is_finite() || weight < 0.0 {
        return Err(DistanceError::InvalidWeight { i, j, weight });
    }
    Ok(())
}

impl WeightedGraph {
    /// Builds from an undirected edge list. A pair may appear in both
    /// directions provided the weights agree; zero weights are dropped.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, DistanceError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut self_weight = vec![0.0; n];
        for (i, j, w) in edges {
            for id in [i, j] {
                if id >= n {
                    return Err(DistanceError::IdOutOfRange { id, n });
                }
            }
            check_weight(i, j, w)?;
            if w == 0.0 {
                continue;
            }
            if i == j {
                self_weight[i] = w;
            } else {
                adjacency[i].push((j, w));
                adjacency[j].push((i, w));
            }
        }
        for (i, list) in adjacency.iter_mut().enumerate() {
            list.sort_by_key(|&(j, _)| j);
            let mut deduped: Vec<(usize, f64)> = Vec::with_capacity(list.len());
            for &(j, w) in list.iter() {
                match deduped.last() {
                    Some(&(prev, prev_w)) if prev == j => {
                        if prev_w != w {
                            return Err(DistanceError::Asymmetric {
                                i,
                                j,
                                forward: prev_w,
                                backward: w,
                            });
                        }
                    }
                    _ => deduped.push((j, w)),
                }
            }
            *list = deduped;
        }
        Ok(WeightedGraph {
            adjacency,
            self_weight,
        })
    }

    /// Builds from a dense symmetric weight matrix.
    pub fn from_dense(matrix: &[Vec<f64>]) -> Result<Self, DistanceError> {
        let n = matrix.len();
        let mut edges = Vec::new();
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(DistanceError::Ragged {
                    row: i,
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &w) in row.iter().enumerate().skip(i) {
                check_weight(i, j, w)?;
                let back = matrix[j][i];
                if back != w {
                    return Err(DistanceError::Asymmetric {
                        i,
                        j,
                        forward: w,
                        backward: back,
                    });
                }
                edges.push((i, j, w));
            }
        }
        Self::from_edges(n, edges)
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
            + self.self_weight.iter().filter(|&&w| w > 0.0).count()
    }

    /// Sorted `(neighbor, weight)` pairs, excluding `i` itself.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn self_weight(&self, i: usize) -> f64 {
        self.self_weight[i]
    }

    /// `v_i(k)`.
    pub fn weight(&self, i: usize, k: usize) -> f64 {
        if i == k {
            return self.self_weight[i];
        }
        let list = &self.adjacency[i];
        match list.binary_search_by_key(&k, |&(j, _)| j) {
            Ok(pos) => list[pos].1,
            Err(_) => 0.0,
        }
    }

    /// Squared Euclidean norm of the connectivity vector `v_i`.
    pub fn norm_squared(&self, i: usize) -> f64 {
        let s = self.self_weight[i];
        self.adjacency[i].iter().fold(s * s, |acc, &(_, w)| acc + w * w)
    }

    /// Applies `f` to every weight (e.g. `ln(1 + f)` on contact counts).
    pub fn map_weights(&self, f: impl Fn(f64) -> f64) -> Result<Self, DistanceError> {
        let mut edges = Vec::new();
        for (i, list) in self.adjacency.iter().enumerate() {
            edges.extend(list.iter().filter(|&&(j, _)| j > i).map(|&(j, w)| (i, j, f(w))));
            if self.self_weight[i] > 0.0 {
                edges.push((i, i, f(self.self_weight[i])));
            }
        }
        Self::from_edges(self.n(), edges)
    }

    fn check_id(&self, id: usize) -> Result<(), DistanceError> {
        if id >= self.n() {
            return Err(DistanceError::IdOutOfRange { id, n: self.n() });
        }
        Ok(())
    }
}

/// Standard Euclidean dot product of the connectivity vectors `v_i · v_j`.
pub fn euclidean_dot(g: &WeightedGraph, i: usize, j: usize) -> Result<f64, DistanceError> {
    g.check_id(i)?;
    g.check_id(j)?;
    let n = g.n();
    Ok((0..n).fold(0.0, |acc, k| acc + g.weight(i, k) * g.weight(j, k)))
}

/// Graph-adapted dot product: common-neighbor products over `k ∉ {i, j}`,
/// plus the reciprocal edge term `v_i(j) v_j(i)` and the self term
/// `v_i(i) v_j(j)`.
pub fn graph_dot(g: &WeightedGraph, i: usize, j: usize) -> Result<f64, DistanceError> {
    g.check_id(i)?;
    g.check_id(j)?;
    let (a, b) = (g.neighbors(i), g.neighbors(j));
    let (mut x, mut y) = (0, 0);
    let mut shared = 0.0;
    while x < a.len() && y < b.len() {
        let (ka, wa) = a[x];
        let (kb, wb) = b[y];
        match ka.cmp(&kb) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                if ka != i && ka != j {
                    shared += wa * wb;
                }
                x += 1;
                y += 1;
            }
        }
    }
    Ok(shared + g.weight(i, j) * g.weight(j, i) + g.self_weight(i) * g.self_weight(j))
}

#[inline]
fn cosine_to_distance(cos: f64) -> f64 {
    (2.0 * (1.0 - cos.clamp(-1.0, 1.0))).sqrt()
}

/// What [`graph_cosine_distances_with`] does with nodes that have no
/// incident weight, whose cosine is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroNorm {
    /// Fail with [`DistanceError::ZeroNormNode`].
    #[default]
    Error,
    /// Treat the node as orthogonal to everything: distance `√2`.
    Orthogonal,
}

/// `√(2(1 − cos θ_ij))` with the graph-adapted cosine.
pub fn graph_cosine_distances(g: &WeightedGraph) -> Result<CondensedDistances, DistanceError> {
    graph_cosine_distances_with(g, ZeroNorm::Error)
}

pub fn graph_cosine_distances_with(
    g: &WeightedGraph,
    zero_norm: ZeroNorm,
) -> Result<CondensedDistances, DistanceError> {
    let n = g.n();
    let norms: Vec<f64> = (0..n).map(|i| g.norm_squared(i)).collect();
    if zero_norm == ZeroNorm::Error {
        if let Some(i) = norms.iter().position(|&x| x == 0.0) {
            return Err(DistanceError::ZeroNormNode(i));
        }
    }
    CondensedDistances::par_from_rows(n, |i, row| {
        // row[j - i - 1] accumulates Σ_k v_i(k) v_k(j) over k ascending.
        row.fill(0.0);
        for &(k, w_ik) in g.neighbors(i) {
            let list = g.neighbors(k);
            let start = list.partition_point(|&(j, _)| j <= i);
            for &(j, w_kj) in &list[start..] {
                row[j - i - 1] += w_ik * w_kj;
            }
        }
        let s_i = g.self_weight(i);
        for &(j, w_ij) in g.neighbors(i).iter().filter(|&&(j, _)| j > i) {
            row[j - i - 1] += w_ij * w_ij;
        }
        for (offset, value) in row.iter_mut().enumerate() {
            let j = i + 1 + offset;
            let dot = *value + s_i * g.self_weight(j);
            let scale = norms[i] * norms[j];
            let cos = if scale > 0.0 { dot / scale.sqrt() } else { 0.0 };
            *value = cosine_to_distance(cos);
        }
        Ok(())
    })
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Eight independent lanes so the loop vectorizes; the reduction order is
    // fixed, hence bit-reproducible on one platform.
    let mut acc = [0.0f64; 8];
    let chunks = a.len() / 8;
    for c in 0..chunks {
        let (x, y) = (&a[c * 8..c * 8 + 8], &b[c * 8..c * 8 + 8]);
        for l in 0..8 {
            acc[l] += x[l] * y[l];
        }
    }
    let mut tail = 0.0;
    for t in chunks * 8..a.len() {
        tail += a[t] * b[t];
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
}

/// Row `i` z-scored with population moments and scaled by `1/√T`, so the
/// Pearson correlation of two rows is their dot product.
fn normalized_rows(series: &TimeSeriesMatrix) -> Result<Vec<f64>, DistanceError> {
    let t = series.cols();
    let mut out = Vec::with_capacity(series.rows() * t);
    for (r, row) in series.iter_rows().enumerate() {
        if let Some(col) = row.iter().position(|v| !v.is_finite()) {
            return Err(DistanceError::NonFinite { row: r, col });
        }
        let mean = row.iter().sum::<f64>() / t as f64;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / t as f64;
        if var <= 0.0 {
            return Err(DistanceError::ConstantRow(r));
        }
        let scale = 1.0 / (var.sqrt() * (t as f64).sqrt());
        out.extend(row.iter().map(|v| (v - mean) * scale));
    }
    Ok(out)
}

/// Pearson correlation of every pair of rows.
pub fn pearson(u: &[f64], v: &[f64]) -> Option<f64> {
    let series = TimeSeriesMatrix::from_rows(vec![u.to_vec(), v.to_vec()]).ok()?;
    let z = normalized_rows(&series).ok()?;
    let t = u.len();
    Some(dot(&z[..t], &z[t..]).clamp(-1.0, 1.0))
}

/// `√(2(1 − r))` between rows over time.
pub fn correlation_distances(
    series: &TimeSeriesMatrix,
) -> Result<CondensedDistances, DistanceError> {
    let t = series.cols();
    let n = series.rows();
    let z = normalized_rows(series)?;
    CondensedDistances::par_from_rows(n, |i, row| {
        let zi = &z[i * t..(i + 1) * t];
        for (offset, value) in row.iter_mut().enumerate() {
            let j = i + 1 + offset;
            *value = cosine_to_distance(dot(zi, &z[j * t..(j + 1) * t]));
        }
        Ok(())
    })
}

/// Euclidean distances between points (one slice of coordinates per point).
pub fn euclidean_distances<P: AsRef<[f64]> + Sync>(
    points: &[P],
) -> Result<CondensedDistances, DistanceError> {
    let n = points.len();
    let dim = points.first().map_or(0, |p| p.as_ref().len());
    for (row, p) in points.iter().enumerate() {
        let p = p.as_ref();
        if p.len() != dim {
            return Err(DistanceError::Ragged {
                row,
                expected: dim,
                found: p.len(),
            });
        }
        if let Some(col) = p.iter().position(|v| !v.is_finite()) {
            return Err(DistanceError::NonFinite { row, col });
        }
    }
    CondensedDistances::par_from_rows(n, |i, row| {
        let a = points[i].as_ref();
        for (offset, value) in row.iter_mut().enumerate() {
            let b = points[i + 1 + offset].as_ref();
            *value = a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
        }
        Ok(())
    })
}
