//! Time-series preparation: quality filtering of traces, circular-shift null
//! models and the null-community threshold (NCT).

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::SignalError;
use crate::partition::Partition;
use crate::seed::derived_rng;

/// Rectangular matrix of traces (rows) over time points (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    /// Optional per-row `(x, y, z)` position.
    pub coordinates: Option<Vec<[f64; 3]>>,
    /// Optional per-row region label.
    pub regions: Option<Vec<String>>,
}

impl TimeSeriesMatrix {
    pub fn from_flat(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, SignalError> {
        if data.len() != rows * cols {
            return Err(SignalError::Ragged {
                row: data.len() / cols.max(1),
                expected: cols,
                found: data.len() % cols.max(1),
            });
        }
        Ok(TimeSeriesMatrix {
            rows,
            cols,
            data,
            coordinates: None,
            regions: None,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, SignalError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(SignalError::Ragged {
                    row: r,
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_flat(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of time points `T`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        // chunks_exact panics on 0; an empty row set has nothing to yield.
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Sub-matrix of the given rows, carrying coordinates and regions along.
    pub fn select_rows(&self, rows: &[usize]) -> TimeSeriesMatrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        TimeSeriesMatrix {
            rows: rows.len(),
            cols: self.cols,
            data,
            coordinates: self
                .coordinates
                .as_ref()
                .map(|c| rows.iter().map(|&r| c[r]).collect()),
            regions: self
                .regions
                .as_ref()
                .map(|g| rows.iter().map(|&r| g[r].clone()).collect()),
        }
    }
}

/// Population mean and standard deviation.
fn moments(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// `γ₁ = (1/T) Σ ((x − μ)/σ)³` with population moments.
pub fn skewness(trace: &[f64]) -> Result<f64, SignalError> {
    if trace.len() < 3 {
        return Err(SignalError::TooShort {
            needed: 3,
            found: trace.len(),
        });
    }
    let (mean, sd) = moments(trace);
    if sd == 0.0 || !sd.is_finite() {
        return Err(SignalError::ZeroVariance);
    }
    let t = trace.len() as f64;
    Ok(trace.iter().map(|x| ((x - mean) / sd).powi(3)).sum::<f64>() / t)
}

/// Maximum of the z-scored trace.
pub fn max_z(trace: &[f64]) -> Result<f64, SignalError> {
    let (mean, sd) = moments(trace);
    if sd == 0.0 || !sd.is_finite() {
        return Err(SignalError::ZeroVariance);
    }
    let max = trace.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((max - mean) / sd)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiDiagnostics {
    pub row: usize,
    /// `None` for zero-variance rows, which are dropped up front.
    pub skewness: Option<f64>,
    pub max_z: Option<f64>,
    pub passes_skewness: bool,
    pub passes_max_z: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoiFilter {
    pub kept: Vec<usize>,
    pub diagnostics: Vec<RoiDiagnostics>,
    pub skewness_mean: f64,
    pub skewness_std: f64,
    pub max_z_mean: f64,
    pub max_z_std: f64,
}

/// Keeps rows whose skewness lies within one standard deviation of the mean
/// skewness and whose maximum z-score does not exceed the mean plus one
/// standard deviation of the maximum z-scores. Both bounds are inclusive.
pub fn filter_rois(m: &TimeSeriesMatrix) -> Result<RoiFilter, SignalError> {
    if m.rows() < 2 {
        return Err(SignalError::TooFewRows(m.rows()));
    }
    if m.cols() < 3 {
        return Err(SignalError::TooShort {
            needed: 3,
            found: m.cols(),
        });
    }
    let stats: Vec<Option<(f64, f64)>> = m
        .iter_rows()
        .map(|row| Some((skewness(row).ok()?, max_z(row).ok()?)))
        .collect();
    let valid: Vec<(f64, f64)> = stats.iter().flatten().copied().collect();
    if valid.is_empty() {
        return Err(SignalError::AllRowsDegenerate);
    }
    let (skewness_mean, skewness_std) = moments(&valid.iter().map(|s| s.0).collect::<Vec<_>>());
    let (max_z_mean, max_z_std) = moments(&valid.iter().map(|s| s.1).collect::<Vec<_>>());

    let mut kept = Vec::new();
    let diagnostics = stats
        .iter()
        .enumerate()
        .map(|(row, s)| {
            let (passes_skewness, passes_max_z) = match s {
                Some((g, z)) => (
                    (g - skewness_mean).abs() <= skewness_std,
                    *z <= max_z_mean + max_z_std,
                ),
                None => (false, false),
            };
            if passes_skewness && passes_max_z {
                kept.push(row);
            }
            RoiDiagnostics {
                row,
                skewness: s.map(|s| s.0),
                max_z: s.map(|s| s.1),
                passes_skewness,
                passes_max_z,
            }
        })
        .collect();
    Ok(RoiFilter {
        kept,
        diagnostics,
        skewness_mean,
        skewness_std,
        max_z_mean,
        max_z_std,
    })
}

/// Rotation offset of `row` under `seed`, uniform on `1..T`.
pub fn circular_shift_offset(seed: u64, row: usize, t: usize) -> usize {
    if t < 2 {
        return 0;
    }
    derived_rng(seed, "circular-shift", row as u64).random_range(1..t)
}

/// Rotates every row right by its own offset, wrapping values around.
///
/// Offsets are drawn from `1..T` so every row actually moves. With fewer than
/// two time points there is nothing to rotate and the input is returned as is.
pub fn circular_shift_null(m: &TimeSeriesMatrix, seed: u64) -> TimeSeriesMatrix {
    let t = m.cols();
    let mut out = m.clone();
    if t < 2 {
        return out;
    }
    for (r, row) in out.data.chunks_exact_mut(t).enumerate() {
        row.rotate_right(circular_shift_offset(seed, r, t));
    }
    out
}

/// Community sizes pooled over null-model instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeEnsemble {
    pub sizes: Vec<usize>,
    pub instances: usize,
}

/// Lower/upper bin range of the size histogram, as powers of ten.
pub const NCT_LOG10_RANGE: (f64, f64) = (0.0, 4.5);
pub const NCT_BINS: usize = 20;
pub const NCT_GRID: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NctEstimate {
    /// `None` when the density has no interior local minimum.
    pub threshold: Option<f64>,
    /// `NCT_BINS + 1` logarithmically spaced edges.
    pub bin_edges: Vec<f64>,
    /// Mean count per instance in each bin.
    pub histogram: Vec<f64>,
    /// Evaluation grid in log10(size).
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

/// Logarithmic histogram edges from 10⁰ to 10^4.5.
pub fn nct_bin_edges() -> Vec<f64> {
    let (lo, hi) = NCT_LOG10_RANGE;
    (0..=NCT_BINS)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / NCT_BINS as f64))
        .collect()
}

/// Rightmost interior local minimum of `values`. Flat runs count as one
/// point located at the run's middle.
fn rightmost_local_minimum(values: &[f64]) -> Option<usize> {
    let n = values.len();
    let mut end = n;
    let mut best = None;
    while end > 0 {
        let mut start = end - 1;
        while start > 0 && values[start - 1] == values[end - 1] {
            start -= 1;
        }
        // Run is values[start..end].
        if start > 0 && end < n && values[start - 1] > values[start] && values[end] > values[end - 1]
        {
            best = Some((start + end - 1) / 2);
            break;
        }
        end = start;
    }
    best
}

/// Null-community threshold from a pooled null ensemble.
///
/// A Gaussian KDE of `log10(size)` is evaluated on a 512-point grid over the
/// histogram range. The bandwidth follows Scott's rule with the population
/// standard deviation and the *per-instance* sample count, so duplicating an
/// ensemble (sizes and instance count together) leaves the estimate
/// unchanged.
pub fn nct_estimate(ensemble: &SizeEnsemble) -> Result<NctEstimate, SignalError> {
    if ensemble.sizes.is_empty() || ensemble.instances == 0 {
        return Err(SignalError::EmptyEnsemble);
    }
    let bin_edges = nct_bin_edges();
    let instances = ensemble.instances as f64;

    let mut histogram = vec![0.0; NCT_BINS];
    let (lo, hi) = NCT_LOG10_RANGE;
    let mut unique: Vec<(usize, usize)> = Vec::new();
    let mut sorted = ensemble.sizes.clone();
    sorted.sort_unstable();
    for &s in &sorted {
        match unique.last_mut() {
            Some((size, count)) if *size == s => *count += 1,
            _ => unique.push((s, 1)),
        }
    }
    for &(s, count) in &unique {
        let x = (s.max(1) as f64).log10();
        if x <= hi {
            let bin = (((x - lo) / (hi - lo) * NCT_BINS as f64) as usize).min(NCT_BINS - 1);
            histogram[bin] += count as f64 / instances;
        }
    }

    let total = ensemble.sizes.len() as f64;
    let logs: Vec<(f64, f64)> = unique
        .iter()
        .map(|&(s, c)| ((s.max(1) as f64).log10(), c as f64))
        .collect();
    let mean = logs.iter().map(|(x, c)| x * c).sum::<f64>() / total;
    let var = logs.iter().map(|(x, c)| c * (x - mean) * (x - mean)).sum::<f64>() / total;
    let per_instance = total / instances;
    let bandwidth = var.sqrt() * per_instance.powf(-0.2);

    let grid: Vec<f64> = (0..NCT_GRID)
        .map(|i| lo + (hi - lo) * i as f64 / (NCT_GRID - 1) as f64)
        .collect();
    let density: Vec<f64> = if bandwidth > 0.0 {
        let norm = 1.0 / (total * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
        grid.iter()
            .map(|g| {
                norm * logs
                    .iter()
                    .map(|(x, c)| c * (-0.5 * ((g - x) / bandwidth).powi(2)).exp())
                    .sum::<f64>()
            })
            .collect()
    } else {
        vec![0.0; NCT_GRID]
    };
    let threshold = if bandwidth > 0.0 {
        rightmost_local_minimum(&density).map(|i| 10f64.powf(grid[i]))
    } else {
        None
    };
    Ok(NctEstimate {
        threshold,
        bin_edges,
        histogram,
        grid,
        density,
        bandwidth,
    })
}

/// Community labels whose size strictly exceeds `nct`; everything survives
/// when there is no threshold.
pub fn filter_communities_by_nct(partition: &Partition, nct: Option<f64>) -> Vec<usize> {
    partition
        .sizes_by_label()
        .into_iter()
        .enumerate()
        .filter(|&(_, size)| nct.is_none_or(|t| size as f64 > t))
        .map(|(label, _)| label)
        .collect()
}
