//! Hierarchical nested random graphs: equal-size communities nested `L`
//! deep, with a per-level connection probability set by the mean degree
//! and the cohesiveness `ρ`.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::PlantedNetwork;
use crate::error::BenchError;
use crate::partition::Partition;
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HnrgConfig {
    /// Size of the finest communities.
    pub s0: usize,
    /// Subcommunities per community.
    pub r: usize,
    /// Number of levels.
    pub l: usize,
    pub mean_degree: f64,
    pub rho: f64,
    pub seed: u64,
}

impl Default for HnrgConfig {
    fn default() -> Self {
        HnrgConfig {
            s0: 10,
            r: 4,
            l: 4,
            mean_degree: 16.0,
            rho: 1.0,
            seed: 0,
        }
    }
}

impl HnrgConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: &str| Err(BenchError::InvalidConfig(msg.to_string()));
        if self.s0 < 2 {
            return bad("s0 must be at least 2");
        }
        if self.r < 2 {
            return bad("r must be at least 2");
        }
        if self.l < 1 {
            return bad("l must be at least 1");
        }
        if !(self.mean_degree.is_finite() && self.mean_degree > 0.0) {
            return bad("mean degree must be positive");
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return bad("rho must be positive");
        }
        let n = (1..self.l).try_fold(self.s0 as u128, |s, _| s.checked_mul(self.r as u128));
        match n.and_then(|s| s.checked_mul(self.r as u128)) {
            Some(n) if n <= u32::MAX as u128 => Ok(()),
            _ => bad("network too large"),
        }
    }
}

/// Sizes and probabilities of every level. Index `L` is the background:
/// `sizes[L]` counts the nodes outside a node's coarsest community.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HnrgLevels {
    pub n_nodes: usize,
    pub sizes: Vec<usize>,
    pub probabilities: Vec<f64>,
    /// Expected degree contribution `k_ℓ` of each level.
    pub degrees: Vec<f64>,
}

fn level_sizes(cfg: &HnrgConfig) -> (Vec<usize>, usize) {
    let mut sizes = Vec::with_capacity(cfg.l + 1);
    sizes.push(cfg.s0);
    for _ in 1..cfg.l {
        sizes.push(cfg.r * sizes[sizes.len() - 1]);
    }
    let n = cfg.r * sizes[cfg.l - 1];
    sizes.push(n - sizes[cfg.l - 1]);
    (sizes, n)
}

/// Coefficient `c_ℓ` with `p_ℓ = c_ℓ ⟨k⟩`.
fn probability_coefficients(cfg: &HnrgConfig, sizes: &[usize]) -> Vec<f64> {
    let l = cfg.l;
    let rho = cfg.rho;
    (0..=l)
        .map(|level| {
            if level < l {
                rho.powi(level as i32) / (1.0 + rho).powi(level as i32 + 1)
                    / (sizes[level] - 1) as f64
            } else {
                (rho / (1.0 + rho)).powi(l as i32) / sizes[l] as f64
            }
        })
        .collect()
}

pub fn hnrg_probabilities(cfg: &HnrgConfig) -> Result<HnrgLevels, BenchError> {
    cfg.validate()?;
    let (sizes, n) = level_sizes(cfg);
    let coefficients = probability_coefficients(cfg, &sizes);
    let max_mean_degree = coefficients
        .iter()
        .map(|c| 1.0 / c)
        .fold(f64::INFINITY, f64::min);
    let probabilities: Vec<f64> = coefficients.iter().map(|c| c * cfg.mean_degree).collect();
    if let Some((level, &probability)) = probabilities.iter().enumerate().find(|(_, &p)| p > 1.0) {
        return Err(BenchError::ProbabilityExceedsOne {
            level,
            probability,
            max_mean_degree,
        });
    }
    let degrees = probabilities
        .iter()
        .enumerate()
        .map(|(level, p)| {
            if level < cfg.l {
                p * (sizes[level] - 1) as f64
            } else {
                p * sizes[level] as f64
            }
        })
        .collect();
    Ok(HnrgLevels {
        n_nodes: n,
        sizes,
        probabilities,
        degrees,
    })
}

/// Mean degree realized when every pair is connected with the probability
/// of its finest shared level.
///
/// A pair first shares a level `ℓ ≥ 1` community with `S_ℓ − S_{ℓ−1}` other
/// nodes, not `S_ℓ − 1`, so this falls short of the configured mean degree
/// whenever `L ≥ 2`.
pub fn hnrg_expected_degree(levels: &HnrgLevels) -> f64 {
    let l = levels.sizes.len() - 1;
    (0..=l)
        .map(|level| {
            let partners = match level {
                0 => levels.sizes[0] - 1,
                _ if level < l => levels.sizes[level] - levels.sizes[level - 1],
                _ => levels.sizes[l],
            };
            levels.probabilities[level] * partners as f64
        })
        .sum()
}

/// Mean degree at which a node expects one link inside its level-`ℓ`
/// community: the root of `p_ℓ (S_ℓ − S_{ℓ−1}) + p_{ℓ−1} S_{ℓ−1} = 1`,
/// which is linear in the mean degree.
pub fn hnrg_critical_degree(cfg: &HnrgConfig, level: usize) -> Result<f64, BenchError> {
    let mut unit = *cfg;
    unit.mean_degree = 1.0;
    unit.validate()?;
    if level < 1 || level >= cfg.l {
        return Err(BenchError::LevelOutOfRange {
            level,
            depth: cfg.l,
        });
    }
    let (sizes, _) = level_sizes(&unit);
    let c = probability_coefficients(&unit, &sizes);
    let slope =
        c[level] * (sizes[level] - sizes[level - 1]) as f64 + c[level - 1] * sizes[level - 1] as f64;
    Ok(1.0 / slope)
}

/// Appends Bernoulli(`p`) edges from `u` to every `v` in `range`, jumping
/// between successes with geometric gaps.
fn sample_range(
    rng: &mut crate::seed::Rng,
    u: usize,
    range: std::ops::Range<usize>,
    p: f64,
    edges: &mut Vec<(usize, usize)>,
) {
    if p <= 0.0 || range.is_empty() {
        return;
    }
    if p >= 1.0 {
        edges.extend(range.map(|v| (u, v)));
        return;
    }
    let log_q = (-p).ln_1p();
    let mut v = range.start;
    loop {
        // Failures before the next success: ⌊ln U / ln(1 − p)⌋.
        let uniform: f64 = 1.0 - rng.random::<f64>();
        let skip = (uniform.ln() / log_q).floor();
        if skip >= (range.end - v) as f64 {
            return;
        }
        v += skip as usize;
        edges.push((u, v));
        v += 1;
        if v >= range.end {
            return;
        }
    }
}

/// Samples one network: node `i` belongs to community `⌊i / S_ℓ⌋` at level
/// `ℓ`, and each pair is linked independently with the probability of the
/// finest level it shares.
pub fn hnrg_sample(cfg: &HnrgConfig) -> Result<PlantedNetwork, BenchError> {
    let levels = hnrg_probabilities(cfg)?;
    let n = levels.n_nodes;
    let l = cfg.l;
    let mut rng = rng_from_seed(cfg.seed);
    let mut edges = Vec::new();
    for u in 0..n {
        let mut start = u + 1;
        for level in 0..=l {
            let end = if level < l {
                (u / levels.sizes[level] + 1) * levels.sizes[level]
            } else {
                n
            };
            sample_range(&mut rng, u, start..end, levels.probabilities[level], &mut edges);
            start = end;
        }
    }
    let ground_truth = levels.sizes[..l]
        .iter()
        .map(|&s| {
            Partition::from_canonical((0..n).map(|i| i / s).collect())
                .expect("block labels are canonical")
        })
        .collect();
    Ok(PlantedNetwork {
        n_nodes: n,
        edges,
        ground_truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_fixture() {
        let levels = hnrg_probabilities(&HnrgConfig::default()).unwrap();
        assert_eq!(levels.sizes, vec![10, 40, 160, 640, 1920]);
        assert_eq!(levels.n_nodes, 2560);
        assert!((levels.probabilities[0] - 8.0 / 9.0).abs() < 1e-15);
        for (got, want) in levels.degrees.iter().zip([8.0, 4.0, 2.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn infeasible_degree() {
        let cfg = HnrgConfig {
            mean_degree: 64.0,
            ..HnrgConfig::default()
        };
        match hnrg_probabilities(&cfg) {
            Err(BenchError::ProbabilityExceedsOne {
                level,
                max_mean_degree,
                ..
            }) => {
                assert_eq!(level, 0);
                assert!((max_mean_degree - 18.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn critical_degrees() {
        let cfg = HnrgConfig::default();
        let k1 = hnrg_critical_degree(&cfg, 1).unwrap();
        let k2 = hnrg_critical_degree(&cfg, 2).unwrap();
        let k3 = hnrg_critical_degree(&cfg, 3).unwrap();
        assert!((k1 - 1.3371).abs() < 1e-3);
        assert!((k3 - 5.789).abs() < 1e-3);
        assert!(k1 < k2 && k2 < k3);
        assert!(hnrg_critical_degree(&cfg, 0).is_err());
        assert!(hnrg_critical_degree(&cfg, 4).is_err());
    }

    #[test]
    fn ground_truth_shape() {
        let net = hnrg_sample(&HnrgConfig::default()).unwrap();
        assert_eq!(net.ground_truth.len(), 4);
        assert_eq!(net.ground_truth[1].n_communities(), 64);
        assert!(net.ground_truth[1].sizes_by_label().iter().all(|&s| s == 40));
        assert!(net.edges.iter().all(|&(u, v)| u < v));
        assert_eq!(net, hnrg_sample(&HnrgConfig::default()).unwrap());
    }
}
