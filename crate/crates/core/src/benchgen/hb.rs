//! Asymmetric hierarchical benchmark: random nested splits with
//! Dirichlet-distributed sizes, a truncated power-law degree sequence and a
//! per-level edge budget.
//!
//! Each edge first draws a level `i` proportionally to the budget that level
//! still has to place. An endpoint `u` is then drawn proportionally to its
//! residual degree and a partner `v` proportionally to residual degree among
//! the nodes whose finest shared community with `u` is at level `i`. Budget
//! a level cannot absorb (its communities run out of stubs or free pairs)
//! is left to a final pass that pairs leftover stubs at any level; nodes
//! still below the minimum degree are then topped up.

use std::collections::HashSet;
use std::ops::Range;

use rand::Rng as _;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use super::PlantedNetwork;
use crate::error::BenchError;
use crate::partition::Partition;
use crate::seed::{derived_rng, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HbConfig {
    pub n: usize,
    /// Number of planted levels `L`.
    pub l: usize,
    /// Edge fractions `p_0..p_L`, finest first; `p_L` is the background.
    pub edge_fractions: Vec<f64>,
    pub degree_exponent: f64,
    pub min_degree: usize,
    pub max_degree: usize,
    pub split_mean: f64,
    pub min_splits: usize,
    pub dirichlet: f64,
    pub seed: u64,
}

impl HbConfig {
    pub fn new(n: usize, edge_fractions: Vec<f64>, seed: u64) -> Self {
        HbConfig {
            n,
            l: edge_fractions.len().saturating_sub(1),
            edge_fractions,
            degree_exponent: 2.0,
            min_degree: 5,
            max_degree: 70,
            split_mean: 4.0,
            min_splits: 2,
            dirichlet: 1.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: &str| Err(BenchError::InvalidConfig(msg.to_string()));
        if self.l < 1 {
            return bad("at least one level is required");
        }
        if self.edge_fractions.len() != self.l + 1 {
            return bad("need one edge fraction per level plus the background");
        }
        if self.edge_fractions.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return bad("edge fractions must be non-negative");
        }
        let sum: f64 = self.edge_fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(BenchError::ProbabilitiesDontSumToOne(sum));
        }
        if self.min_degree < 1 || self.min_degree > self.max_degree {
            return bad("degree bounds must satisfy 1 <= min <= max");
        }
        if self.max_degree >= self.n {
            return bad("max degree must be below the node count");
        }
        if !(self.degree_exponent.is_finite()
            && self.split_mean.is_finite()
            && self.split_mean > 0.0
            && self.dirichlet.is_finite()
            && self.dirichlet > 0.0)
        {
            return bad("exponent, split mean and concentration must be finite and positive");
        }
        if self.min_splits < 2 {
            return bad("min splits must be at least 2");
        }
        Ok(())
    }
}

/// Nested contiguous blocks. `blocks[i]` holds the level-`i` communities as
/// node ranges; level `L` is the whole network.
struct Hierarchy {
    blocks: Vec<Vec<Range<usize>>>,
    /// `community[i][v]`: index into `blocks[i]` of node `v`'s community.
    community: Vec<Vec<usize>>,
}

impl Hierarchy {
    fn build(cfg: &HbConfig, rng: &mut Rng) -> Hierarchy {
        let n = cfg.n;
        let mut levels: Vec<Vec<Range<usize>>> = vec![vec![0..n]];
        for _ in 0..cfg.l {
            let parents = levels.last().expect("root level exists");
            let mut children = Vec::new();
            for parent in parents {
                let mut start = parent.start;
                for len in split_sizes(cfg, parent.len(), rng) {
                    children.push(start..start + len);
                    start += len;
                }
            }
            levels.push(children);
        }
        levels.reverse();
        let community = levels
            .iter()
            .map(|blocks| {
                let mut of = vec![0usize; n];
                for (c, r) in blocks.iter().enumerate() {
                    of[r.clone()].fill(c);
                }
                of
            })
            .collect();
        Hierarchy {
            blocks: levels,
            community,
        }
    }

    fn block(&self, level: usize, v: usize) -> Range<usize> {
        self.blocks[level][self.community[level][v]].clone()
    }

    /// Nodes whose finest shared community with `u` is at `level`.
    fn eligible(&self, level: usize, u: usize) -> [Range<usize>; 2] {
        let outer = self.block(level, u);
        if level == 0 {
            return [outer, 0..0];
        }
        let inner = self.block(level - 1, u);
        [outer.start..inner.start, inner.end..outer.end]
    }

    fn shared_level(&self, u: usize, v: usize) -> usize {
        (0..self.blocks.len())
            .find(|&i| self.community[i][u] == self.community[i][v])
            .expect("top level contains every node")
    }

    /// Number of pairs whose finest shared level is `level`.
    fn eligible_pairs(&self, level: usize) -> usize {
        let pairs = |len: usize| len * len.saturating_sub(1) / 2;
        let outer: usize = self.blocks[level].iter().map(|r| pairs(r.len())).sum();
        let inner: usize = if level == 0 {
            0
        } else {
            self.blocks[level - 1].iter().map(|r| pairs(r.len())).sum()
        };
        outer - inner
    }
}

/// Child sizes of one split: `max(min_splits, Poisson(mean))` children,
/// capped at the parent size, with Dirichlet proportions rounded by largest
/// remainder and no empty child.
fn split_sizes(cfg: &HbConfig, size: usize, rng: &mut Rng) -> Vec<usize> {
    if size <= 1 {
        return vec![size];
    }
    let poisson = Poisson::new(cfg.split_mean).expect("positive mean");
    let drawn = poisson.sample(rng) as usize;
    let k = drawn.max(cfg.min_splits).min(size);
    for _ in 0..100 {
        let sizes = dirichlet_round(cfg.dirichlet, k, size, rng);
        if sizes.iter().all(|&s| s > 0) {
            return sizes;
        }
    }
    // Give every child one node and spread the rest.
    let mut sizes = dirichlet_round(cfg.dirichlet, k, size - k, rng);
    for s in &mut sizes {
        *s += 1;
    }
    sizes
}

fn dirichlet_round(alpha: f64, k: usize, total: usize, rng: &mut Rng) -> Vec<usize> {
    let gamma = Gamma::new(alpha, 1.0).expect("positive concentration");
    let mut weights: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
    let sum: f64 = weights.iter().sum();
    if sum > 0.0 {
        for w in &mut weights {
            *w /= sum;
        }
    } else {
        weights.fill(1.0 / k as f64);
    }
    largest_remainder(&weights, total)
}

/// Integer allocation of `total` proportional to `weights` (which sum to 1),
/// rounding by largest remainder with ties to the lower index.
fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let exact: Vec<f64> = weights.iter().map(|w| w * total as f64).collect();
    let mut out: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = out.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        out[i] += 1;
    }
    out
}

/// Degrees from the discrete power law `P(k) ∝ k^−γ` on `[min, max]` by
/// inverse CDF; an odd total is made even by raising one node below `max`.
fn degree_sequence(cfg: &HbConfig, rng: &mut Rng) -> Vec<usize> {
    let support: Vec<usize> = (cfg.min_degree..=cfg.max_degree).collect();
    let mut cdf = Vec::with_capacity(support.len());
    let mut acc = 0.0;
    for &k in &support {
        acc += (k as f64).powf(-cfg.degree_exponent);
        cdf.push(acc);
    }
    let mut degrees: Vec<usize> = (0..cfg.n)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            let i = cdf.partition_point(|&c| c <= u).min(support.len() - 1);
            support[i]
        })
        .collect();
    if degrees.iter().sum::<usize>() % 2 == 1 {
        let below: Vec<usize> = (0..cfg.n).filter(|&v| degrees[v] < cfg.max_degree).collect();
        if below.is_empty() {
            let v = rng.random_range(0..cfg.n);
            degrees[v] -= 1;
        } else {
            degrees[below[rng.random_range(0..below.len())]] += 1;
        }
    }
    degrees
}

/// Fenwick tree of non-negative integer weights.
struct Fenwick {
    tree: Vec<u64>,
    values: Vec<u64>,
}

impl Fenwick {
    fn new(values: &[u64]) -> Fenwick {
        let mut f = Fenwick {
            tree: vec![0; values.len() + 1],
            values: vec![0; values.len()],
        };
        for (i, &v) in values.iter().enumerate() {
            f.set(i, v);
        }
        f
    }

    fn set(&mut self, i: usize, value: u64) {
        let old = self.values[i];
        if old == value {
            return;
        }
        self.values[i] = value;
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] = self.tree[j].wrapping_add(value.wrapping_sub(old));
            j += j & j.wrapping_neg();
        }
    }

    fn get(&self, i: usize) -> u64 {
        self.values[i]
    }

    /// Sum of `values[..i]`.
    fn prefix(&self, i: usize) -> u64 {
        let mut j = i;
        let mut s = 0u64;
        while j > 0 {
            s = s.wrapping_add(self.tree[j]);
            j &= j - 1;
        }
        s
    }

    fn range(&self, r: &Range<usize>) -> u64 {
        self.prefix(r.end) - self.prefix(r.start)
    }

    fn total(&self) -> u64 {
        self.prefix(self.values.len())
    }

    /// Smallest `i` with `prefix(i + 1) > target`.
    fn find(&self, mut target: u64) -> usize {
        let mut pos = 0usize;
        let mut step = (self.tree.len()).next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}

struct Placer<'a> {
    hierarchy: &'a Hierarchy,
    /// Edges placed so far at each level.
    per_level: Vec<usize>,
    residual: Fenwick,
    adjacent: HashSet<(usize, usize)>,
    edges: Vec<(usize, usize)>,
    degree: Vec<usize>,
}

impl Placer<'_> {
    fn connect(&mut self, u: usize, v: usize) {
        let key = (u.min(v), u.max(v));
        self.per_level[self.hierarchy.shared_level(u, v)] += 1;
        self.adjacent.insert(key);
        self.edges.push(key);
        self.degree[u] += 1;
        self.degree[v] += 1;
        for w in [u, v] {
            let r = self.residual.get(w);
            self.residual.set(w, r.saturating_sub(1));
        }
    }

    fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacent.contains(&(u.min(v), u.max(v)))
    }

    /// Draws a partner of `u` from `ranges` proportionally to residual
    /// degree, excluding `u` itself.
    fn draw_partner(&self, u: usize, ranges: &[Range<usize>; 2], rng: &mut Rng) -> Option<usize> {
        let own = if ranges.iter().any(|r| r.contains(&u)) {
            self.residual.get(u)
        } else {
            0
        };
        let masses = [self.residual.range(&ranges[0]), self.residual.range(&ranges[1])];
        let total = masses[0] + masses[1] - own;
        if total == 0 {
            return None;
        }
        let mut target = rng.random_range(0..total);
        for (r, &mass) in ranges.iter().zip(&masses) {
            let mass_here = if r.contains(&u) { mass - own } else { mass };
            if target < mass_here {
                let base = self.residual.prefix(r.start);
                // Skip over u's own weight when it lies below the target.
                let mut t = base + target;
                if r.contains(&u) && self.residual.prefix(u) <= t {
                    t += own;
                }
                return Some(self.residual.find(t));
            }
            target -= mass_here;
        }
        None
    }

    /// Places the level budgets concurrently: each edge picks its level
    /// proportionally to the budget that level still has to place, so no
    /// level consumes the stubs another one needs. Returns the unplaced
    /// budget per level.
    fn place_levels(&mut self, budgets: &[usize], rng: &mut Rng) -> Vec<usize> {
        let n = self.degree.len();
        let levels = budgets.len();
        let initial: Vec<u64> = (0..n).map(|v| self.residual.get(v)).collect();
        let idle = vec![0u64; n];
        let mut choosers: Vec<Fenwick> = budgets
            .iter()
            .map(|&b| Fenwick::new(if b > 0 { &initial } else { &idle }))
            .collect();
        let mut blocked: Vec<Vec<bool>> = budgets.iter().map(|&b| vec![b == 0; n]).collect();
        let mut failures = vec![vec![0u8; n]; levels];
        let mut remaining = budgets.to_vec();
        loop {
            let weights: Vec<usize> = (0..levels)
                .map(|i| if choosers[i].total() > 0 { remaining[i] } else { 0 })
                .collect();
            let total: usize = weights.iter().sum();
            if total == 0 {
                break;
            }
            let mut pick = rng.random_range(0..total);
            let level = weights
                .iter()
                .position(|&w| {
                    if pick < w {
                        true
                    } else {
                        pick -= w;
                        false
                    }
                })
                .expect("pick is below the total weight");

            let chooser = &mut choosers[level];
            let u = chooser.find(rng.random_range(0..chooser.total()));
            let ranges = self.hierarchy.eligible(level, u);
            match self.draw_partner(u, &ranges, rng) {
                None => {
                    blocked[level][u] = true;
                    choosers[level].set(u, 0);
                }
                Some(v) if self.is_adjacent(u, v) => {
                    failures[level][u] += 1;
                    if failures[level][u] >= 32 {
                        blocked[level][u] = true;
                        choosers[level].set(u, 0);
                    }
                }
                Some(v) => {
                    self.connect(u, v);
                    remaining[level] -= 1;
                    for w in [u, v] {
                        let r = self.residual.get(w);
                        for (i, chooser) in choosers.iter_mut().enumerate() {
                            if !blocked[i][w] {
                                chooser.set(w, r);
                            }
                        }
                    }
                }
            }
        }
        remaining
    }

    /// Pairs leftover stubs. Each pair is placed at a level drawn
    /// proportionally to how far that level still is below its budget
    /// (among levels where the endpoint has any partner), or at any level
    /// once every budget is met.
    fn pair_leftovers(&mut self, budgets: &[usize], rng: &mut Rng) {
        let n = self.degree.len();
        let mut attempts = 0usize;
        let limit = 64 * n;
        while self.residual.total() >= 2 && attempts < limit {
            attempts += 1;
            let u = self.residual.find(rng.random_range(0..self.residual.total()));
            let own = self.residual.get(u);
            let mut weights = vec![0u64; budgets.len()];
            for (level, w) in weights.iter_mut().enumerate() {
                let ranges = self.hierarchy.eligible(level, u);
                let mass: u64 = ranges.iter().map(|r| self.residual.range(r)).sum::<u64>()
                    - if level == 0 { own } else { 0 };
                if mass > 0 {
                    *w = budgets[level].saturating_sub(self.per_level[level]) as u64;
                }
            }
            let ranges = if weights.iter().any(|&w| w > 0) {
                let mut pick = rng.random_range(0..weights.iter().sum::<u64>());
                let level = weights
                    .iter()
                    .position(|&w| {
                        if pick < w {
                            true
                        } else {
                            pick -= w;
                            false
                        }
                    })
                    .expect("pick is below the total weight");
                self.hierarchy.eligible(level, u)
            } else {
                [0..n, 0..0]
            };
            let Some(v) = self.draw_partner(u, &ranges, rng) else {
                break;
            };
            if !self.is_adjacent(u, v) {
                self.connect(u, v);
            }
        }
    }

    /// Degree-preserving double-edge swaps `(a, b), (c, d) → (a, c), (b, d)`
    /// that move the per-level edge counts closer to the budgets. A swap is
    /// kept only if it strictly lowers the total absolute deviation.
    fn rebalance(&mut self, budgets: &[usize], rng: &mut Rng) {
        let m = self.edges.len();
        if m < 2 {
            return;
        }
        let deviation = |counts: &[usize]| -> usize {
            counts.iter().zip(budgets).map(|(&c, &b)| c.abs_diff(b)).sum()
        };
        let limit = 200 * m;
        for _ in 0..limit {
            if self.per_level.iter().zip(budgets).all(|(&c, &b)| c >= b) {
                break;
            }
            let i = rng.random_range(0..m);
            let (a, b) = self.edges[i];
            let li = self.hierarchy.shared_level(a, b);
            if self.per_level[li] <= budgets[li] {
                continue;
            }
            let j = rng.random_range(0..m);
            let (mut c, mut d) = self.edges[j];
            if rng.random::<bool>() {
                std::mem::swap(&mut c, &mut d);
            }
            if i == j || a == c || b == d || self.is_adjacent(a, c) || self.is_adjacent(b, d) {
                continue;
            }
            let lj = self.hierarchy.shared_level(c, d);
            let (l1, l2) = (self.hierarchy.shared_level(a, c), self.hierarchy.shared_level(b, d));
            let before = deviation(&self.per_level);
            let mut counts = self.per_level.clone();
            counts[li] -= 1;
            counts[lj] -= 1;
            counts[l1] += 1;
            counts[l2] += 1;
            if deviation(&counts) >= before {
                continue;
            }
            self.adjacent.remove(&(a.min(b), a.max(b)));
            self.adjacent.remove(&(c.min(d), c.max(d)));
            let e1 = (a.min(c), a.max(c));
            let e2 = (b.min(d), b.max(d));
            self.adjacent.insert(e1);
            self.adjacent.insert(e2);
            self.edges[i] = e1;
            self.edges[j] = e2;
            self.per_level = counts;
        }
    }

    /// Raises every node below `min_degree` with random partners, never
    /// pushing a partner past `max_degree`.
    fn top_up(&mut self, min_degree: usize, max_degree: usize, rng: &mut Rng) {
        let n = self.degree.len();
        for u in 0..n {
            let mut guard = 0;
            while self.degree[u] < min_degree && guard < 16 * n {
                guard += 1;
                let v = rng.random_range(0..n);
                if v != u && !self.is_adjacent(u, v) && self.degree[v] < max_degree {
                    self.connect(u, v);
                }
            }
        }
    }
}

/// Samples one HB network.
pub fn hb_sample(cfg: &HbConfig) -> Result<PlantedNetwork, BenchError> {
    cfg.validate()?;
    let mut rng = derived_rng(cfg.seed, "hb-hierarchy", 0);
    let hierarchy = Hierarchy::build(cfg, &mut rng);
    let mut rng = derived_rng(cfg.seed, "hb-degrees", 0);
    let degrees = degree_sequence(cfg, &mut rng);
    let m: usize = degrees.iter().sum::<usize>() / 2;
    let budgets = largest_remainder(&cfg.edge_fractions, m);
    for (level, &needed) in budgets.iter().enumerate() {
        let available = hierarchy.eligible_pairs(level);
        if needed > available {
            return Err(BenchError::InfeasibleBudget {
                level,
                needed,
                available,
            });
        }
    }

    let mut rng = derived_rng(cfg.seed, "hb-edges", 0);
    let residual: Vec<u64> = degrees.iter().map(|&d| d as u64).collect();
    let mut placer = Placer {
        hierarchy: &hierarchy,
        per_level: vec![0; cfg.l + 1],
        residual: Fenwick::new(&residual),
        adjacent: HashSet::with_capacity(2 * m),
        edges: Vec::with_capacity(m),
        degree: vec![0; cfg.n],
    };
    let mut carry = 0;
    for level in 0..=cfg.l {
        let mut single = vec![0; cfg.l + 1];
        single[level] = budgets[level] + carry;
        carry = placer.place_levels(&single, &mut rng)[level];
    }
    placer.pair_leftovers(&budgets, &mut rng);
    placer.top_up(cfg.min_degree, cfg.max_degree, &mut rng);
    placer.rebalance(&budgets, &mut rng);
    debug_assert!(placer
        .edges
        .iter()
        .all(|&(u, v)| hierarchy.shared_level(u, v) <= cfg.l));

    let mut edges = placer.edges;
    edges.sort_unstable();
    let ground_truth = hierarchy.community[..cfg.l]
        .iter()
        .map(|labels| Partition::from_labels(labels))
        .collect();
    Ok(PlantedNetwork {
        n_nodes: cfg.n,
        edges,
        ground_truth,
    })
}
