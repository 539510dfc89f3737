//! Monte Carlo trajectories of the chain.
//!
//! Replica `i` draws from its own ChaCha8 stream `(seed, i)` and results are
//! reduced in replica order, so a summary depends only on the seed and the
//! replica count, never on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::chain::{validate, ChainSpec, StationaryMeasure, DEFAULT_TOLERANCE};
use crate::exec::{map_indices, Execution};
use crate::hitting::HittingTimes;
use crate::oracle::solve_hitting;
use crate::stats::{ks_critical_two_sample, ks_exp1, ks_two_sample};
use crate::tree::{NodeId, Tree};

/// Thresholds `c` of the cut-off profile `P(T > c·E[T])`.
pub const PROFILE_POINTS: [f64; 6] = [0.5, 0.8, 0.9, 1.1, 1.2, 2.0];

/// Normalized samples kept in a summary; beyond this they are reservoir
/// sampled.
pub const SAMPLE_CAP: usize = 100_000;

/// Step cap when no exact mean is available.
pub const FALLBACK_MAX_STEPS: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("replicas must be at least 1")]
    NoReplicas,
    #[error("max_steps must be at least 1")]
    NoSteps,
    #[error("node {node} is out of range for a tree of {node_count} nodes")]
    NodeOutOfRange { node: NodeId, node_count: usize },
    #[error("source and target are both {0}")]
    SameNode(NodeId),
    #[error("chain fails validation: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub seed: u64,
    pub replicas: usize,
    /// Per-replica cap; `None` picks 1000 × the exact mean.
    pub max_steps: Option<u64>,
}

impl SimConfig {
    pub fn new(seed: u64, replicas: usize) -> Self {
        SimConfig {
            seed,
            replicas,
            max_steps: None,
        }
    }

    fn check(&self) -> Result<(), SimError> {
        if self.replicas == 0 {
            return Err(SimError::NoReplicas);
        }
        if self.max_steps == Some(0) {
            return Err(SimError::NoSteps);
        }
        Ok(())
    }

    fn cap(&self, exact_mean: Option<f64>) -> u64 {
        self.max_steps.unwrap_or_else(|| match exact_mean {
            Some(m) if m.is_finite() && m * 1000.0 < u64::MAX as f64 => {
                (m * 1000.0).ceil().max(1.0) as u64
            }
            _ => FALLBACK_MAX_STEPS,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSummary {
    /// Replicas that reached the target.
    pub n: usize,
    pub truncated: usize,
    pub max_steps: u64,
    pub mean: f64,
    pub variance: f64,
    /// Standard error of `mean`, from the exact variance when known.
    pub std_error: f64,
    pub exact_mean: Option<f64>,
    pub exact_variance: Option<f64>,
    /// `T / E[T]` (exact mean when known, else empirical), at most
    /// [`SAMPLE_CAP`] of them.
    pub normalized_samples: Vec<f64>,
    /// `(c, P(T > c·E[T]))`; truncated replicas count as exceeding.
    pub cutoff_profile: Vec<(f64, f64)>,
    pub ks_exp1: f64,
    /// False when every replica was truncated.
    pub usable: bool,
}

impl EmpiricalSummary {
    /// `(mean − exact) / std_error`, when an exact mean is known.
    pub fn z_score(&self) -> Option<f64> {
        self.exact_mean.map(|e| {
            let diff = self.mean - e;
            // a deterministic time has zero spread: only an exact match scores 0
            if self.std_error == 0.0 && diff.abs() <= 1e-12 * e.abs() {
                0.0
            } else {
                diff / self.std_error
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinalExcursion {
    /// Time from the last visit to the root until `a` is hit, per replica.
    pub up: Vec<u64>,
    /// Time from the last visit to `a` until the root is hit, per replica.
    pub down: Vec<u64>,
    pub truncated_up: usize,
    pub truncated_down: usize,
    pub ks: f64,
    /// Two-sample critical value at the 1% level.
    pub critical: f64,
}

/// Per-node cumulative transition tables.
#[derive(Debug, Clone)]
pub struct Walker {
    offsets: Vec<usize>,
    cumulative: Vec<f64>,
    dest: Vec<NodeId>,
}

impl Walker {
    pub fn new(tree: &Tree, spec: &ChainSpec) -> Walker {
        let n = tree.node_count();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut cumulative = Vec::new();
        let mut dest = Vec::new();
        for x in 0..n {
            offsets.push(dest.len());
            let mut acc = 0.0;
            let mut push = |y: NodeId, p: f64| {
                if p > 0.0 {
                    acc += p;
                    cumulative.push(acc);
                    dest.push(y);
                }
            };
            if let Some(p) = tree.parent(x) {
                push(p, spec.mu[x]);
            }
            push(x, spec.kappa[x]);
            for &c in tree.children(x) {
                push(c, spec.lambda[c]);
            }
        }
        offsets.push(dest.len());
        Walker {
            offsets,
            cumulative,
            dest,
        }
    }

    #[inline]
    pub fn step<R: Rng>(&self, x: NodeId, rng: &mut R) -> NodeId {
        let (lo, hi) = (self.offsets[x], self.offsets[x + 1]);
        let u: f64 = rng.random::<f64>() * self.cumulative[hi - 1];
        for k in lo..hi - 1 {
            if u < self.cumulative[k] {
                return self.dest[k];
            }
        }
        self.dest[hi - 1]
    }

    /// Steps from `start` until `target`; `None` after `cap` steps.
    pub fn hit<R: Rng>(&self, start: NodeId, target: NodeId, cap: u64, rng: &mut R) -> Option<u64> {
        let mut x = start;
        let mut t = 0;
        while x != target {
            if t == cap {
                return None;
            }
            x = self.step(x, rng);
            t += 1;
        }
        Some(t)
    }

    /// Steps from `x` until the first return to `x` (at least one).
    pub fn return_time<R: Rng>(&self, x: NodeId, cap: u64, rng: &mut R) -> Option<u64> {
        let y = self.step(x, rng);
        self.hit(y, x, cap - 1, rng).map(|t| t + 1)
    }

    /// Time between the last visit to `start` and the hit of `target`.
    pub fn final_excursion<R: Rng>(
        &self,
        start: NodeId,
        target: NodeId,
        cap: u64,
        rng: &mut R,
    ) -> Option<u64> {
        let mut x = start;
        let mut t = 0;
        let mut last = 0;
        while x != target {
            if t == cap {
                return None;
            }
            x = self.step(x, rng);
            t += 1;
            if x == start {
                last = t;
            }
        }
        Some(t - last)
    }
}

fn replica_rng(seed: u64, replica: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica as u64);
    rng
}

fn prepare(
    tree: &Tree,
    spec: &ChainSpec,
    nodes: &[NodeId],
    config: &SimConfig,
) -> Result<(), SimError> {
    config.check()?;
    for &x in nodes {
        if x >= tree.node_count() {
            return Err(SimError::NodeOutOfRange {
                node: x,
                node_count: tree.node_count(),
            });
        }
    }
    let report = validate(tree, spec, DEFAULT_TOLERANCE);
    if let Some(v) = report.violations.first() {
        return Err(SimError::Invalid(v.to_string()));
    }
    Ok(())
}

/// Exact mean and variance of `T_{source→target}`: closed forms when one
/// node is an ancestor of the other, else the linear oracle.
pub fn exact_moments(
    tree: &Tree,
    spec: &ChainSpec,
    source: NodeId,
    target: NodeId,
) -> Option<(f64, f64)> {
    let (a, j, n) = if tree.precedes(target, source) {
        (source, 0, tree.depth(source) - tree.depth(target))
    } else if tree.precedes(source, target) {
        (target, tree.depth(target) - tree.depth(source), 0)
    } else {
        let sol = solve_hitting(tree, spec, target).ok()?;
        let m = sol.mean[source];
        return Some((m, (sol.second[source] - m * m).max(0.0)));
    };
    let measure = StationaryMeasure::compute(tree, spec);
    let h = HittingTimes::new(tree, spec, &measure);
    let r = h.hitting_moments(a, j, n).ok()?;
    Some((r.mean.value(), r.variance.value()))
}

fn summarize(
    times: &[Option<u64>],
    cap: u64,
    exact_mean: Option<f64>,
    exact_variance: Option<f64>,
    seed: u64,
) -> EmpiricalSummary {
    let done: Vec<u64> = times.iter().flatten().copied().collect();
    let n = done.len();
    let truncated = times.len() - n;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &t) in done.iter().enumerate() {
        let t = t as f64;
        let delta = t - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (t - mean);
    }
    let variance = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
    let (mean, variance) = if n == 0 {
        (f64::NAN, f64::NAN)
    } else {
        (mean, variance)
    };
    let std_error = (exact_variance.unwrap_or(variance) / n as f64).sqrt();

    let scale = exact_mean.unwrap_or(mean);
    let mut normalized: Vec<f64> = done.iter().map(|&t| t as f64 / scale).collect();
    let ks = ks_exp1(&mut normalized.clone());

    let total = times.len() as f64;
    let cutoff_profile = PROFILE_POINTS
        .iter()
        .map(|&c| {
            let over = normalized.iter().filter(|&&v| v > c).count();
            let cut = if cap as f64 > c * scale { truncated } else { 0 };
            (c, (over + cut) as f64 / total)
        })
        .collect();

    if normalized.len() > SAMPLE_CAP {
        let mut rng = replica_rng(seed, usize::MAX);
        let mut keep: Vec<f64> = normalized[..SAMPLE_CAP].to_vec();
        for (i, &v) in normalized.iter().enumerate().skip(SAMPLE_CAP) {
            let k = rng.random_range(0..=i);
            if k < SAMPLE_CAP {
                keep[k] = v;
            }
        }
        normalized = keep;
    }

    EmpiricalSummary {
        n,
        truncated,
        max_steps: cap,
        mean,
        variance,
        std_error,
        exact_mean,
        exact_variance,
        normalized_samples: normalized,
        cutoff_profile,
        ks_exp1: ks,
        usable: n > 0,
    }
}

/// Samples of `T_{source→target}`.
pub fn simulate_hitting(
    tree: &Tree,
    spec: &ChainSpec,
    source: NodeId,
    target: NodeId,
    config: &SimConfig,
    exec: Execution,
) -> Result<EmpiricalSummary, SimError> {
    prepare(tree, spec, &[source, target], config)?;
    if source == target {
        return Err(SimError::SameNode(source));
    }
    let exact = exact_moments(tree, spec, source, target);
    let cap = config.cap(exact.map(|e| e.0));
    let walker = Walker::new(tree, spec);
    let times = map_indices(exec, config.replicas, |i| {
        walker.hit(source, target, cap, &mut replica_rng(config.seed, i))
    });
    Ok(summarize(
        &times,
        cap,
        exact.map(|e| e.0),
        exact.map(|e| e.1),
        config.seed,
    ))
}

/// Samples of the return time to `x`, compared with `1/π(x)`.
pub fn simulate_return(
    tree: &Tree,
    spec: &ChainSpec,
    x: NodeId,
    config: &SimConfig,
    exec: Execution,
) -> Result<EmpiricalSummary, SimError> {
    prepare(tree, spec, &[x], config)?;
    let measure = StationaryMeasure::compute(tree, spec);
    let kac = (-measure.log_pi[x]).exp();
    let cap = config.cap(Some(kac)).max(1);
    let walker = Walker::new(tree, spec);
    let times = map_indices(exec, config.replicas, |i| {
        walker.return_time(x, cap, &mut replica_rng(config.seed, i))
    });
    Ok(summarize(&times, cap, Some(kac), None, config.seed))
}

/// Final excursions from the root to `a` and from `a` to the root.
///
/// Replicas `0..n` of the seed walk up, replicas `n..2n` walk down.
pub fn simulate_final_excursion(
    tree: &Tree,
    spec: &ChainSpec,
    a: NodeId,
    config: &SimConfig,
    exec: Execution,
) -> Result<FinalExcursion, SimError> {
    prepare(tree, spec, &[a], config)?;
    let root = crate::tree::ROOT;
    if a == root {
        return Err(SimError::SameNode(a));
    }
    let up_mean = exact_moments(tree, spec, root, a).map(|e| e.0);
    let down_mean = exact_moments(tree, spec, a, root).map(|e| e.0);
    let (cap_up, cap_down) = (config.cap(up_mean), config.cap(down_mean));
    let walker = Walker::new(tree, spec);
    let n = config.replicas;
    let runs = map_indices(exec, 2 * n, |i| {
        let mut rng = replica_rng(config.seed, i);
        if i < n {
            walker.final_excursion(root, a, cap_up, &mut rng)
        } else {
            walker.final_excursion(a, root, cap_down, &mut rng)
        }
    });
    let mut up: Vec<u64> = runs[..n].iter().flatten().copied().collect();
    let mut down: Vec<u64> = runs[n..].iter().flatten().copied().collect();
    let truncated_up = n - up.len();
    let truncated_down = n - down.len();
    let ks = ks_two_sample(&mut up.clone(), &mut down.clone());
    up.shrink_to_fit();
    down.shrink_to_fit();
    let critical = ks_critical_two_sample(0.01, up.len().max(1), down.len().max(1));
    Ok(FinalExcursion {
        up,
        down,
        truncated_up,
        truncated_down,
        ks,
        critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node() -> (Tree, ChainSpec) {
        let t = Tree::from_parent_pairs(&[(1, 0)]).unwrap();
        let s = ChainSpec {
            lambda: vec![0.0, 0.5],
            mu: vec![0.0, 0.5],
            kappa: vec![0.5, 0.5],
        };
        (t, s)
    }

    #[test]
    fn two_node_mean() {
        let (t, s) = two_node();
        let cfg = SimConfig::new(7, 20_000);
        let sum = simulate_hitting(&t, &s, 1, 0, &cfg, Execution::Sequential).unwrap();
        assert_eq!(sum.exact_mean, Some(2.0));
        assert_eq!(sum.exact_variance, Some(2.0));
        assert_eq!(sum.truncated, 0);
        assert!(sum.z_score().unwrap().abs() < 4.0);
        for w in sum.cutoff_profile.windows(2) {
            assert!(w[1].1 <= w[0].1);
        }
    }

    #[test]
    fn truncation_is_reported() {
        let (t, s) = two_node();
        let cfg = SimConfig {
            seed: 1,
            replicas: 200,
            max_steps: Some(1),
        };
        let sum = simulate_hitting(&t, &s, 1, 0, &cfg, Execution::Sequential).unwrap();
        assert!(sum.truncated > 50 && sum.n > 50);
        let cfg = SimConfig {
            max_steps: Some(1),
            ..cfg
        };
        let (t, mut s) = two_node();
        s.mu[1] = 1e-9;
        s.kappa[1] = 1.0 - 1e-9;
        let sum = simulate_hitting(&t, &s, 1, 0, &cfg, Execution::Sequential).unwrap();
        assert!(!sum.usable);
        assert!(sum.mean.is_nan());
    }

    #[test]
    fn rejects_bad_input() {
        let (t, s) = two_node();
        let cfg = SimConfig::new(1, 10);
        assert_eq!(
            simulate_hitting(&t, &s, 1, 1, &cfg, Execution::Sequential),
            Err(SimError::SameNode(1))
        );
        assert!(matches!(
            simulate_hitting(&t, &s, 1, 5, &cfg, Execution::Sequential),
            Err(SimError::NodeOutOfRange { .. })
        ));
        assert_eq!(
            simulate_hitting(&t, &s, 1, 0, &SimConfig::new(1, 0), Execution::Sequential),
            Err(SimError::NoReplicas)
        );
    }

    #[test]
    fn return_time_to_root() {
        let (t, s) = two_node();
        let sum =
            simulate_return(&t, &s, 0, &SimConfig::new(3, 20_000), Execution::Sequential).unwrap();
        assert_eq!(sum.exact_mean, Some(2.0));
        assert!((sum.mean - 2.0).abs() < 4.0 * sum.std_error);
    }

    #[test]
    fn reservoir_keeps_cap() {
        let times: Vec<Option<u64>> = (0..(SAMPLE_CAP as u64 + 500)).map(Some).collect();
        let sum = summarize(&times, u64::MAX, None, None, 9);
        assert_eq!(sum.normalized_samples.len(), SAMPLE_CAP);
        assert_eq!(sum.n, SAMPLE_CAP + 500);
    }

    #[test]
    fn walker_skips_zero_probabilities() {
        let t = Tree::from_parent_pairs(&[(1, 0), (2, 1)]).unwrap();
        let s = ChainSpec {
            lambda: vec![0.0, 0.5, 0.5],
            mu: vec![0.0, 0.5, 0.5],
            kappa: vec![0.5, 0.0, 0.5],
        };
        let w = Walker::new(&t, &s);
        let mut rng = replica_rng(0, 0);
        for _ in 0..1000 {
            assert_ne!(w.step(1, &mut rng), 1);
        }
    }
}
