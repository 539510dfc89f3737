//! Exact first and second moments of hitting times along root paths.
//!
//! For a node `a` with path `a_0 = a, a_1, …, a_{d(a)} = 0`, the time from
//! `a_j` to `a_n` is a sum of independent single-edge crossings, and every
//! moment reduces to sums of branch aggregates of the invariant measure:
//!
//! ```text
//! E[T_{x→p(x)}]   = ρ(x)/μ_x
//! E[T_{p(x)→x}]   = π(I∖B_x) / (μ_x π(x))
//! E[T²_{x→p(x)}]  = (2/μ_x) Σ_{b∈B_x} (π(b)/π(x)) ρ(b)²/μ_b − E[T_{x→p(x)}]
//! ```
//!
//! with `ρ(x) = π(B_x)/π(x)`. The per-node aggregates are built once per tree
//! in O(N); each `(a, j, n)` query then costs O(d(a)).

use thiserror::Error;

use crate::chain::{ChainSpec, StationaryMeasure};
use crate::numeric::{Magnitude, MagnitudeSum};
use crate::tree::{NodeId, Tree, ROOT};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HittingError {
    #[error("node {node} is out of range for a tree of {node_count} nodes")]
    NodeOutOfRange { node: NodeId, node_count: usize },
    #[error("path index {index} exceeds depth {depth} of node {node}")]
    IndexOutOfRange {
        node: NodeId,
        index: usize,
        depth: usize,
    },
}

/// First two moments of `T_{source→target}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub source: NodeId,
    pub target: NodeId,
    pub mean: Magnitude,
    pub second: Magnitude,
    pub variance: Magnitude,
}

impl MomentReport {
    fn zero(node: NodeId) -> Self {
        MomentReport {
            source: node,
            target: node,
            mean: Magnitude::ZERO,
            second: Magnitude::ZERO,
            variance: Magnitude::ZERO,
        }
    }

    fn new(source: NodeId, target: NodeId, mean: Magnitude, second: Magnitude) -> Self {
        MomentReport {
            source,
            target,
            mean,
            second,
            variance: second.saturating_sub(mean.square()),
        }
    }

    /// True when some field is outside plain double range.
    pub fn log_scale(&self) -> bool {
        !(self.mean.is_reportable() && self.second.is_reportable() && self.variance.is_reportable())
    }
}

fn mag(plain: f64, ln: f64) -> Magnitude {
    if plain.is_finite() && plain >= f64::MIN_POSITIVE {
        Magnitude::new(plain)
    } else {
        Magnitude::from_ln(ln)
    }
}

/// Precomputed per-node aggregates for one chain.
#[derive(Debug, Clone)]
pub struct HittingTimes<'a> {
    tree: &'a Tree,
    spec: &'a ChainSpec,
    pi: Vec<Magnitude>,
    ratio: Vec<Magnitude>,
    up_mean: Vec<Magnitude>,
    down_mean: Vec<Magnitude>,
    /// `Σ_{b∈B_x} (π(b)/π(x)) ρ(b)²/μ_b`.
    branch_sq_rel: Vec<Magnitude>,
    /// `Σ_{c∈C_x} π(B_c)²/(μ_c π(c))` over the side branches above `x`.
    side_sq: Vec<Magnitude>,
    /// `Σ_{b∈ℓ(x)} π(I∖B_b)²/(μ_b π(b))`.
    path_complement_sq: Vec<Magnitude>,
    to_root: Vec<Magnitude>,
}

impl<'a> HittingTimes<'a> {
    pub fn new(tree: &'a Tree, spec: &'a ChainSpec, measure: &StationaryMeasure) -> Self {
        let n = tree.node_count();
        let order = tree.preorder();
        let pi: Vec<Magnitude> = (0..n)
            .map(|x| mag(measure.pi[x], measure.log_pi[x]))
            .collect();
        let ratio: Vec<Magnitude> = (0..n)
            .map(|x| mag(measure.branch_ratio[x], measure.log_branch_ratio[x]))
            .collect();
        let complement: Vec<Magnitude> = (0..n)
            .map(|x| mag(measure.complement_mass[x], measure.log_complement_mass[x]))
            .collect();
        let mu: Vec<Magnitude> = (0..n)
            .map(|x| {
                if x == ROOT {
                    Magnitude::ZERO
                } else {
                    Magnitude::new(spec.mu[x])
                }
            })
            .collect();

        let mut up_mean = vec![Magnitude::ZERO; n];
        let mut down_mean = vec![Magnitude::ZERO; n];
        for x in 1..n {
            up_mean[x] = ratio[x].div(mu[x]);
            down_mean[x] = complement[x].div(mu[x].mul(pi[x]));
        }

        let mut branch_sq_rel = vec![Magnitude::ZERO; n];
        for &x in order.iter().rev() {
            if x == ROOT {
                continue;
            }
            let mut acc = MagnitudeSum::new();
            acc.push(ratio[x].square().div(mu[x]));
            for &c in tree.children(x) {
                let step = Magnitude::new(spec.lambda[c]).div(mu[c]);
                acc.push(step.mul(branch_sq_rel[c]));
            }
            branch_sq_rel[x] = acc.total();
        }

        let mut side_sq = vec![Magnitude::ZERO; n];
        let mut path_complement_sq = vec![Magnitude::ZERO; n];
        let mut to_root = vec![Magnitude::ZERO; n];
        for &p in order {
            let kids = tree.children(p);
            let branch_sq: Vec<Magnitude> =
                kids.iter().map(|&c| pi[c].mul(branch_sq_rel[c])).collect();
            let excluded = excluded_sums(&branch_sq);
            for (i, &c) in kids.iter().enumerate() {
                side_sq[c] = side_sq[p].add(excluded[i]);
                let own = complement[c].square().div(mu[c].mul(pi[c]));
                path_complement_sq[c] = path_complement_sq[p].add(own);
                to_root[c] = to_root[p].add(up_mean[c]);
            }
        }

        HittingTimes {
            tree,
            spec,
            pi,
            ratio,
            up_mean,
            down_mean,
            branch_sq_rel,
            side_sq,
            path_complement_sq,
            to_root,
        }
    }

    pub fn tree(&self) -> &Tree {
        self.tree
    }

    fn mu(&self, x: NodeId) -> Magnitude {
        Magnitude::new(self.spec.mu[x])
    }

    /// `E[T_{x→p(x)}] = ρ(x)/μ_x`. Panics at the root.
    pub fn mean_up_edge(&self, x: NodeId) -> Magnitude {
        assert_ne!(x, ROOT, "the root has no parent edge");
        self.up_mean[x]
    }

    /// `E[T²_{x→p(x)}]`. Panics at the root.
    pub fn second_up_edge(&self, x: NodeId) -> Magnitude {
        assert_ne!(x, ROOT, "the root has no parent edge");
        self.branch_sq_rel[x]
            .scale(2.0)
            .div(self.mu(x))
            .saturating_sub(self.up_mean[x])
    }

    /// `E[T_{p(x)→x}] = (1 − π(B_x))/(μ_x π(x))`. Panics at the root.
    pub fn mean_down_edge(&self, x: NodeId) -> Magnitude {
        assert_ne!(x, ROOT, "the root has no parent edge");
        self.down_mean[x]
    }

    /// `E[T²_{p(x)→x}]`. Panics at the root.
    pub fn second_down_edge(&self, x: NodeId) -> Magnitude {
        assert_ne!(x, ROOT, "the root has no parent edge");
        self.side_sq[x]
            .add(self.path_complement_sq[x])
            .scale(2.0)
            .div(self.mu(x).mul(self.pi[x]))
            .saturating_sub(self.down_mean[x])
    }

    /// `Σ_{b∈B_x} π(B_b)²/(μ_b π(b))`.
    pub fn branch_square_sum(&self, x: NodeId) -> Magnitude {
        self.pi[x].mul(self.branch_sq_rel[x])
    }

    /// `(1/π(B_x)) Σ_{b∈B_x} π(B_b)²/(μ_b π(b))`.
    pub fn branch_square_ratio(&self, x: NodeId) -> Magnitude {
        self.branch_sq_rel[x].div(self.ratio[x])
    }

    /// `π(B_x)²/(μ_x π(x))`, the single-node term of the sums above.
    pub fn node_square_term(&self, x: NodeId) -> Magnitude {
        self.pi[x].mul(self.ratio[x].square()).div(self.mu(x))
    }

    /// `1/(μ_x π(x))`: the mean round trip across the edge above `x`.
    pub fn commute_edge(&self, x: NodeId) -> Magnitude {
        Magnitude::ONE.div(self.mu(x).mul(self.pi[x]))
    }

    pub fn branch_ratio(&self, x: NodeId) -> Magnitude {
        self.ratio[x]
    }

    pub fn pi(&self, x: NodeId) -> Magnitude {
        self.pi[x]
    }

    /// `E[T_{x→0}]` for every node.
    pub fn mean_to_root_all(&self) -> &[Magnitude] {
        &self.to_root
    }

    fn path_nodes(&self, a: NodeId, j: usize, n: usize) -> Result<Vec<NodeId>, HittingError> {
        let count = self.tree.node_count();
        if a >= count {
            return Err(HittingError::NodeOutOfRange {
                node: a,
                node_count: count,
            });
        }
        let depth = self.tree.depth(a);
        for index in [j, n] {
            if index > depth {
                return Err(HittingError::IndexOutOfRange {
                    node: a,
                    index,
                    depth,
                });
            }
        }
        let mut path = self.tree.root_path(a).nodes().to_vec();
        path.push(ROOT);
        Ok(path)
    }

    /// `E[T_{a_j→a_n}]` along the root path of `a`; zero when `j == n`.
    pub fn mean_hitting(&self, a: NodeId, j: usize, n: usize) -> Result<Magnitude, HittingError> {
        let path = self.path_nodes(a, j, n)?;
        let total: MagnitudeSum = if j < n {
            path[j..n].iter().map(|&x| self.up_mean[x]).collect()
        } else {
            path[n..j].iter().map(|&x| self.down_mean[x]).collect()
        };
        Ok(total.total())
    }

    /// Mean, second moment and variance of `T_{a_j→a_n}`.
    pub fn hitting_moments(
        &self,
        a: NodeId,
        j: usize,
        n: usize,
    ) -> Result<MomentReport, HittingError> {
        let path = self.path_nodes(a, j, n)?;
        if j == n {
            return Ok(MomentReport::zero(path[j]));
        }
        if j < n {
            Ok(self.toward_root(&path[j..=n]))
        } else {
            Ok(self.away_from_root(&path[n..=j]))
        }
    }

    /// Moments of the climb from `seg[0]` to `seg.last()` (toward the root).
    fn toward_root(&self, seg: &[NodeId]) -> MomentReport {
        let edges = &seg[..seg.len() - 1];
        let mut tail = MagnitudeSum::new();
        let mut mean = MagnitudeSum::new();
        let mut twice = MagnitudeSum::new();
        for &x in edges.iter().rev() {
            let rest = tail.total();
            twice.push(
                self.branch_sq_rel[x]
                    .add(self.ratio[x].mul(rest))
                    .scale(2.0)
                    .div(self.mu(x)),
            );
            tail.push(self.up_mean[x]);
            mean.push(self.up_mean[x]);
        }
        let mean = mean.total();
        let second = twice.total().saturating_sub(mean);
        MomentReport::new(seg[0], seg[seg.len() - 1], mean, second)
    }

    /// Moments of the descent from `seg.last()` down to `seg[0]`.
    fn away_from_root(&self, seg: &[NodeId]) -> MomentReport {
        let edges = &seg[..seg.len() - 1];
        let mut prefix = MagnitudeSum::new();
        let mut mean = MagnitudeSum::new();
        let mut twice = MagnitudeSum::new();
        for &x in edges {
            let below = prefix.total();
            let inner = self.side_sq[x]
                .add(self.path_complement_sq[x])
                .div(self.mu(x).mul(self.pi[x]))
                .add(self.down_mean[x].mul(below));
            twice.push(inner.scale(2.0));
            prefix.push(self.down_mean[x]);
            mean.push(self.down_mean[x]);
        }
        let mean = mean.total();
        let second = twice.total().saturating_sub(mean);
        MomentReport::new(seg[seg.len() - 1], seg[0], mean, second)
    }
}

fn excluded_sums(values: &[Magnitude]) -> Vec<Magnitude> {
    let m = values.len();
    let mut prefix = vec![Magnitude::ZERO; m + 1];
    for i in 0..m {
        prefix[i + 1] = prefix[i].add(values[i]);
    }
    let mut suffix = vec![Magnitude::ZERO; m + 1];
    for i in (0..m).rev() {
        suffix[i] = suffix[i + 1].add(values[i]);
    }
    (0..m).map(|i| prefix[i].add(suffix[i + 1])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::StationaryMeasure;

    fn two_node() -> (Tree, ChainSpec) {
        let t = Tree::from_parent_pairs(&[(1, 0)]).unwrap();
        let s = ChainSpec {
            lambda: vec![0.0, 0.5],
            mu: vec![0.0, 0.5],
            kappa: vec![0.5, 0.5],
        };
        (t, s)
    }

    fn path3() -> (Tree, ChainSpec) {
        let t = Tree::from_parent_pairs(&[(1, 0), (2, 1)]).unwrap();
        let s = ChainSpec {
            lambda: vec![0.0, 0.5, 0.5],
            mu: vec![0.0, 0.5, 0.5],
            kappa: vec![0.5, 0.0, 0.5],
        };
        (t, s)
    }

    #[test]
    fn two_node_edges_are_geometric() {
        let (t, s) = two_node();
        let m = StationaryMeasure::compute(&t, &s);
        let h = HittingTimes::new(&t, &s, &m);
        assert_eq!(h.mean_up_edge(1).value(), 2.0);
        assert_eq!(h.second_up_edge(1).value(), 6.0);
        assert_eq!(h.mean_down_edge(1).value(), 2.0);
        assert_eq!(h.second_down_edge(1).value(), 6.0);
        let r = h.hitting_moments(1, 0, 1).unwrap();
        assert_eq!((r.mean.value(), r.second.value()), (2.0, 6.0));
        assert_eq!(r.variance.value(), 2.0);
    }

    #[test]
    fn path_hand_values() {
        let (t, s) = path3();
        let m = StationaryMeasure::compute(&t, &s);
        let h = HittingTimes::new(&t, &s, &m);
        assert!((h.mean_up_edge(1).value() - 4.0).abs() < 1e-14);
        assert!((h.mean_down_edge(2).value() - 4.0).abs() < 1e-14);
        assert!((h.mean_down_edge(1).value() - 2.0).abs() < 1e-14);
        let up = h.mean_hitting(2, 0, 2).unwrap().value();
        let down = h.mean_hitting(2, 2, 0).unwrap().value();
        assert!((up - 6.0).abs() < 1e-14);
        assert!((down - 6.0).abs() < 1e-14);
        let to_root: Vec<f64> = h.mean_to_root_all().iter().map(|m| m.value()).collect();
        assert_eq!(to_root[0], 0.0);
        assert!((to_root[1] - 4.0).abs() < 1e-14);
        assert!((to_root[2] - 6.0).abs() < 1e-14);
    }

    #[test]
    fn deterministic_step_has_no_variance() {
        // leaf with μ = 1 crosses its edge in exactly one step
        let t = Tree::from_parent_pairs(&[(1, 0), (2, 1)]).unwrap();
        let s = ChainSpec {
            lambda: vec![0.0, 1.0, 0.5],
            mu: vec![0.0, 0.5, 1.0],
            kappa: vec![0.0, 0.0, 0.0],
        };
        let m = StationaryMeasure::compute(&t, &s);
        let h = HittingTimes::new(&t, &s, &m);
        assert_eq!(h.mean_up_edge(2).value(), 1.0);
        assert_eq!(h.second_up_edge(2).value(), 1.0);
    }

    #[test]
    fn equal_indices_give_the_zero_report() {
        let (t, s) = path3();
        let m = StationaryMeasure::compute(&t, &s);
        let h = HittingTimes::new(&t, &s, &m);
        let r = h.hitting_moments(2, 1, 1).unwrap();
        assert!(r.mean.is_zero() && r.second.is_zero() && r.variance.is_zero());
        assert_eq!((r.source, r.target), (1, 1));
    }

    #[test]
    fn indices_past_the_root_are_rejected() {
        let (t, s) = path3();
        let m = StationaryMeasure::compute(&t, &s);
        let h = HittingTimes::new(&t, &s, &m);
        assert_eq!(
            h.hitting_moments(2, 0, 3),
            Err(HittingError::IndexOutOfRange {
                node: 2,
                index: 3,
                depth: 2
            })
        );
        assert!(matches!(
            h.mean_hitting(9, 0, 1),
            Err(HittingError::NodeOutOfRange { .. })
        ));
    }
}
