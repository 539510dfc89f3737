//! Biased walk on the finite `r`-ary tree.
//!
//! Every internal non-root node steps to its parent with probability
//! `λ/(λ+r)` and to each of its `r` children with `1/(λ+r)`. The root holds
//! with `λ/(λ+r)`, leaves hold with `r/(λ+r)`. Nodes are numbered in level
//! order, so the children of `i` are `r·i+1 ..= r·i+r`.
//!
//! [`closed_forms`] evaluates the explicit formulas for this family without
//! going through the general machinery, so the two can be compared.

use thiserror::Error;

use crate::chain::ChainSpec;
use crate::tree::{NodeId, Tree};

/// Default node cap, enough for `r = 2` up to depth 20.
pub const DEFAULT_NODE_CAP: usize = 2_500_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegularError {
    #[error("r must be at least 1")]
    BadArity,
    #[error("bias must be positive and finite, got {0}")]
    BadBias(f64),
    #[error("depth must be at least 1")]
    BadDepth,
    #[error("tree would have more than {cap} nodes")]
    TooLarge { cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularSpec {
    pub r: usize,
    pub bias: f64,
    pub depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `λ > r`: drift toward the root.
    Localized,
    /// `λ < r`: drift toward the leaves.
    Delocalized,
    /// `λ = r`.
    Critical,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Localized => "localized",
            Regime::Delocalized => "delocalized",
            Regime::Critical => "critical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForms {
    pub k_a: f64,
    /// `E[T_{a→0}]` for a leaf `a`.
    pub mean_to_root: f64,
    pub pi0: f64,
    /// `1/π(0)`.
    pub return_root: f64,
    /// Large-depth limit `λ/(λ−r)` of the root return time (localized only).
    pub return_root_asymptotic: Option<f64>,
    /// Large-depth equivalent `λ^{d+1}/(λ−r)` of a leaf return time
    /// (localized only).
    pub return_leaf_asymptotic: Option<f64>,
    pub regime: Regime,
}

impl RegularSpec {
    pub fn new(r: usize, bias: f64, depth: usize) -> Result<Self, RegularError> {
        let spec = RegularSpec { r, bias, depth };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<(), RegularError> {
        if self.r == 0 {
            return Err(RegularError::BadArity);
        }
        if !(self.bias > 0.0 && self.bias.is_finite()) {
            return Err(RegularError::BadBias(self.bias));
        }
        if self.depth == 0 {
            return Err(RegularError::BadDepth);
        }
        Ok(())
    }

    /// `Σ_{k=0}^{depth} r^k`, or `None` on overflow.
    pub fn node_count(&self) -> Option<usize> {
        let mut total: usize = 1;
        let mut level: usize = 1;
        for _ in 0..self.depth {
            level = level.checked_mul(self.r)?;
            total = total.checked_add(level)?;
        }
        Some(total)
    }

    /// The leftmost node of the deepest level.
    pub fn deepest(&self) -> NodeId {
        let mut first = 0;
        for _ in 0..self.depth {
            first = self.r * first + 1;
        }
        first
    }

    pub fn regime(&self) -> Regime {
        let r = self.r as f64;
        if self.bias > r {
            Regime::Localized
        } else if self.bias < r {
            Regime::Delocalized
        } else {
            Regime::Critical
        }
    }
}

pub fn generate(spec: &RegularSpec) -> Result<(Tree, ChainSpec), RegularError> {
    generate_capped(spec, DEFAULT_NODE_CAP)
}

pub fn generate_capped(spec: &RegularSpec, cap: usize) -> Result<(Tree, ChainSpec), RegularError> {
    spec.check()?;
    let n = spec
        .node_count()
        .filter(|&n| n <= cap)
        .ok_or(RegularError::TooLarge { cap })?;
    let r = spec.r;
    let parents: Vec<Option<NodeId>> = (0..n)
        .map(|i| if i == 0 { None } else { Some((i - 1) / r) })
        .collect();
    let tree = Tree::from_parents(&parents).expect("level order is topological");

    let total = spec.bias + r as f64;
    let first_leaf = spec.deepest();
    let mut chain = ChainSpec::zeros(n);
    chain.kappa[0] = spec.bias / total;
    for x in 1..n {
        chain.lambda[x] = 1.0 / total;
        chain.mu[x] = spec.bias / total;
        if x >= first_leaf {
            chain.kappa[x] = r as f64 / total;
        }
    }
    Ok((tree, chain))
}

/// Explicit formulas at `a` = a leaf.
pub fn closed_forms(spec: &RegularSpec) -> ClosedForms {
    let lam = spec.bias;
    let r = spec.r as f64;
    let d = spec.depth as f64;
    let regime = spec.regime();
    let q = r / lam;
    let (k_a, mean_to_root, pi0) = match regime {
        Regime::Critical => (d, (lam + r) / (2.0 * lam) * d * (d + 1.0), 1.0 / (d + 1.0)),
        _ => {
            let qd = q.powi(spec.depth as i32);
            let k = lam / (lam - r) * (1.0 - qd);
            let e = (lam + r) / (lam - r) * (d + r / (lam - r) * (qd - 1.0));
            let p = (1.0 - q) / (1.0 - q * qd);
            (k, e, p)
        }
    };
    let localized = regime == Regime::Localized;
    ClosedForms {
        k_a,
        mean_to_root,
        pi0,
        return_root: 1.0 / pi0,
        return_root_asymptotic: localized.then(|| lam / (lam - r)),
        return_leaf_asymptotic: localized.then(|| lam.powi(spec.depth as i32 + 1) / (lam - r)),
        regime,
    }
}
