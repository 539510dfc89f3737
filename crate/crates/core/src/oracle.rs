//! First-step equations for hitting times, solved directly on the raw
//! transition probabilities.
//!
//! This is the reference the closed forms are checked against. It never
//! touches the invariant measure: for a target `t` it solves
//!
//! ```text
//! h(x) = 1 + Σ_y P(x,y) h(y)                 (x ≠ t),  h(t) = 0
//! s(x) = 1 + Σ_y P(x,y) (s(y) + 2 h(y))      (x ≠ t),  s(t) = 0
//! ```
//!
//! by re-rooting the tree at `t` and eliminating subtrees into affine
//! relations `h(x) = α_x + β_x h(q(x))`, with `q(x)` the neighbour of `x` on
//! the way to `t`. One leaf-to-target pass and one target-to-leaf pass solve
//! each system exactly in O(N).

use thiserror::Error;

use crate::chain::ChainSpec;
use crate::tree::{NodeId, Tree};

/// Largest tree the oracle accepts by default.
pub const DEFAULT_NODE_CAP: usize = 100_000;

/// Residual tolerance relative to `1 + |h(x)|`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("target {target} is not a node of a {node_count}-node tree")]
    BadTarget { target: NodeId, node_count: usize },
    #[error("tree has {node_count} nodes, above the oracle cap of {cap}")]
    TooLarge { node_count: usize, cap: usize },
    #[error("elimination is singular at node {0}")]
    Singular(NodeId),
    #[error("solution residual {residual:e} exceeds tolerance")]
    Residual { residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearHittingSolution {
    pub target: NodeId,
    /// `h(x) = E[T_{x→target}]`.
    pub mean: Vec<f64>,
    /// `s(x) = E[T²_{x→target}]`.
    pub second: Vec<f64>,
    /// Largest first-step residual of either system, relative to `1 + |value|`.
    pub residual: f64,
}

/// Tree re-rooted at the target: neighbour toward the target and the order
/// in which to eliminate.
struct Rerooted {
    toward: Vec<Option<NodeId>>,
    order: Vec<NodeId>,
}

fn neighbours(tree: &Tree, x: NodeId) -> impl Iterator<Item = NodeId> + '_ {
    tree.parent(x)
        .into_iter()
        .chain(tree.children(x).iter().copied())
}

fn reroot(tree: &Tree, target: NodeId) -> Rerooted {
    let n = tree.node_count();
    let mut toward = vec![None; n];
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    visited[target] = true;
    order.push(target);
    let mut head = 0;
    while head < order.len() {
        let x = order[head];
        head += 1;
        for y in neighbours(tree, x) {
            if !visited[y] {
                visited[y] = true;
                toward[y] = Some(x);
                order.push(y);
            }
        }
    }
    Rerooted { toward, order }
}

/// Solves `v(x) = f(x) + Σ_y P(x,y) v(y)` with `v(target) = 0`.
fn solve_system(
    tree: &Tree,
    spec: &ChainSpec,
    rr: &Rerooted,
    target: NodeId,
    source: &[f64],
) -> Result<Vec<f64>, OracleError> {
    let n = tree.node_count();
    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    // 1 − β, carried separately to avoid cancellation
    let mut gamma = vec![0.0; n];
    for &x in rr.order.iter().rev() {
        if x == target {
            continue;
        }
        let q = rr.toward[x].expect("non-target has a neighbour toward the target");
        let p_out = spec.transition(tree, x, q);
        let mut denom = p_out;
        let mut num = source[x];
        let mut leak = 0.0;
        for y in neighbours(tree, x) {
            if y == q {
                continue;
            }
            let p = spec.transition(tree, x, y);
            denom += p * gamma[y];
            leak += p * gamma[y];
            num += p * alpha[y];
        }
        if !(denom > 0.0) {
            return Err(OracleError::Singular(x));
        }
        alpha[x] = num / denom;
        beta[x] = p_out / denom;
        gamma[x] = leak / denom;
    }
    let mut v = vec![0.0; n];
    for &x in &rr.order {
        if x == target {
            continue;
        }
        let q = rr.toward[x].expect("non-target has a neighbour toward the target");
        v[x] = alpha[x] + beta[x] * v[q];
    }
    Ok(v)
}

fn residual(tree: &Tree, spec: &ChainSpec, target: NodeId, values: &[f64], source: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for x in 0..tree.node_count() {
        if x == target {
            continue;
        }
        let mut rhs = source[x] + spec.kappa[x] * values[x];
        for y in neighbours(tree, x) {
            rhs += spec.transition(tree, x, y) * values[y];
        }
        worst = worst.max((values[x] - rhs).abs() / (1.0 + values[x].abs()));
    }
    worst
}

/// Means and second moments of the hitting time of `target` from every node.
pub fn solve_hitting(
    tree: &Tree,
    spec: &ChainSpec,
    target: NodeId,
) -> Result<LinearHittingSolution, OracleError> {
    solve_hitting_capped(tree, spec, target, DEFAULT_NODE_CAP)
}

pub fn solve_hitting_capped(
    tree: &Tree,
    spec: &ChainSpec,
    target: NodeId,
    cap: usize,
) -> Result<LinearHittingSolution, OracleError> {
    let n = tree.node_count();
    if target >= n {
        return Err(OracleError::BadTarget {
            target,
            node_count: n,
        });
    }
    if n > cap {
        return Err(OracleError::TooLarge { node_count: n, cap });
    }
    let rr = reroot(tree, target);

    let mut ones = vec![1.0; n];
    ones[target] = 0.0;
    let mean = solve_system(tree, spec, &rr, target, &ones)?;

    // s(x) = 1 + 2 Σ_y P(x,y) h(y) + Σ_y P(x,y) s(y)
    let mut drive = vec![0.0; n];
    for x in 0..n {
        if x == target {
            continue;
        }
        let mut acc = spec.kappa[x] * mean[x];
        for y in neighbours(tree, x) {
            acc += spec.transition(tree, x, y) * mean[y];
        }
        drive[x] = 1.0 + 2.0 * acc;
    }
    let second = solve_system(tree, spec, &rr, target, &drive)?;

    let res = residual(tree, spec, target, &mean, &ones)
        .max(residual(tree, spec, target, &second, &drive));
    if !(res <= RESIDUAL_TOLERANCE) {
        return Err(OracleError::Residual { residual: res });
    }
    Ok(LinearHittingSolution {
        target,
        mean,
        second,
        residual: res,
    })
}
