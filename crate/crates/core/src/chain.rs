//! Transition probabilities of a birth-and-death chain on a tree and its
//! reversible invariant measure.

use crate::numeric::{ln_add, log_sum_exp};
use crate::tree::{NodeId, Tree, ROOT};

/// Default tolerance for the per-site sum rule.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Per-node transition probabilities.
///
/// `lambda[x]` is `P(parent(x), x)` and `mu[x]` is `P(x, parent(x))`; both are
/// unused (zero) at the root. `kappa[x]` is the holding probability `P(x, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub kappa: Vec<f64>,
}

impl ChainSpec {
    /// A spec with every probability zero, to be filled in by the caller.
    pub fn zeros(node_count: usize) -> Self {
        ChainSpec {
            lambda: vec![0.0; node_count],
            mu: vec![0.0; node_count],
            kappa: vec![0.0; node_count],
        }
    }

    pub fn node_count(&self) -> usize {
        self.mu.len()
    }

    /// Total probability of leaving `x` along a tree edge or staying put.
    pub fn outgoing_sum(&self, tree: &Tree, x: NodeId) -> f64 {
        let down: f64 = tree.children(x).iter().map(|&c| self.lambda[c]).sum();
        let up = if x == ROOT { 0.0 } else { self.mu[x] };
        up + self.kappa[x] + down
    }

    /// `P(x, y)`; zero unless `y` is `x`, its parent or one of its children.
    pub fn transition(&self, tree: &Tree, x: NodeId, y: NodeId) -> f64 {
        if x == y {
            self.kappa[x]
        } else if tree.parent(x) == Some(y) {
            self.mu[x]
        } else if tree.parent(y) == Some(x) {
            self.lambda[y]
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    /// The spec does not have one entry per tree node.
    SizeMismatch { expected: usize, found: usize },
    /// `λ_x` or `μ_x` is not strictly positive (chain not irreducible).
    NotPositive { field: &'static str, value: f64 },
    /// `κ_x` is negative or not a number.
    BadHolding { value: f64 },
    /// Outgoing probabilities do not sum to one.
    SumMismatch { sum: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub node: NodeId,
    pub kind: ViolationKind,
}

impl Violation {
    /// `1 - Σ outgoing`, when the violation is a sum mismatch.
    pub fn deficit(&self) -> Option<f64> {
        match self.kind {
            ViolationKind::SumMismatch { sum } => Some(1.0 - sum),
            _ => None,
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            ViolationKind::SizeMismatch { expected, found } => {
                write!(f, "spec covers {found} nodes, tree has {expected}")
            }
            ViolationKind::NotPositive { field, value } => {
                write!(f, "node {}: {field} = {value} must be positive", self.node)
            }
            ViolationKind::BadHolding { value } => {
                write!(
                    f,
                    "node {}: kappa = {value} must be non-negative",
                    self.node
                )
            }
            ViolationKind::SumMismatch { sum } => write!(
                f,
                "node {}: outgoing probabilities sum to {sum} (deficit {})",
                self.node,
                1.0 - sum
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks positivity of every `λ`, `μ` and the sum rule at every site.
pub fn validate(tree: &Tree, spec: &ChainSpec, tol: f64) -> ValidationReport {
    let n = tree.node_count();
    let mut violations = Vec::new();
    for (len, _name) in [
        (spec.lambda.len(), "lambda"),
        (spec.mu.len(), "mu"),
        (spec.kappa.len(), "kappa"),
    ] {
        if len != n {
            violations.push(Violation {
                node: ROOT,
                kind: ViolationKind::SizeMismatch {
                    expected: n,
                    found: len,
                },
            });
            return ValidationReport { violations };
        }
    }
    for x in 0..n {
        if x != ROOT {
            for (field, value) in [("lambda", spec.lambda[x]), ("mu", spec.mu[x])] {
                if !(value > 0.0) {
                    violations.push(Violation {
                        node: x,
                        kind: ViolationKind::NotPositive { field, value },
                    });
                }
            }
        }
        let k = spec.kappa[x];
        if !(k >= 0.0) {
            violations.push(Violation {
                node: x,
                kind: ViolationKind::BadHolding { value: k },
            });
        }
        let sum = spec.outgoing_sum(tree, x);
        if !((sum - 1.0).abs() <= tol) {
            violations.push(Violation {
                node: x,
                kind: ViolationKind::SumMismatch { sum },
            });
        }
    }
    ValidationReport { violations }
}

/// The reversible invariant measure `π` with branch aggregates.
///
/// Absolute quantities are kept as logarithms because `π` decays
/// geometrically along a drift and drops below double range on deep trees.
/// The branch ratio `ρ(x) = π(B_x)/π(x)` never needs the normalization and is
/// kept in plain form as well.
#[derive(Debug, Clone)]
pub struct StationaryMeasure {
    /// `ln w(x)` with `w(x) = Π_{y∈ℓ(x)} λ_y/μ_y`, `w(0) = 1`.
    pub log_weight: Vec<f64>,
    /// `ln Σ_x w(x)`.
    pub log_normalizer: f64,
    pub log_pi: Vec<f64>,
    pub pi: Vec<f64>,
    pub pi0: f64,
    pub log_branch_mass: Vec<f64>,
    pub branch_mass: Vec<f64>,
    /// `ln π(I \ B_x)`; `-inf` at the root.
    pub log_complement_mass: Vec<f64>,
    pub complement_mass: Vec<f64>,
    pub branch_ratio: Vec<f64>,
    pub log_branch_ratio: Vec<f64>,
    /// Set when some branch mass is below the smallest normal double.
    pub underflow: bool,
}

impl StationaryMeasure {
    pub fn compute(tree: &Tree, spec: &ChainSpec) -> StationaryMeasure {
        let n = tree.node_count();
        let order = tree.preorder();

        let mut log_weight = vec![0.0; n];
        for &x in &order[1..] {
            let p = tree.parent(x).expect("non-root");
            log_weight[x] = log_weight[p] + spec.lambda[x].ln() - spec.mu[x].ln();
        }
        let log_normalizer = log_sum_exp(log_weight.iter().copied());
        let log_pi: Vec<f64> = log_weight.iter().map(|w| w - log_normalizer).collect();
        let pi: Vec<f64> = log_pi.iter().map(|l| l.exp()).collect();

        // ρ(x) = 1 + Σ_c (λ_c/μ_c) ρ(c), plain and in log form
        let mut branch_ratio = vec![1.0; n];
        let mut log_ratio_rec = vec![0.0; n];
        for &x in order.iter().rev() {
            if let Some(p) = tree.parent(x) {
                let step = spec.lambda[x] / spec.mu[x];
                branch_ratio[p] += step * branch_ratio[x];
                let term = spec.lambda[x].ln() - spec.mu[x].ln() + log_ratio_rec[x];
                log_ratio_rec[p] = ln_add(log_ratio_rec[p], term);
            }
        }
        let log_branch_ratio: Vec<f64> = branch_ratio
            .iter()
            .zip(&log_ratio_rec)
            .map(|(&r, &lr)| if r.is_finite() { r.ln() } else { lr })
            .collect();

        let log_branch_mass: Vec<f64> = log_pi
            .iter()
            .zip(&log_branch_ratio)
            .map(|(a, b)| (a + b).min(0.0))
            .collect();
        let branch_mass: Vec<f64> = log_branch_mass.iter().map(|l| l.exp()).collect();

        let log_complement_mass = complement_masses(tree, &log_pi, &log_branch_mass);
        let complement_mass = log_complement_mass.iter().map(|l| l.exp()).collect();

        let underflow = branch_mass.iter().any(|&m| m < f64::MIN_POSITIVE);
        StationaryMeasure {
            log_weight,
            log_normalizer,
            pi0: pi[ROOT],
            log_pi,
            pi,
            log_branch_mass,
            branch_mass,
            log_complement_mass,
            complement_mass,
            branch_ratio,
            log_branch_ratio,
            underflow,
        }
    }
}

/// `ln π(I \ B_x)` computed top-down as a sum of positive pieces:
/// the parent's complement, the parent itself and the sibling branches.
fn complement_masses(tree: &Tree, log_pi: &[f64], log_branch_mass: &[f64]) -> Vec<f64> {
    let n = tree.node_count();
    let mut out = vec![f64::NEG_INFINITY; n];
    for &p in tree.preorder() {
        let kids = tree.children(p);
        if kids.is_empty() {
            continue;
        }
        let base = ln_add(out[p], log_pi[p]);
        for (i, s) in sibling_excluded(kids.iter().map(|&c| log_branch_mass[c]))
            .into_iter()
            .enumerate()
        {
            out[kids[i]] = ln_add(base, s);
        }
    }
    out
}

/// For each position `i`, `ln Σ_{j≠i} e^{v_j}` via prefix and suffix sums.
pub(crate) fn sibling_excluded<I: IntoIterator<Item = f64>>(values: I) -> Vec<f64> {
    let v: Vec<f64> = values.into_iter().collect();
    let m = v.len();
    let mut prefix = vec![f64::NEG_INFINITY; m + 1];
    for i in 0..m {
        prefix[i + 1] = ln_add(prefix[i], v[i]);
    }
    let mut suffix = vec![f64::NEG_INFINITY; m + 1];
    for i in (0..m).rev() {
        suffix[i] = ln_add(suffix[i + 1], v[i]);
    }
    (0..m).map(|i| ln_add(prefix[i], suffix[i + 1])).collect()
}
