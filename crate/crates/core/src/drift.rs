//! Strong-drift constants, cut-off and escape diagnostics.
//!
//! For a target `a` with `α_a` its ancestor just below the root, the drift
//! toward the root along the branch `B_{α_a}` is measured by
//!
//! ```text
//! K_μ = inf_{b∈B_{α_a}} μ_b          K_a = sup_{b∈B_{α_a}} π(B_b)/π(b)
//! Q_a = sup_{x∈ℓ(a)} (1/π(B_x)) Σ_{b∈B_x} π(B_b)²/(μ_b π(b))
//! R_a = Σ_{b∈ℓ(a)} π(B_b)²/(μ_b π(b))
//! ```
//!
//! and the primed constants take the same extremum over the whole tree.
//! `K_a²/E[T_{a→0}] → 0` along a family of growing trees gives cut-off of
//! `T_{a→0}`; adding bounded `sup_x E[T_{x→0}]/E[T_{a→0}]`, bounded
//! `K'_a²/E[T_{a→0}]` and `K'_μ` bounded below gives escape of `T_{0→a}`.
//! A finite family can only show trends, so [`family_verdict`] reports the
//! raw sequences next to a thresholded verdict.

use thiserror::Error;

use crate::chain::{ChainSpec, StationaryMeasure};
use crate::exec::{map_indices, Execution};
use crate::hitting::{HittingError, HittingTimes, MomentReport};
use crate::numeric::{Magnitude, MagnitudeSum};
use crate::tree::{NodeId, Tree, ROOT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DriftError {
    #[error("the target must not be the root")]
    RootTarget,
    #[error("a family needs at least 3 depths, got {0}")]
    TooFewDepths(usize),
    #[error("family depths must be strictly increasing (depth {next} after {prev})")]
    DepthsNotIncreasing { prev: usize, next: usize },
    #[error("reference constant must be positive, got {0}")]
    BadConstant(f64),
    #[error("second-moment bound needs j < n, got j = {j}, n = {n}")]
    BoundIndices { j: usize, n: usize },
    #[error(transparent)]
    Hitting(#[from] HittingError),
}

/// Every constant of the drift definition and the escape hypotheses for one
/// chain and target.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub target: NodeId,
    pub depth: usize,
    /// `inf μ` over the branch containing the target.
    pub k_mu: f64,
    /// `inf μ` over all non-root nodes.
    pub kp_mu: f64,
    /// `sup ρ` over the branch containing the target.
    pub k_a: Magnitude,
    /// The same supremum evaluated as `sup μ_b E[T_{b→p(b)}]`.
    pub k_a_via_mean: Magnitude,
    /// `sup ρ` over all non-root nodes.
    pub kp_a: Magnitude,
    pub q_a: Magnitude,
    pub r_a: Magnitude,
    /// Moments of `T_{a→0}`.
    pub to_root: MomentReport,
    /// Moments of `T_{0→a}`.
    pub from_root: MomentReport,
    /// `sup_x E[T_{x→0}]` over all nodes.
    pub sup_mean_to_root: Magnitude,
    /// `E[T_{a→0}] / (E[T_{a→0}] + E[T_{0→a}])`.
    pub gamma_a: f64,
    /// `K_a² / E[T_{a→0}]`.
    pub cutoff_ratio: f64,
    /// `sup_x E[T_{x→0}] / E[T_{a→0}]`.
    pub sup_ratio: f64,
    /// `K'_a² / E[T_{a→0}]`.
    pub kp_ratio: f64,
    /// `2 Q_a / E[T_{a→0}]`, an upper bound on `Var(T_{a→0}/E[T_{a→0}])`.
    pub var_ratio_bound: f64,
    /// `Var(T_{a→0}) / E[T_{a→0}]²`.
    pub var_ratio: f64,
    /// `R_a / E[T_{a→0}]`.
    pub escape_ratio: f64,
    /// `E[T_{a→0}] / E[T_{0→a}]`.
    pub time_scale_ratio: f64,
}

impl DriftReport {
    pub fn compute(
        h: &HittingTimes<'_>,
        spec: &ChainSpec,
        a: NodeId,
    ) -> Result<DriftReport, DriftError> {
        let tree = h.tree();
        tree.check_node(a)
            .map_err(|_| HittingError::NodeOutOfRange {
                node: a,
                node_count: tree.node_count(),
            })?;
        if a == ROOT {
            return Err(DriftError::RootTarget);
        }
        let path = tree.root_path(a);
        let depth = path.len();
        let alpha = path.alpha().expect("non-root target has a path");
        let branch = tree.branch(alpha);

        let min_mu = |nodes: &mut dyn Iterator<Item = NodeId>| {
            nodes.map(|b| spec.mu[b]).fold(f64::INFINITY, f64::min)
        };
        let k_mu = min_mu(&mut branch.iter().copied());
        let kp_mu = min_mu(&mut (1..tree.node_count()));

        let max_mag = |nodes: &mut dyn Iterator<Item = Magnitude>| {
            nodes.fold(Magnitude::ZERO, |m, v| if v > m { v } else { m })
        };
        let k_a = max_mag(&mut branch.iter().map(|&b| h.branch_ratio(b)));
        let k_a_via_mean =
            max_mag(&mut branch.iter().map(|&b| h.mean_up_edge(b).scale(spec.mu[b])));
        let kp_a = max_mag(&mut (1..tree.node_count()).map(|b| h.branch_ratio(b)));

        let q_a = max_mag(&mut path.nodes().iter().map(|&x| h.branch_square_ratio(x)));
        let r_a = path
            .nodes()
            .iter()
            .map(|&b| h.node_square_term(b))
            .collect::<MagnitudeSum>()
            .total();

        let to_root = h.hitting_moments(a, 0, depth)?;
        let from_root = h.hitting_moments(a, depth, 0)?;
        let up = to_root.mean;
        let sup_mean_to_root = max_mag(&mut h.mean_to_root_all().iter().copied());

        let ratio = |num: Magnitude| num.div(up).value();
        Ok(DriftReport {
            target: a,
            depth,
            k_mu,
            kp_mu,
            k_a,
            k_a_via_mean,
            kp_a,
            q_a,
            r_a,
            to_root,
            from_root,
            sup_mean_to_root,
            gamma_a: up.div(up.add(from_root.mean)).value(),
            cutoff_ratio: ratio(k_a.square()),
            sup_ratio: ratio(sup_mean_to_root),
            kp_ratio: ratio(kp_a.square()),
            var_ratio_bound: ratio(q_a.scale(2.0)),
            var_ratio: to_root.variance.div(up.square()).value(),
            escape_ratio: ratio(r_a),
            time_scale_ratio: up.div(from_root.mean).value(),
        })
    }
}

/// Convenience wrapper building the hitting tables on the fly.
pub fn drift_report(
    tree: &Tree,
    spec: &ChainSpec,
    measure: &StationaryMeasure,
    a: NodeId,
) -> Result<DriftReport, DriftError> {
    let h = HittingTimes::new(tree, spec, measure);
    DriftReport::compute(&h, spec, a)
}

/// Upper bound on `E[T²_{a_n→a_j}]` for `j < n`:
/// `E[T_{a_n→a_j}] (2 (K'_a²/K'_μ + E[T_{0→a_j}]) − 1)`.
pub fn second_moment_bound(
    h: &HittingTimes<'_>,
    a: NodeId,
    j: usize,
    n: usize,
    drift: &DriftReport,
) -> Result<Magnitude, DriftError> {
    if j >= n {
        return Err(DriftError::BoundIndices { j, n });
    }
    let depth = h.tree().depth(a);
    let descent = h.mean_hitting(a, n, j)?;
    let from_root = h.mean_hitting(a, depth, j)?;
    let inner = drift
        .kp_a
        .square()
        .div(Magnitude::new(drift.kp_mu))
        .add(from_root)
        .scale(2.0)
        .saturating_sub(Magnitude::ONE);
    Ok(descent.mul(inner))
}

/// `L(a)`: nodes `b` of the branch containing `a` whose mean time to the root
/// is at least `c · E[T_{a→0}]`.
///
/// Means that agree to twelve digits are treated as equal so that nodes
/// symmetric to `a` are not lost to rounding.
pub fn l_set(h: &HittingTimes<'_>, a: NodeId, c: f64) -> Result<Vec<NodeId>, DriftError> {
    if !(c > 0.0) {
        return Err(DriftError::BadConstant(c));
    }
    if a == ROOT {
        return Err(DriftError::RootTarget);
    }
    let tree = h.tree();
    let alpha = tree.root_path(a).alpha().expect("non-root target");
    let means = h.mean_to_root_all();
    let threshold = means[a].scale(c * (1.0 - 1e-12));
    let mut out: Vec<NodeId> = tree
        .branch(alpha)
        .iter()
        .copied()
        .filter(|&b| means[b] >= threshold)
        .collect();
    out.sort_unstable();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Drift trend and every escape hypothesis hold.
    Both,
    /// Drift trend holds, some escape hypothesis fails.
    CutoffSupported,
    /// The drift ratio is still decreasing but above threshold, while the
    /// time-scale separation and the escape hypotheses already hold.
    EscapeSupported,
    /// The drift ratio neither vanishes nor diverges over the sampled depths.
    Inconclusive,
    /// The drift ratio grows: no strong drift.
    Neither,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Both => "both",
            Verdict::CutoffSupported => "cutoff-supported",
            Verdict::EscapeSupported => "escape-supported",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Neither => "neither",
        }
    }
}

/// Caller-supplied constants for the escape hypotheses; `None` means
/// estimate from the family.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TheoremBounds {
    /// `K`: bound on `sup_x E[T_{x→0}]/E[T_{a→0}]`.
    pub sup_ratio: Option<f64>,
    /// `K'`: bound on `K'_a²/E[T_{a→0}]`.
    pub kp_ratio: Option<f64>,
    /// `K'_μ`: lower bound on `inf μ` over the whole tree.
    pub kp_mu: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictOptions {
    /// A ratio sequence "vanishes" when its last value is below this.
    pub threshold: f64,
    /// Number of trailing samples that must be strictly decreasing.
    pub window: usize,
    /// Constant `C` of `L(a)`.
    pub c_ref: f64,
    pub bounds: TheoremBounds,
    /// Auto-estimated bounds allow this factor of drift from the smallest
    /// depth; a drift ratio growing by this factor counts as diverging.
    pub growth_slack: f64,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        VerdictOptions {
            threshold: 0.1,
            window: 3,
            c_ref: 1.0,
            bounds: TheoremBounds::default(),
            growth_slack: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trend {
    pub first: f64,
    pub last: f64,
    /// Strictly decreasing over the trailing window.
    pub decreasing: bool,
    /// Decreasing and below threshold at the last depth.
    pub vanishing: bool,
    /// Non-decreasing over the window and grown by the slack factor overall.
    pub diverging: bool,
}

impl Trend {
    fn of(values: &[f64], opts: &VerdictOptions) -> Trend {
        let first = values[0];
        let last = values[values.len() - 1];
        let tail = &values[values.len().saturating_sub(opts.window.max(2))..];
        let decreasing = tail.windows(2).all(|w| w[1] < w[0]);
        let non_decreasing = tail.windows(2).all(|w| w[1] >= w[0]);
        Trend {
            first,
            last,
            decreasing,
            vanishing: decreasing && last < opts.threshold,
            diverging: non_decreasing && last >= opts.growth_slack * first,
        }
    }
}

/// Which escape hypotheses held at every sampled depth, with the bounds used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremCheck {
    pub sup_ratio_bound: f64,
    pub kp_ratio_bound: f64,
    pub kp_mu_bound: f64,
    pub sup_ratio_ok: bool,
    pub kp_ratio_ok: bool,
    pub kp_mu_ok: bool,
}

impl TheoremCheck {
    pub fn holds(&self) -> bool {
        self.sup_ratio_ok && self.kp_ratio_ok && self.kp_mu_ok
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyVerdict {
    pub depths: Vec<usize>,
    pub reports: Vec<DriftReport>,
    pub cutoff_trend: Trend,
    pub escape_trend: Trend,
    pub theorem: TheoremCheck,
    /// `L(a)` per depth for the reference constant.
    pub l_sets: Vec<Vec<NodeId>>,
    pub verdict: Verdict,
}

/// One chain of a family together with its designated target.
#[derive(Debug, Clone, Copy)]
pub struct FamilyMember<'a> {
    pub tree: &'a Tree,
    pub spec: &'a ChainSpec,
    pub target: NodeId,
}

/// Drift reports across a family, reduced to trends and a verdict.
pub fn family_verdict(
    members: &[FamilyMember<'_>],
    opts: &VerdictOptions,
    exec: Execution,
) -> Result<FamilyVerdict, DriftError> {
    if members.len() < 3 {
        return Err(DriftError::TooFewDepths(members.len()));
    }
    if !(opts.c_ref > 0.0) {
        return Err(DriftError::BadConstant(opts.c_ref));
    }
    let depths: Vec<usize> = members.iter().map(|m| m.tree.depth(m.target)).collect();
    for w in depths.windows(2) {
        if w[1] <= w[0] {
            return Err(DriftError::DepthsNotIncreasing {
                prev: w[0],
                next: w[1],
            });
        }
    }

    let per_depth = map_indices(exec, members.len(), |i| {
        let m = &members[i];
        let measure = StationaryMeasure::compute(m.tree, m.spec);
        let h = HittingTimes::new(m.tree, m.spec, &measure);
        let report = DriftReport::compute(&h, m.spec, m.target)?;
        let l = l_set(&h, m.target, opts.c_ref)?;
        Ok::<_, DriftError>((report, l))
    });
    let mut reports = Vec::with_capacity(members.len());
    let mut l_sets = Vec::with_capacity(members.len());
    for r in per_depth {
        let (report, l) = r?;
        reports.push(report);
        l_sets.push(l);
    }

    Ok(assess(depths, reports, l_sets, opts))
}

fn assess(
    depths: Vec<usize>,
    reports: Vec<DriftReport>,
    l_sets: Vec<Vec<NodeId>>,
    opts: &VerdictOptions,
) -> FamilyVerdict {
    let series = |f: fn(&DriftReport) -> f64| reports.iter().map(f).collect::<Vec<f64>>();
    let cutoff = series(|r| r.cutoff_ratio);
    let escape = series(|r| r.escape_ratio);
    let sup = series(|r| r.sup_ratio);
    let kp = series(|r| r.kp_ratio);
    let kp_mu = series(|r| r.kp_mu);

    let slack = opts.growth_slack;
    let sup_bound = opts.bounds.sup_ratio.unwrap_or(slack * sup[0]);
    let kp_bound = opts.bounds.kp_ratio.unwrap_or(slack * kp[0]);
    let kp_mu_bound = opts.bounds.kp_mu.unwrap_or(kp_mu[0] / slack);
    let theorem = TheoremCheck {
        sup_ratio_bound: sup_bound,
        kp_ratio_bound: kp_bound,
        kp_mu_bound,
        sup_ratio_ok: sup.iter().all(|&v| v <= sup_bound),
        kp_ratio_ok: kp.iter().all(|&v| v <= kp_bound),
        kp_mu_ok: kp_mu.iter().all(|&v| v >= kp_mu_bound && v > 0.0),
    };

    let cutoff_trend = Trend::of(&cutoff, opts);
    let escape_trend = Trend::of(&escape, opts);
    let verdict = if cutoff_trend.vanishing {
        if theorem.holds() {
            Verdict::Both
        } else {
            Verdict::CutoffSupported
        }
    } else if cutoff_trend.decreasing && escape_trend.vanishing && theorem.holds() {
        Verdict::EscapeSupported
    } else if cutoff_trend.diverging {
        Verdict::Neither
    } else {
        Verdict::Inconclusive
    };

    FamilyVerdict {
        depths,
        reports,
        cutoff_trend,
        escape_trend,
        theorem,
        l_sets,
        verdict,
    }
}
