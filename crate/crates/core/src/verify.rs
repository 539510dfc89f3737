//! Cross-checks of the closed forms against the linear oracle and the
//! inequalities linking the drift constants.

use crate::chain::{ChainSpec, StationaryMeasure};
use crate::corpus::Instance;
use crate::drift::{second_moment_bound, DriftReport};
use crate::exec::{map_indices, Execution};
use crate::hitting::HittingTimes;
use crate::numeric::{rel_err, Magnitude, MagnitudeSum};
use crate::oracle::solve_hitting;
use crate::tree::{NodeId, Tree};

/// Closed forms against the oracle, relative.
pub const ORACLE_TOLERANCE: f64 = 1e-9;
/// Two-way sum identity, relative.
pub const SUM_TOLERANCE: f64 = 1e-10;
/// Rounding slack allowed on each inequality, relative to its right side.
pub const INEQUALITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    OracleMean,
    OracleSecond,
    SumIdentity,
    RBelowQ,
    QBelowK,
    VarianceBound,
    GammaBound,
    SecondMomentBound,
}

impl Check {
    pub const ALL: [Check; 8] = [
        Check::OracleMean,
        Check::OracleSecond,
        Check::SumIdentity,
        Check::RBelowQ,
        Check::QBelowK,
        Check::VarianceBound,
        Check::GammaBound,
        Check::SecondMomentBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::OracleMean => "oracle_mean",
            Check::OracleSecond => "oracle_second",
            Check::SumIdentity => "sum_identity",
            Check::RBelowQ => "r_le_q",
            Check::QBelowK => "q_le_k2_over_kmu",
            Check::VarianceBound => "variance_bound",
            Check::GammaBound => "gamma_le_r_over_e",
            Check::SecondMomentBound => "second_moment_bound",
        }
    }

    /// Errors are relative differences, inequalities report `lhs/rhs`.
    pub fn is_equality(self) -> bool {
        matches!(
            self,
            Check::OracleMean | Check::OracleSecond | Check::SumIdentity
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tally {
    pub check: Check,
    pub checked: usize,
    pub violations: usize,
    /// Largest relative error, or largest `lhs/rhs`.
    pub worst: f64,
}

impl Tally {
    fn new(check: Check) -> Self {
        Tally {
            check,
            checked: 0,
            violations: 0,
            worst: 0.0,
        }
    }

    fn equal(&mut self, err: f64, tol: f64) {
        self.checked += 1;
        self.worst = self.worst.max(err);
        if !(err <= tol) {
            self.violations += 1;
        }
    }

    fn at_most(&mut self, lhs: Magnitude, rhs: Magnitude) {
        self.checked += 1;
        let ratio = if rhs.is_zero() {
            if lhs.is_zero() {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            lhs.div(rhs).value()
        };
        self.worst = self.worst.max(ratio);
        if !(ratio <= 1.0 + INEQUALITY_SLACK) {
            self.violations += 1;
        }
    }

    fn fail(&mut self) {
        self.checked += 1;
        self.violations += 1;
        self.worst = f64::INFINITY;
    }

    fn merge(&mut self, other: &Tally) {
        self.checked += other.checked;
        self.violations += other.violations;
        self.worst = self.worst.max(other.worst);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySummary {
    pub instances: usize,
    pub tallies: Vec<Tally>,
    /// Problems that stopped an instance from being checked at all.
    pub errors: Vec<String>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.errors.is_empty() && self.tallies.iter().all(|t| t.violations == 0)
    }

    pub fn tally(&self, check: Check) -> &Tally {
        self.tallies
            .iter()
            .find(|t| t.check == check)
            .expect("every check has a tally")
    }
}

fn cmp_mag(closed: Magnitude, oracle: f64) -> f64 {
    if closed.is_reportable() {
        rel_err(closed.value(), oracle)
    } else {
        f64::INFINITY
    }
}

/// Every check along the root path of `a`.
pub fn verify_instance(tree: &Tree, spec: &ChainSpec, a: NodeId) -> Result<Vec<Tally>, String> {
    let measure = StationaryMeasure::compute(tree, spec);
    let h = HittingTimes::new(tree, spec, &measure);
    let drift = DriftReport::compute(&h, spec, a).map_err(|e| e.to_string())?;
    let mut t: Vec<Tally> = Check::ALL.iter().map(|&c| Tally::new(c)).collect();
    let idx = |c: Check| Check::ALL.iter().position(|&x| x == c).unwrap();
    let path = tree.root_path(a);
    let d = path.len();
    let node = |k: usize| path.ancestor(k).expect("index within depth");

    for n in 0..=d {
        let sol = solve_hitting(tree, spec, node(n)).ok();
        for j in 0..=d {
            if j == n {
                continue;
            }
            let m = h.hitting_moments(a, j, n).map_err(|e| e.to_string())?;
            match &sol {
                Some(sol) => {
                    let x = node(j);
                    t[idx(Check::OracleMean)].equal(cmp_mag(m.mean, sol.mean[x]), ORACLE_TOLERANCE);
                    t[idx(Check::OracleSecond)]
                        .equal(cmp_mag(m.second, sol.second[x]), ORACLE_TOLERANCE);
                }
                None => {
                    t[idx(Check::OracleMean)].fail();
                    t[idx(Check::OracleSecond)].fail();
                }
            }
            if j < n {
                let back = h.mean_hitting(a, n, j).map_err(|e| e.to_string())?;
                let commute: MagnitudeSum = (j..n).map(|k| h.commute_edge(node(k))).collect();
                let commute = commute.total();
                t[idx(Check::SumIdentity)].equal(m.mean.add(back).rel_diff(commute), SUM_TOLERANCE);

                let down = h.hitting_moments(a, n, j).map_err(|e| e.to_string())?;
                let bound = second_moment_bound(&h, a, j, n, &drift).map_err(|e| e.to_string())?;
                t[idx(Check::SecondMomentBound)].at_most(down.second, bound);
            }
        }
    }

    let up = drift.to_root.mean;
    let k_bound = drift.k_a.square().div(Magnitude::new(drift.k_mu));
    t[idx(Check::RBelowQ)].at_most(drift.r_a, drift.q_a);
    t[idx(Check::QBelowK)].at_most(drift.q_a, k_bound);
    t[idx(Check::VarianceBound)].at_most(drift.to_root.variance, drift.q_a.mul(up).scale(2.0));
    t[idx(Check::GammaBound)].at_most(Magnitude::new(drift.gamma_a), drift.r_a.div(up));
    Ok(t)
}

/// [`verify_instance`] over a whole corpus, instances in parallel.
pub fn verify_corpus(instances: &[Instance], exec: Execution) -> VerifySummary {
    let results = map_indices(exec, instances.len(), |i| {
        let inst = &instances[i];
        verify_instance(&inst.tree, &inst.spec, inst.target)
    });
    let mut tallies: Vec<Tally> = Check::ALL.iter().map(|&c| Tally::new(c)).collect();
    let mut errors = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(ts) => {
                for (acc, t) in tallies.iter_mut().zip(&ts) {
                    acc.merge(t);
                }
            }
            Err(e) => errors.push(format!("instance {i}: {e}")),
        }
    }
    VerifySummary {
        instances: instances.len(),
        tallies,
        errors,
    }
}
