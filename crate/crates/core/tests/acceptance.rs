//! Acceptance checks, one PASS/FAIL line each. Runs without the libtest
//! harness so the report prints in order; exits non-zero on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bdtree::chain::{ChainSpec, StationaryMeasure};
use bdtree::cli;
use bdtree::corpus::corpus;
use bdtree::drift::DriftReport;
use bdtree::exec::Execution;
use bdtree::hitting::HittingTimes;
use bdtree::numeric::rel_err;
use bdtree::regular::{closed_forms, generate, RegularSpec};
use bdtree::sim::{simulate_final_excursion, simulate_hitting, simulate_return, SimConfig};
use bdtree::stats::ks_critical;
use bdtree::tree::Tree;
use bdtree::verify::{verify_corpus, Check, VerifySummary};

const CORPUS_SEED: u64 = 20_240_601;
const CORPUS_SIZE: usize = 200;
const CORPUS_MAX_NODES: usize = 50;

const ORACLE_REL_TOL: f64 = 1e-9;
const SUM_REL_TOL: f64 = 1e-10;
const CLOSED_FORM_REL_TOL: f64 = 1e-10;
/// Rounding slack on `lhs <= rhs` comparisons, as `lhs/rhs <= 1 + slack`.
const INEQUALITY_SLACK: f64 = 1e-9;

const MC_REPLICAS: usize = 100_000;
const MC_MAX_Z: f64 = 4.0;
const KAC_REPLICAS: usize = 100_000;
const KAC_EXACT_REL_TOL: f64 = 0.05;
const KAC_ASYMPTOTIC_REL_TOL: f64 = 0.10;
const SHAPE_REPLICAS: usize = 2000;
const KS_ALPHA: f64 = 0.01;

const LIMIT_ORACLE: Duration = Duration::from_secs(10);
const LIMIT_MC: Duration = Duration::from_secs(5);
const LIMIT_KAC: Duration = Duration::from_secs(60);
const LIMIT_ESCAPE: Duration = Duration::from_secs(300);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

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

fn regular(r: usize, bias: f64, depth: usize) -> (RegularSpec, Tree, ChainSpec) {
    let s = RegularSpec::new(r, bias, depth).unwrap();
    let (t, c) = generate(&s).unwrap();
    (s, t, c)
}

fn within(limit: Duration, elapsed: Duration) -> bool {
    elapsed <= limit
}

fn oracle_equivalence(summary: &VerifySummary, elapsed: Duration) -> Outcome {
    let m = summary.tally(Check::OracleMean);
    let s = summary.tally(Check::OracleSecond);
    let pass = summary.errors.is_empty()
        && m.violations == 0
        && s.violations == 0
        && m.worst <= ORACLE_REL_TOL
        && s.worst <= ORACLE_REL_TOL
        && m.checked > 0
        && within(LIMIT_ORACLE, elapsed);
    outcome(
        pass,
        format!(
            "{} instances, {} pairs, worst rel err mean {:.2e} second {:.2e}, {:.2?}",
            summary.instances, m.checked, m.worst, s.worst, elapsed
        ),
    )
}

fn sum_identity(summary: &VerifySummary) -> Outcome {
    let t = summary.tally(Check::SumIdentity);
    outcome(
        t.violations == 0 && t.worst <= SUM_REL_TOL && t.checked > 0,
        format!("{} pairs, worst rel err {:.2e}", t.checked, t.worst),
    )
}

fn regular_closed_forms() -> Outcome {
    let pipeline = |r: usize, bias: f64, d: usize| {
        let (s, t, c) = regular(r, bias, d);
        let m = StationaryMeasure::compute(&t, &c);
        let h = HittingTimes::new(&t, &c, &m);
        let rep = DriftReport::compute(&h, &c, s.deepest()).unwrap();
        (rep.k_a.value(), rep.to_root.mean.value())
    };
    let mut notes = Vec::new();
    let mut pass = true;
    for (r, bias, d, k_want, e_want) in [(2, 4.0, 3, 1.75, 6.375), (2, 2.0, 4, 4.0, 20.0)] {
        let (k, e) = pipeline(r, bias, d);
        let ok =
            rel_err(k, k_want) <= CLOSED_FORM_REL_TOL && rel_err(e, e_want) <= CLOSED_FORM_REL_TOL;
        pass &= ok;
        notes.push(format!("r={r} lambda={bias} d={d}: K_a={k} E={e}"));
    }
    let limit = 4.0 / (4.0 - 2.0);
    let mut prev = 0.0;
    for d in 4..=16 {
        let (k, _) = pipeline(2, 4.0, d);
        let f = closed_forms(&RegularSpec::new(2, 4.0, d).unwrap());
        pass &= k > prev && k < limit && rel_err(k, f.k_a) <= CLOSED_FORM_REL_TOL;
        prev = k;
    }
    notes.push(format!("K_a(4..16) increasing to {prev} < {limit}"));
    outcome(pass, notes.join("; "))
}

fn inequality_suite(summary: &VerifySummary) -> Outcome {
    let checks = [
        Check::RBelowQ,
        Check::QBelowK,
        Check::VarianceBound,
        Check::GammaBound,
        Check::SecondMomentBound,
    ];
    let mut pass = summary.errors.is_empty();
    let mut notes = Vec::new();
    for c in checks {
        let t = summary.tally(c);
        pass &= t.violations == 0 && t.worst <= 1.0 + INEQUALITY_SLACK && t.checked > 0;
        notes.push(format!(
            "{} {}/{} max lhs/rhs {:.6}",
            c.name(),
            t.violations,
            t.checked,
            t.worst
        ));
    }
    outcome(pass, notes.join("; "))
}

fn monte_carlo_agreement(exec: Execution) -> Outcome {
    let start = Instant::now();
    let cfg = SimConfig::new(11, MC_REPLICAS);
    let (t, s) = two_node();
    let a = simulate_hitting(&t, &s, 1, 0, &cfg, exec).unwrap();
    let (t, s) = path3();
    let b = simulate_hitting(&t, &s, 2, 0, &cfg, exec).unwrap();
    let elapsed = start.elapsed();
    let (za, zb) = (a.z_score().unwrap(), b.z_score().unwrap());
    let pass = a.exact_mean == Some(2.0)
        && (b.exact_mean.unwrap() - 6.0).abs() < 1e-12
        && za.abs() <= MC_MAX_Z
        && zb.abs() <= MC_MAX_Z
        && a.truncated == 0
        && b.truncated == 0
        && within(LIMIT_MC, elapsed);
    outcome(
        pass,
        format!(
            "two-node mean {:.5} (z {za:.2}), path mean {:.5} (z {zb:.2}), {elapsed:.2?}",
            a.mean, b.mean
        ),
    )
}

fn kac(exec: Execution) -> Outcome {
    let start = Instant::now();
    let (s, t, c) = regular(2, 4.0, 8);
    let f = closed_forms(&s);
    let sum = simulate_return(&t, &c, 0, &SimConfig::new(12, KAC_REPLICAS), exec).unwrap();
    let elapsed = start.elapsed();
    let asym = f.return_root_asymptotic.unwrap();
    let exact = sum.exact_mean.unwrap();
    let pass = rel_err(sum.mean, exact) <= KAC_EXACT_REL_TOL
        && rel_err(exact, f.return_root) <= CLOSED_FORM_REL_TOL
        && rel_err(sum.mean, asym) <= KAC_ASYMPTOTIC_REL_TOL
        && sum.truncated == 0
        && within(LIMIT_KAC, elapsed);
    outcome(
        pass,
        format!(
            "mean return {:.5}, 1/pi(0) = {exact:.5}, asymptotic {asym}, {elapsed:.2?}",
            sum.mean
        ),
    )
}

fn cutoff_shape(exec: Execution) -> Outcome {
    let mut widths = Vec::new();
    for d in [6, 10, 14] {
        let (s, t, c) = regular(2, 4.0, d);
        let sum = simulate_hitting(
            &t,
            &c,
            s.deepest(),
            0,
            &SimConfig::new(13, SHAPE_REPLICAS),
            exec,
        )
        .unwrap();
        let p = |x: f64| {
            sum.cutoff_profile
                .iter()
                .find(|(cc, _)| *cc == x)
                .map(|&(_, p)| p)
                .unwrap()
        };
        widths.push(p(0.8) - p(1.2));
    }
    let pass = widths.windows(2).all(|w| w[1] > w[0]);
    outcome(
        pass,
        format!(
            "P(T > 0.8E) - P(T > 1.2E) at d = 6, 10, 14: {:.4}, {:.4}, {:.4}",
            widths[0], widths[1], widths[2]
        ),
    )
}

fn escape_shape(exec: Execution) -> Outcome {
    let start = Instant::now();
    let (s, t, c) = regular(2, 4.0, 8);
    let sum = simulate_hitting(
        &t,
        &c,
        0,
        s.deepest(),
        &SimConfig::new(14, SHAPE_REPLICAS),
        exec,
    )
    .unwrap();
    let elapsed = start.elapsed();
    let crit = ks_critical(KS_ALPHA, sum.n);
    let pass = sum.truncated == 0 && sum.ks_exp1 < crit && within(LIMIT_ESCAPE, elapsed);
    outcome(
        pass,
        format!("KS to Exp(1) {:.4} < {crit:.4}, {elapsed:.2?}", sum.ks_exp1),
    )
}

fn time_reversal(exec: Execution) -> Outcome {
    let (s, t, c) = regular(2, 4.0, 6);
    let e = simulate_final_excursion(
        &t,
        &c,
        s.deepest(),
        &SimConfig::new(15, SHAPE_REPLICAS),
        exec,
    )
    .unwrap();
    let pass = e.truncated_up == 0 && e.truncated_down == 0 && e.ks < e.critical;
    outcome(
        pass,
        format!(
            "two-sample KS {:.4} < {:.4} ({} + {} samples)",
            e.ks,
            e.critical,
            e.up.len(),
            e.down.len()
        ),
    )
}

fn determinism() -> Outcome {
    let commands: [&[&str]; 4] = [
        &[
            "simulate",
            "--regular",
            "2",
            "4",
            "6",
            "--replicas",
            "3000",
            "--seed",
            "16",
        ],
        &[
            "simulate",
            "--regular",
            "2",
            "4",
            "5",
            "--mode",
            "excursion",
            "--replicas",
            "500",
            "--seed",
            "16",
        ],
        &["family", "--regular", "2", "4", "4", "12", "4"],
        &["verify", "--random", "30", "16"],
    ];
    let mut pass = true;
    for cmd in commands {
        let reports: Vec<String> = [
            vec!["--threads", "1"],
            vec!["--threads", "3"],
            vec!["--sequential"],
        ]
        .into_iter()
        .map(|flags| {
            let mut args = vec!["bdtree"];
            args.extend(flags);
            args.extend_from_slice(cmd);
            cli::run(args)
                .map(|o| o.stdout)
                .unwrap_or_else(|e| e.message)
        })
        .collect();
        pass &= reports.windows(2).all(|w| w[0] == w[1]) && !reports[0].is_empty();
    }
    outcome(
        pass,
        format!(
            "{} commands x 3 thread settings byte-identical",
            commands.len()
        ),
    )
}

fn main() -> ExitCode {
    let exec = Execution::Parallel;
    let start = Instant::now();
    let summary = verify_corpus(&corpus(CORPUS_SEED, CORPUS_SIZE, CORPUS_MAX_NODES), exec);
    let corpus_time = start.elapsed();

    let results = [
        (
            "oracle equivalence",
            oracle_equivalence(&summary, corpus_time),
        ),
        ("sum identity", sum_identity(&summary)),
        ("regular-tree closed forms", regular_closed_forms()),
        ("inequality suite", inequality_suite(&summary)),
        ("Monte Carlo agreement", monte_carlo_agreement(exec)),
        ("Kac return time", kac(exec)),
        ("cut-off shape", cutoff_shape(exec)),
        ("escape shape", escape_shape(exec)),
        ("time reversal", time_reversal(exec)),
        ("determinism", determinism()),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name}: {}", i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
