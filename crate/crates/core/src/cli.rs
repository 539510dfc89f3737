//! Command-line front end. Every command writes a TSV report whose
//! sections start with `# name` lines.

use std::ffi::OsString;
use std::fmt::{Display, Write as _};
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chain::{ChainSpec, StationaryMeasure};
use crate::chainfile::{emit, parse};
use crate::corpus::{corpus, random_instance, Instance};
use crate::drift::{
    family_verdict, l_set, DriftReport, FamilyMember, TheoremBounds, Trend, VerdictOptions,
};
use crate::exec::{with_threads, Execution, THREADS_ENV};
use crate::hitting::HittingTimes;
use crate::numeric::{fmt_real, rel_err};
use crate::regular::{closed_forms, generate, RegularSpec};
use crate::sim::{
    simulate_final_excursion, simulate_hitting, simulate_return, EmpiricalSummary, SimConfig,
    SimError,
};
use crate::tree::{NodeId, Tree, ROOT};
use crate::verify::{verify_corpus, Check, INEQUALITY_SLACK, ORACLE_TOLERANCE, SUM_TOLERANCE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn input(message: impl Into<String>) -> CliError {
    CliError {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

/// Report text and exit status of a finished command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub code: i32,
}

#[derive(Debug, Parser)]
#[command(
    name = "bdtree",
    version,
    about = "Hitting times and drift diagnostics for walks on rooted trees"
)]
struct Cli {
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Invariant measure, exact moments and drift constants for one target.
    Analyze(AnalyzeArgs),
    /// Closed forms against the linear oracle, plus the moment inequalities.
    Verify(VerifyArgs),
    /// Monte Carlo hitting, return or final-excursion times.
    Simulate(SimulateArgs),
    /// Drift trends and verdict across a family of growing trees.
    Family(FamilyArgs),
    /// Write a chain file to standard output.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("chain").required(true).args(["file", "regular"])))]
struct ChainArgs {
    /// Chain file.
    file: Option<PathBuf>,
    /// Regular tree instead of a file.
    #[arg(long, num_args = 3, value_names = ["R", "LAMBDA", "DEPTH"])]
    regular: Option<Vec<String>>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    chain: ChainArgs,
    /// Target node `a` (defaults to the deepest node).
    #[arg(long)]
    target: Option<NodeId>,
    /// Extra pair of path indices: moments of T from a_J to a_N.
    #[arg(long, num_args = 2, value_names = ["J", "N"], action = clap::ArgAction::Append)]
    pair: Vec<usize>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["file", "random"])))]
struct VerifyArgs {
    file: Option<PathBuf>,
    /// Check COUNT seeded random chains instead of a file.
    #[arg(long, num_args = 2, value_names = ["COUNT", "SEED"])]
    random: Option<Vec<u64>>,
    /// Largest random tree.
    #[arg(long, default_value_t = 50)]
    max_nodes: usize,
    /// Target for a file (defaults to the deepest node).
    #[arg(long)]
    target: Option<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// T from --source to --target.
    Hitting,
    /// Return time to --source.
    Return,
    /// Final excursions between the root and --target.
    Excursion,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long, value_enum, default_value_t = Mode::Hitting)]
    mode: Mode,
    /// Start node (hitting: deepest node, return: root).
    #[arg(long)]
    source: Option<NodeId>,
    /// End node (hitting: root, excursion: deepest node).
    #[arg(long)]
    target: Option<NodeId>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    replicas: usize,
    /// Per-replica step cap (defaults to 1000 times the exact mean).
    #[arg(long)]
    max_steps: Option<u64>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("members").required(true).args(["regular", "files"])))]
struct FamilyArgs {
    /// Regular trees of depths DMIN, DMIN+DSTEP, ..., DMAX.
    #[arg(long, num_args = 5, value_names = ["R", "LAMBDA", "DMIN", "DMAX", "DSTEP"])]
    regular: Option<Vec<String>>,
    /// Chain files in order of increasing target depth.
    #[arg(long, num_args = 1..)]
    files: Vec<PathBuf>,
    /// One target per file (defaults to each deepest node).
    #[arg(long, num_args = 1..)]
    targets: Vec<NodeId>,
    /// A ratio vanishes when its last value drops below this.
    #[arg(long, default_value_t = 0.1)]
    threshold: f64,
    /// Trailing depths that must decrease.
    #[arg(long, default_value_t = 3)]
    window: usize,
    /// Constant C of the set L(a).
    #[arg(long, default_value_t = 1.0)]
    c_ref: f64,
    /// Allowed growth of auto-estimated bounds.
    #[arg(long, default_value_t = 2.0)]
    slack: f64,
    /// Bound K on sup_x E[T_x->0] / E[T_a->0].
    #[arg(long)]
    bound_k: Option<f64>,
    /// Bound K' on K'_a^2 / E[T_a->0].
    #[arg(long)]
    bound_kp: Option<f64>,
    /// Lower bound on K'_mu.
    #[arg(long)]
    bound_kp_mu: Option<f64>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("kind").required(true).args(["regular", "random"])))]
struct GenerateArgs {
    #[arg(long, num_args = 3, value_names = ["R", "LAMBDA", "DEPTH"])]
    regular: Option<Vec<String>>,
    #[arg(long, num_args = 2, value_names = ["SEED", "MAX_NODES"])]
    random: Option<Vec<u64>>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Result<Output, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            return Ok(Output {
                stdout: e.to_string(),
                code: EXIT_OK,
            })
        }
        Err(e) => return Err(usage(e.to_string())),
    };
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    if cli.threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    with_threads(cli.threads, || match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Verify(a) => verify(a, exec),
        Command::Simulate(a) => simulate(a, exec),
        Command::Family(a) => family(a, exec),
        Command::Generate(a) => generate_cmd(a),
    })
}

struct Report(String);

impl Report {
    fn new() -> Self {
        Report(String::new())
    }

    fn section(&mut self, name: &str) {
        writeln!(self.0, "# {name}").unwrap();
    }

    fn row(&mut self, cells: &[&dyn Display]) {
        let line: Vec<String> = cells.iter().map(|c| c.to_string()).collect();
        writeln!(self.0, "{}", line.join("\t")).unwrap();
    }

    fn done(self, code: i32) -> Result<Output, CliError> {
        Ok(Output {
            stdout: self.0,
            code,
        })
    }
}

/// Plain reals in shortest round-trip form.
struct R(f64);

impl Display for R {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&fmt_real(self.0))
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_real).unwrap_or_else(|| "-".into())
}

fn parse_num<T: std::str::FromStr>(name: &str, token: &str) -> Result<T, CliError> {
    token
        .parse()
        .map_err(|_| usage(format!("{name}: cannot parse '{token}'")))
}

fn regular_spec(values: &[String]) -> Result<RegularSpec, CliError> {
    let r = parse_num::<usize>("R", &values[0])?;
    let bias = parse_num::<f64>("LAMBDA", &values[1])?;
    let depth = parse_num::<usize>("DEPTH", &values[2])?;
    RegularSpec::new(r, bias, depth).map_err(|e| usage(e.to_string()))
}

fn read_chain(path: &Path) -> Result<(Tree, ChainSpec), CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load(chain: &ChainArgs) -> Result<(Tree, ChainSpec), CliError> {
    match (&chain.file, &chain.regular) {
        (Some(path), _) => read_chain(path),
        (None, Some(values)) => generate(&regular_spec(values)?).map_err(|e| usage(e.to_string())),
        (None, None) => Err(usage("a chain file or --regular is required")),
    }
}

fn check_node(tree: &Tree, x: NodeId, what: &str) -> Result<NodeId, CliError> {
    if x < tree.node_count() {
        Ok(x)
    } else {
        Err(usage(format!(
            "{what} {x} is not a node of a {}-node tree",
            tree.node_count()
        )))
    }
}

fn non_root_target(tree: &Tree, target: Option<NodeId>) -> Result<NodeId, CliError> {
    let a = check_node(
        tree,
        target.unwrap_or_else(|| tree.deepest_node()),
        "target",
    )?;
    if a == ROOT {
        return Err(usage("the target must not be the root"));
    }
    Ok(a)
}

fn analyze(args: AnalyzeArgs) -> Result<Output, CliError> {
    let (tree, spec) = load(&args.chain)?;
    let a = non_root_target(&tree, args.target)?;
    let measure = StationaryMeasure::compute(&tree, &spec);
    let h = HittingTimes::new(&tree, &spec, &measure);
    let drift = DriftReport::compute(&h, &spec, a).map_err(|e| usage(e.to_string()))?;
    let path = tree.root_path(a);
    let d = path.len();

    let mut out = Report::new();
    out.section("chain");
    out.row(&[&"nodes", &tree.node_count()]);
    out.row(&[&"max_depth", &tree.max_depth()]);
    out.row(&[&"target", &a]);
    out.row(&[&"depth", &d]);
    out.row(&[&"pi0", &h.pi(ROOT)]);
    out.row(&[&"pi_target", &h.pi(a)]);
    out.row(&[&"branch_ratio_target", &h.branch_ratio(a)]);
    out.row(&[&"pi_underflow", &measure.underflow]);

    out.section("path");
    out.row(&[
        &"k",
        &"node",
        &"mu",
        &"lambda",
        &"kappa",
        &"pi",
        &"branch_ratio",
        &"mean_up",
        &"mean_down",
    ]);
    for (k, &x) in path.nodes().iter().enumerate() {
        out.row(&[
            &k,
            &x,
            &R(spec.mu[x]),
            &R(spec.lambda[x]),
            &R(spec.kappa[x]),
            &h.pi(x),
            &h.branch_ratio(x),
            &h.mean_up_edge(x),
            &h.mean_down_edge(x),
        ]);
    }

    out.section("moments");
    out.row(&[&"from", &"to", &"j", &"n", &"mean", &"second", &"variance"]);
    let mut pairs = vec![(0, d), (d, 0)];
    pairs.extend(args.pair.chunks(2).map(|p| (p[0], p[1])));
    for (j, n) in pairs {
        let m = h
            .hitting_moments(a, j, n)
            .map_err(|e| usage(e.to_string()))?;
        out.row(&[
            &m.source,
            &m.target,
            &j,
            &n,
            &m.mean,
            &m.second,
            &m.variance,
        ]);
    }

    let l = l_set(&h, a, 1.0).map_err(|e| usage(e.to_string()))?;
    drift_section(&mut out, &drift);
    out.row(&[&"l_set_size", &l.len()]);
    let listed: Vec<String> = l.iter().map(|x| x.to_string()).collect();
    out.row(&[&"l_set", &listed.join(",")]);
    out.done(EXIT_OK)
}

fn drift_section(out: &mut Report, r: &DriftReport) {
    out.section("drift");
    out.row(&[&"quantity", &"value"]);
    let rows: [(&str, &dyn Display); 21] = [
        ("k_mu", &R(r.k_mu)),
        ("kp_mu", &R(r.kp_mu)),
        ("k_a", &r.k_a),
        ("k_a_via_mean", &r.k_a_via_mean),
        ("kp_a", &r.kp_a),
        ("q_a", &r.q_a),
        ("r_a", &r.r_a),
        ("mean_to_root", &r.to_root.mean),
        ("second_to_root", &r.to_root.second),
        ("var_to_root", &r.to_root.variance),
        ("mean_from_root", &r.from_root.mean),
        ("second_from_root", &r.from_root.second),
        ("sup_mean_to_root", &r.sup_mean_to_root),
        ("gamma_a", &R(r.gamma_a)),
        ("cutoff_ratio", &R(r.cutoff_ratio)),
        ("sup_ratio", &R(r.sup_ratio)),
        ("kp_ratio", &R(r.kp_ratio)),
        ("var_ratio", &R(r.var_ratio)),
        ("var_ratio_bound", &R(r.var_ratio_bound)),
        ("escape_ratio", &R(r.escape_ratio)),
        ("time_scale_ratio", &R(r.time_scale_ratio)),
    ];
    for (k, v) in rows {
        out.row(&[&k, v]);
    }
}

fn verify(args: VerifyArgs, exec: Execution) -> Result<Output, CliError> {
    let instances: Vec<Instance> = match (&args.file, &args.random) {
        (Some(path), _) => {
            let (tree, spec) = read_chain(path)?;
            let target = non_root_target(&tree, args.target)?;
            vec![Instance { tree, spec, target }]
        }
        (None, Some(v)) => {
            if args.max_nodes < 2 {
                return Err(usage("--max-nodes must be at least 2"));
            }
            corpus(v[1], v[0] as usize, args.max_nodes)
        }
        (None, None) => return Err(usage("a chain file or --random is required")),
    };
    let summary = verify_corpus(&instances, exec);

    let mut out = Report::new();
    out.section("verify");
    out.row(&[&"instances", &summary.instances]);
    out.section("checks");
    out.row(&[
        &"check",
        &"checked",
        &"violations",
        &"worst",
        &"tolerance",
        &"status",
    ]);
    for t in &summary.tallies {
        let tol = match t.check {
            Check::OracleMean | Check::OracleSecond => ORACLE_TOLERANCE,
            Check::SumIdentity => SUM_TOLERANCE,
            _ => 1.0 + INEQUALITY_SLACK,
        };
        let status = if t.violations == 0 { "pass" } else { "fail" };
        out.row(&[
            &t.check.name(),
            &t.checked,
            &t.violations,
            &R(t.worst),
            &R(tol),
            &status,
        ]);
    }
    if !summary.errors.is_empty() {
        out.section("errors");
        for e in &summary.errors {
            out.row(&[e]);
        }
    }
    out.section("result");
    let passed = summary.passed();
    out.row(&[&"status", &if passed { "pass" } else { "fail" }]);
    out.done(if passed { EXIT_OK } else { EXIT_VERIFY })
}

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::Invalid(_) => input(e.to_string()),
        _ => usage(e.to_string()),
    }
}

fn summary_rows(out: &mut Report, s: &EmpiricalSummary) {
    out.row(&[&"n", &s.n]);
    out.row(&[&"truncated", &s.truncated]);
    out.row(&[&"max_steps", &s.max_steps]);
    out.row(&[&"usable", &s.usable]);
    out.row(&[&"mean", &R(s.mean)]);
    out.row(&[&"variance", &R(s.variance)]);
    out.row(&[&"std_error", &R(s.std_error)]);
    out.row(&[&"ks_exp1", &R(s.ks_exp1)]);
    out.section("profile");
    out.row(&[&"c", &"p_exceed"]);
    for &(c, p) in &s.cutoff_profile {
        out.row(&[&R(c), &R(p)]);
    }
    out.section("exact");
    out.row(&[&"quantity", &"empirical", &"exact", &"z"]);
    out.row(&[&"mean", &R(s.mean), &opt(s.exact_mean), &opt(s.z_score())]);
    out.row(&[&"variance", &R(s.variance), &opt(s.exact_variance), &"-"]);
}

fn simulate(args: SimulateArgs, exec: Execution) -> Result<Output, CliError> {
    let (tree, spec) = load(&args.chain)?;
    let config = SimConfig {
        seed: args.seed,
        replicas: args.replicas,
        max_steps: args.max_steps,
    };
    let mut out = Report::new();
    out.section("simulation");
    out.row(&[&"mode", &format!("{:?}", args.mode).to_lowercase()]);
    out.row(&[&"seed", &args.seed]);
    out.row(&[&"replicas", &args.replicas]);
    match args.mode {
        Mode::Hitting => {
            let source = check_node(
                &tree,
                args.source.unwrap_or_else(|| tree.deepest_node()),
                "source",
            )?;
            let target = check_node(&tree, args.target.unwrap_or(ROOT), "target")?;
            let s =
                simulate_hitting(&tree, &spec, source, target, &config, exec).map_err(sim_error)?;
            out.row(&[&"source", &source]);
            out.row(&[&"target", &target]);
            summary_rows(&mut out, &s);
        }
        Mode::Return => {
            let x = check_node(&tree, args.source.unwrap_or(ROOT), "source")?;
            let s = simulate_return(&tree, &spec, x, &config, exec).map_err(sim_error)?;
            out.row(&[&"source", &x]);
            out.row(&[&"target", &x]);
            summary_rows(&mut out, &s);
        }
        Mode::Excursion => {
            let a = non_root_target(&tree, args.target)?;
            let e = simulate_final_excursion(&tree, &spec, a, &config, exec).map_err(sim_error)?;
            out.row(&[&"target", &a]);
            out.section("excursion");
            out.row(&[&"side", &"n", &"truncated", &"mean"]);
            let mean = |v: &[u64]| v.iter().map(|&t| t as f64).sum::<f64>() / v.len() as f64;
            out.row(&[&"up", &e.up.len(), &e.truncated_up, &R(mean(&e.up))]);
            out.row(&[&"down", &e.down.len(), &e.truncated_down, &R(mean(&e.down))]);
            out.row(&[&"ks", &R(e.ks)]);
            out.row(&[&"critical_1pct", &R(e.critical)]);
        }
    }
    out.done(EXIT_OK)
}

fn trend_row(out: &mut Report, name: &str, t: &Trend) {
    out.row(&[
        &name,
        &R(t.first),
        &R(t.last),
        &t.decreasing,
        &t.vanishing,
        &t.diverging,
    ]);
}

fn family(args: FamilyArgs, exec: Execution) -> Result<Output, CliError> {
    let mut regular_specs = Vec::new();
    let chains: Vec<(Tree, ChainSpec, NodeId)> = if let Some(v) = &args.regular {
        let r = parse_num::<usize>("R", &v[0])?;
        let bias = parse_num::<f64>("LAMBDA", &v[1])?;
        let dmin = parse_num::<usize>("DMIN", &v[2])?;
        let dmax = parse_num::<usize>("DMAX", &v[3])?;
        let dstep = parse_num::<usize>("DSTEP", &v[4])?;
        if dstep == 0 || dmin > dmax {
            return Err(usage("need DMIN <= DMAX and DSTEP >= 1"));
        }
        let mut chains = Vec::new();
        for depth in (dmin..=dmax).step_by(dstep) {
            let s = RegularSpec::new(r, bias, depth).map_err(|e| usage(e.to_string()))?;
            let (tree, spec) = generate(&s).map_err(|e| usage(e.to_string()))?;
            chains.push((tree, spec, s.deepest()));
            regular_specs.push(s);
        }
        chains
    } else {
        if !args.targets.is_empty() && args.targets.len() != args.files.len() {
            return Err(usage("--targets needs one node per file"));
        }
        let mut chains = Vec::new();
        for (i, path) in args.files.iter().enumerate() {
            let (tree, spec) = read_chain(path)?;
            let a = non_root_target(&tree, args.targets.get(i).copied())?;
            chains.push((tree, spec, a));
        }
        chains
    };

    let members: Vec<FamilyMember<'_>> = chains
        .iter()
        .map(|(tree, spec, target)| FamilyMember {
            tree,
            spec,
            target: *target,
        })
        .collect();
    let opts = VerdictOptions {
        threshold: args.threshold,
        window: args.window,
        c_ref: args.c_ref,
        bounds: TheoremBounds {
            sup_ratio: args.bound_k,
            kp_ratio: args.bound_kp,
            kp_mu: args.bound_kp_mu,
        },
        growth_slack: args.slack,
    };
    let fv = family_verdict(&members, &opts, exec).map_err(|e| usage(e.to_string()))?;

    let mut out = Report::new();
    out.section("family");
    out.row(&[
        &"depth",
        &"nodes",
        &"target",
        &"k_a",
        &"k_mu",
        &"mean_to_root",
        &"mean_from_root",
        &"cutoff_ratio",
        &"escape_ratio",
        &"sup_ratio",
        &"kp_ratio",
        &"kp_mu",
        &"q_a",
        &"r_a",
        &"var_ratio",
        &"var_ratio_bound",
        &"gamma_a",
        &"time_scale_ratio",
        &"l_size",
    ]);
    for ((r, m), l) in fv.reports.iter().zip(&members).zip(&fv.l_sets) {
        out.row(&[
            &r.depth,
            &m.tree.node_count(),
            &r.target,
            &r.k_a,
            &R(r.k_mu),
            &r.to_root.mean,
            &r.from_root.mean,
            &R(r.cutoff_ratio),
            &R(r.escape_ratio),
            &R(r.sup_ratio),
            &R(r.kp_ratio),
            &R(r.kp_mu),
            &r.q_a,
            &r.r_a,
            &R(r.var_ratio),
            &R(r.var_ratio_bound),
            &R(r.gamma_a),
            &R(r.time_scale_ratio),
            &l.len(),
        ]);
    }
    if !regular_specs.is_empty() {
        out.section("closed_forms");
        out.row(&[
            &"depth",
            &"k_a",
            &"mean_to_root",
            &"pi0",
            &"rel_err_k_a",
            &"rel_err_mean",
            &"regime",
        ]);
        for (s, r) in regular_specs.iter().zip(&fv.reports) {
            let f = closed_forms(s);
            out.row(&[
                &s.depth,
                &R(f.k_a),
                &R(f.mean_to_root),
                &R(f.pi0),
                &R(rel_err(r.k_a.value(), f.k_a)),
                &R(rel_err(r.to_root.mean.value(), f.mean_to_root)),
                &f.regime.as_str(),
            ]);
        }
    }
    out.section("trends");
    out.row(&[
        &"series",
        &"first",
        &"last",
        &"decreasing",
        &"vanishing",
        &"diverging",
    ]);
    trend_row(&mut out, "cutoff_ratio", &fv.cutoff_trend);
    trend_row(&mut out, "escape_ratio", &fv.escape_trend);
    out.section("theorem");
    out.row(&[&"hypothesis", &"bound", &"holds"]);
    let th = &fv.theorem;
    out.row(&[&"sup_ratio_le", &R(th.sup_ratio_bound), &th.sup_ratio_ok]);
    out.row(&[&"kp_ratio_le", &R(th.kp_ratio_bound), &th.kp_ratio_ok]);
    out.row(&[&"kp_mu_ge", &R(th.kp_mu_bound), &th.kp_mu_ok]);
    out.section("verdict");
    out.row(&[&"verdict", &fv.verdict.as_str()]);
    out.done(EXIT_OK)
}

fn generate_cmd(args: GenerateArgs) -> Result<Output, CliError> {
    let mut out = String::new();
    if let Some(v) = &args.regular {
        let s = regular_spec(v)?;
        let (tree, spec) = generate(&s).map_err(|e| usage(e.to_string()))?;
        writeln!(
            out,
            "# regular r={} lambda={} depth={} deepest={}",
            s.r,
            s.bias,
            s.depth,
            s.deepest()
        )
        .unwrap();
        out.push_str(&emit(&tree, &spec));
    } else if let Some(v) = &args.random {
        if v[1] < 2 {
            return Err(usage("MAX_NODES must be at least 2"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(v[0]);
        let inst = random_instance(&mut rng, v[1] as usize);
        writeln!(out, "# random seed={} target={}", v[0], inst.target).unwrap();
        out.push_str(&emit(&inst.tree, &inst.spec));
    }
    Ok(Output {
        stdout: out,
        code: EXIT_OK,
    })
}
