use std::path::PathBuf;
use std::process::{Command, Output};

const TWO_NODE: &str = "# two-node chain\nnodes 2\n0 - - - 0.5\n1 0 0.5 0.5 0.5\n";
const PATH: &str = "nodes 3\n0 - - - 0.5\n1 0 0.5 0.5 0\n2 1 0.5 0.5 0.5\n";
const CORRUPT: &str = "nodes 2\n0 - - - 0.5\n1 0 0.7 0.5 0.5\n";

fn write(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bdtree-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn bdtree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bdtree"))
        .args(args)
        .env_remove("BDTREE_THREADS")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn row<'a>(report: &'a str, key: &str) -> Vec<&'a str> {
    report
        .lines()
        .map(|l| l.split('\t').collect::<Vec<_>>())
        .find(|cells| cells[0] == key)
        .unwrap_or_else(|| panic!("no row {key} in\n{report}"))
}

#[test]
fn analyze_two_node() {
    let f = write("two.chain", TWO_NODE);
    let out = bdtree(&["analyze", f.to_str().unwrap(), "--target", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(row(&text, "k_a")[1], "1");
    assert_eq!(row(&text, "mean_to_root")[1], "2");
    assert_eq!(row(&text, "second_to_root")[1], "6");
    assert!(text.lines().any(|l| l == "1\t0\t0\t1\t2\t6\t2"));
}

#[test]
fn analyze_path_both_directions() {
    let f = write("path.chain", PATH);
    let text = stdout(&bdtree(&[
        "analyze",
        f.to_str().unwrap(),
        "--pair",
        "1",
        "0",
    ]));
    assert_eq!(row(&text, "mean_to_root")[1], "6");
    assert_eq!(row(&text, "mean_from_root")[1], "6");
    // T_{1→2}: one step down with probability 1/2 each try
    assert!(text.lines().any(|l| l.starts_with("1\t2\t1\t0\t4\t")));
}

#[test]
fn generated_regular_file_round_trips_through_analyze() {
    let gen = bdtree(&["generate", "--regular", "2", "4", "3"]);
    assert_eq!(gen.status.code(), Some(0));
    let f = write("regular.chain", &stdout(&gen));
    let text = stdout(&bdtree(&["analyze", f.to_str().unwrap()]));
    assert_eq!(row(&text, "target")[1], "7");
    assert_eq!(row(&text, "k_a")[1], "1.75");
}

#[test]
fn verify_exit_codes() {
    let good = write("verify-two.chain", TWO_NODE);
    assert_eq!(
        bdtree(&["verify", good.to_str().unwrap()]).status.code(),
        Some(0)
    );

    let out = bdtree(&["verify", "--random", "200", "42"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(row(&stdout(&out), "status")[1], "pass");

    let bad = write("corrupt.chain", CORRUPT);
    let out = bdtree(&["verify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    // escape times of 100^300 overflow the linear oracle, so checks fail
    let gen = stdout(&bdtree(&["generate", "--regular", "1", "0.01", "300"]));
    let deep = write("deep.chain", &gen);
    let out = bdtree(&["verify", deep.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(row(&stdout(&out), "status")[1], "fail");
}

#[test]
fn usage_and_missing_files() {
    assert_eq!(bdtree(&[]).status.code(), Some(1));
    assert_eq!(
        bdtree(&["analyze", "--regular", "2", "x", "3"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        bdtree(&["simulate", "--regular", "2", "4", "3", "--source", "99"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        bdtree(&["analyze", "/nonexistent/chain"]).status.code(),
        Some(2)
    );
    assert_eq!(bdtree(&["--version"]).status.code(), Some(0));
}

#[test]
fn simulate_two_node() {
    let f = write("sim-two.chain", TWO_NODE);
    let out = bdtree(&[
        "simulate",
        f.to_str().unwrap(),
        "--source",
        "1",
        "--target",
        "0",
        "--replicas",
        "100000",
    ]);
    let text = stdout(&out);
    let mean: f64 = row(&text, "mean")[1].parse().unwrap();
    let se: f64 = row(&text, "std_error")[1].parse().unwrap();
    assert!((mean - 2.0).abs() < 4.0 * se);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = [
        "simulate",
        "--regular",
        "2",
        "3",
        "5",
        "--replicas",
        "2000",
        "--seed",
        "9",
    ];
    let one = Command::new(env!("CARGO_BIN_EXE_bdtree"))
        .args(args)
        .env("BDTREE_THREADS", "1")
        .output()
        .unwrap();
    let four = bdtree(&[&["--threads", "4"], &args[..]].concat());
    let seq = bdtree(&[&["--sequential"], &args[..]].concat());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, seq.stdout);
}

#[test]
fn family_verdict_lines() {
    let text = stdout(&bdtree(&["family", "--regular", "2", "4", "4", "16", "4"]));
    assert_eq!(row(&text, "verdict")[1], "both");
    let text = stdout(&bdtree(&["family", "--regular", "2", "2", "4", "16", "4"]));
    assert_eq!(row(&text, "verdict")[1], "inconclusive");

    let files: Vec<String> = [3, 4, 5]
        .iter()
        .map(|d| {
            let gen = stdout(&bdtree(&[
                "generate",
                "--regular",
                "2",
                "4",
                &d.to_string(),
            ]));
            write(&format!("fam{d}.chain"), &gen)
                .to_str()
                .unwrap()
                .to_string()
        })
        .collect();
    let mut args = vec!["family", "--files"];
    args.extend(files.iter().map(String::as_str));
    let out = bdtree(&args);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out)
            .lines()
            .filter(|l| l.starts_with(['3', '4', '5']))
            .count(),
        3
    );
}
