use std::process::Command;

use istn_rsma::harness::{read_csv, RowStatus};
use istn_rsma::solver::{parse_program, solve, SolveStatus, SolverOptions};

const SMALL: [&str; 12] = [
    "--set",
    "ks=2",
    "--set",
    "kt=2",
    "--set",
    "samples=8",
    "--set",
    "eval_samples=16",
    "--set",
    "trials=2",
    "--set",
    "schemes=sdma,mdp",
];

fn sim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_istn-sim"))
        .args(args)
        .env("ISTN_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn with_small<'a>(cmd: &[&'a str], extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = cmd.to_vec();
    v.extend_from_slice(&SMALL);
    v.extend_from_slice(extra);
    v
}

#[test]
fn run_writes_a_parseable_table_and_gnuplot_data() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let dat = dir.path().join("out.dat");
    let out = sim(&with_small(
        &["run"],
        &["--set", "sweep_values=10,22", "--csv", csv.to_str().unwrap(), "--dat", dat.to_str().unwrap()],
    ));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 2 * 2 * 2);
    assert!(table.rows.iter().all(|r| r.status != RowStatus::Failed));
    let dat = std::fs::read_to_string(&dat).unwrap();
    assert_eq!(dat.lines().count(), 3);
}

#[test]
fn same_seed_gives_identical_bytes_regardless_of_threads() {
    let args = with_small(&["run"], &["--set", "sweep_axis=none", "--set", "seed=42"]);
    let a = sim(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_istn-sim"))
        .args(&args)
        .env("ISTN_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    let other = sim(&with_small(&["run"], &["--set", "sweep_axis=none", "--set", "seed=43"]));
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn invalid_configuration_exits_with_two() {
    for bad in [
        vec!["run", "--set", "ks=3"],
        vec!["run", "--set", "schemes="],
        vec!["run", "--set", "no_such_key=1"],
        vec!["run", "--config", "/nonexistent/cfg.txt"],
        vec!["show-config", "--profile", "huge"],
    ] {
        let out = sim(&bad);
        assert_eq!(out.status.code(), Some(2), "{bad:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("error"), "{bad:?}");
    }
}

#[test]
fn bad_thread_setting_is_a_failure() {
    let out = Command::new(env!("CARGO_BIN_EXE_istn-sim"))
        .args(with_small(&["run"], &["--set", "sweep_axis=none"]))
        .env("ISTN_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_passes_on_a_small_sweep() {
    let out = sim(&with_small(&["check"], &["--set", "sweep_values=10,16"]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("0 violations"));
}

#[test]
fn config_file_and_overrides_layer_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.txt");
    std::fs::write(&path, "# fixture\nks = 6\nkt = 4\nseed = 9\n").unwrap();
    let out = sim(&["show-config", "--profile", "full", "--config", path.to_str().unwrap(), "--set", "kt=2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for line in ["ks = 6", "kt = 2", "seed = 9", "nt = 6", "samples = 1000"] {
        assert!(text.lines().any(|l| l == line), "{line} missing from\n{text}");
    }
}

#[test]
fn dumped_problem_is_solvable() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.txt");
    let out = sim(&with_small(
        &["dump-problem"],
        &["--scheme", "RSMA-PD-ISTN", "--iteration", "2", "--trial", "1", "--out", path.to_str().unwrap()],
    ));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let prog = parse_program(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let sol = solve(&prog, &SolverOptions::default()).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!(sol.primal_objective > 0.0);

    let out = sim(&with_small(&["dump-problem"], &["--trial", "7"]));
    assert_eq!(out.status.code(), Some(2));
}
