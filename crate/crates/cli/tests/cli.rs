use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mgsurrogate"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn gen_graph_is_reproducible_and_readable() {
    let dir = scratch("gen_graph");
    let path = dir.join("g.txt");
    let out = run(bin()
        .args(["gen-graph", "--n", "10", "--seed", "3", "--out"])
        .arg(&path));
    assert!(out.status.success());
    let stdout = run(bin().args(["gen-graph", "--n", "10", "--seed", "3"]));
    assert_eq!(
        fs::read_to_string(&path).unwrap(),
        String::from_utf8(stdout.stdout).unwrap()
    );
    let g = mgsurrogate::Graph::read(&path).unwrap();
    assert_eq!((g.n(), g.edges().len()), (10, 15));
}

#[test]
fn self_loop_is_rejected() {
    let dir = scratch("self_loop");
    let path = dir.join("loop.txt");
    fs::write(&path, "2 2\n1 1 1\n1 2 1\n").unwrap();
    let out = run(bin().arg("solve").arg(&path));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("self-loop"));
}

#[test]
fn single_edge_is_cut() {
    let dir = scratch("single_edge");
    let path = dir.join("edge.txt");
    fs::write(&path, "2 1\n1 2 1\n").unwrap();
    let out = run(bin().arg("solve").arg(&path).arg("--out").arg(&dir));
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["cut"], 1);
    assert_eq!(summary["success"], true);
    let trace = fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert!(trace.lines().count() > 1);
}

#[test]
fn solve_output_is_deterministic() {
    let dir = scratch("deterministic");
    let graph = dir.join("g.txt");
    assert!(run(bin()
        .args(["gen-graph", "--n", "6", "--seed", "1", "--out"])
        .arg(&graph))
    .status
    .success());
    let mut traces = Vec::new();
    for run_dir in ["a", "b"] {
        let out_dir = dir.join(run_dir);
        let out = run(bin()
            .arg("solve")
            .arg(&graph)
            .args(["--seed", "4", "--out"])
            .arg(&out_dir));
        assert!(out.status.success());
        traces.push(fs::read(out_dir.join("trace.csv")).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
}

#[test]
fn corrupted_tables_fail_verification() {
    let out = run(bin().args(["verify", "--max-n", "4", "--corrupt-tables"]));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}

#[test]
fn verify_rejects_large_dense_size() {
    let out = run(bin().args(["verify", "--max-n", "13"]));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_config_is_rejected() {
    let dir = scratch("bad_config");
    let path = dir.join("edge.txt");
    fs::write(&path, "2 1\n1 2 1\n").unwrap();
    let out = run(bin().arg("solve").arg(&path).arg("--lr=0"));
    assert_eq!(out.status.code(), Some(2));
}
