use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pbatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbatch"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_i3(dir: &Path) -> PathBuf {
    let path = dir.join("i3.txt");
    fs::write(&path, "3 1 10\n5 6\n3 5\n2 4\n").unwrap();
    path
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(pbatch(&["--help"]).status.code(), Some(0));
    assert_eq!(pbatch(&["--version"]).status.code(), Some(0));
    assert_eq!(pbatch(&[]).status.code(), Some(1));
    assert_eq!(pbatch(&["solve"]).status.code(), Some(1));
    assert_eq!(pbatch(&["gen", "--n", "3", "--sigma", "9"]).status.code(), Some(1));
    assert_eq!(pbatch(&["solve", "/nonexistent/file.txt"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "2 1 10\n5 6\n").unwrap();
    let out = pbatch(&["pr", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn gen_matches_the_instance_format() {
    let out = pbatch(&["gen", "--n", "20", "--sigma", "1", "--seed", "0"]);
    assert!(out.status.success());
    let golden = fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../core/tests/data/golden/n20_sigma1_c10_m1_seed0_r0.txt"),
    )
    .unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden);

    let dir = tempfile::tempdir().unwrap();
    let out = pbatch(&[
        "gen", "--n", "5", "--sigma", "s4", "--replicas", "3", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 3);
}

#[test]
fn solve_reports_the_reference_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let i3 = write_i3(dir.path());
    let doc = json(&pbatch(&["solve", i3.to_str().unwrap()]));
    assert_eq!(doc["result"]["cg_ub"], 14);
    assert_eq!(doc["result"]["certified_optimal"], true);
    assert!(doc["version"].is_string());
    assert_eq!(doc["config"]["ub_time_limit"], 60.0);
    assert!((doc["pr"]["value"].as_f64().unwrap() - 10.3).abs() < 1e-9);

    let out_path = dir.path().join("res.json");
    let out = pbatch(&[
        "solve", i3.to_str().unwrap(), "--machines", "2", "--time-limit-ub", "5",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let saved: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(saved["result"]["cg_ub"], 11);
    assert_eq!(saved["config"]["ub_time_limit"], 5.0);
}

#[test]
fn oracle_pr_and_milp() {
    let dir = tempfile::tempdir().unwrap();
    let i3 = write_i3(dir.path());
    let i3 = i3.to_str().unwrap();
    let doc = json(&pbatch(&["oracle", i3, "--all-orders"]));
    assert_eq!(doc["optimum"], 14);
    assert_eq!(doc["all_orders_optimum"], 14);
    let doc = json(&pbatch(&["pr", i3, "--machines", "2"]));
    assert_eq!(doc["pr"]["machine_count"], 20);

    let out = pbatch(&["export-milp", i3]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("\\") && text.contains("Binaries") && text.ends_with("End\n"));
    assert_eq!(pbatch(&["export-milp", i3, "--machines", "2"]).status.code(), Some(2));
}

#[test]
fn bench_writes_both_reports() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(
        &spec,
        "[[group]]\nn = 6\nsigma = 1\nreplicas = 2\nseed = 3\n\n\
         [[group]]\nn = 5\nsigma = \"sigma4\"\nmachines = 2\nreplicas = 2\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = pbatch(&[
        "bench", spec.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--jobs", "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let detail = fs::read_to_string(out_dir.join("detail.csv")).unwrap();
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(detail.lines().count(), 5);
    assert_eq!(summary.lines().count(), 3);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), summary);

    let out = pbatch(&["bench", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    fs::write(&spec, "[[group]]\nn = 6\n").unwrap();
    assert_eq!(pbatch(&["bench", spec.to_str().unwrap()]).status.code(), Some(2));
}
