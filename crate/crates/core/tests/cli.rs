use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cvswap"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write_config(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn vacuum_overlap_is_exactly_one() {
    let doc = json_of(&run(&["overlap", "--config", configs().join("vacuum.json").to_str().unwrap()]));
    assert_eq!(doc["summary"]["grand_mean"][0].as_f64(), Some(1.0));
    assert_eq!(doc["exact"][0].as_f64(), Some(1.0));
    assert!(doc["tool"].as_str().unwrap().starts_with("cvswap "));
    assert_eq!(doc["config"]["shots"], 100);
}

#[test]
fn qudit_basis_multiplicities() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "q.json", r#"{"d": 3}"#);
    let doc = json_of(&run(&["qudit-basis", "--config", cfg.to_str().unwrap()]));
    assert_eq!(doc["multiplicities"], serde_json::json!([6, 3]));
    assert_eq!(doc["matrix"].as_array().unwrap().len(), 9);
}

#[test]
fn perm_with_two_states_equals_overlap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "p.json",
        r#"{"cutoff": 6, "states": [{"kind": "coherent", "alpha": [0.5, 0.2]}, {"kind": "squeezed", "z": 0.3}],
            "shots": 3000, "runs": 3, "seed": 12}"#,
    );
    let c = cfg.to_str().unwrap();
    let perm = json_of(&run(&["perm", "--config", c]));
    let overlap = json_of(&run(&["overlap", "--config", c]));
    assert_eq!(perm["runs"], overlap["runs"]);
    assert_eq!(perm["summary"], overlap["summary"]);
}

#[test]
fn two_copy_of_a_pure_reduced_state_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "t.json",
        r#"{"purification": {"kind": "product", "factors": [
              {"kind": "coherent", "alpha": 0.3, "cutoff": 4}, {"kind": "vacuum", "cutoff": 1}]},
            "n": 2, "shots": 500}"#,
    );
    let doc = json_of(&run(&["two-copy", "--config", cfg.to_str().unwrap()]));
    assert!((doc["exact"][0].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(doc["summary"]["grand_mean"][0].as_f64(), Some(1.0));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let malformed = write_config(&dir, "m.json", r#"{"states": [}"#);
    assert_eq!(run(&["overlap", "--config", malformed.to_str().unwrap()]).status.code(), Some(2));
    let missing = write_config(&dir, "n.json", r#"{"states": [{"kind": "vacuum"}]}"#);
    assert_eq!(run(&["overlap", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
    let leaky =
        write_config(&dir, "l.json", r#"{"cutoff": 5, "states": [{"kind": "coherent", "alpha": 3}, {"kind": "vacuum"}]}"#);
    let out = run(&["overlap", "--config", leaky.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("leak"));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn seed_flag_overrides_the_config() {
    let c = configs().join("squeezed_pair.json");
    let a = json_of(&run(&["overlap", "--config", c.to_str().unwrap()]));
    let b = json_of(&run(&["overlap", "--config", c.to_str().unwrap(), "--seed", "99"]));
    assert_eq!(b["config"]["seed"], 99);
    assert_ne!(a["runs"], b["runs"]);
    assert_eq!(a["exact"], b["exact"]);
}

#[test]
fn csv_output_and_shot_dump() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("runs.csv");
    let shots = dir.path().join("shots.csv");
    let c = configs().join("squeezed_pair.json");
    let status = run(&[
        "overlap",
        "--config",
        c.to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
        "--dump-shots",
        shots.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let table = std::fs::read_to_string(out).unwrap();
    assert!(table.starts_with("run,seed,mean_re,mean_im,stderr,shots,discarded\n"));
    assert_eq!(table.lines().count(), 6);
    let dumped = std::fs::read_to_string(shots).unwrap();
    assert!(dumped.starts_with("shot_index,n0,n1\n"));
    assert_eq!(dumped.lines().count(), 20_001);
}

#[test]
fn fig2_table() {
    let c = configs().join("fig2.json");
    let out = run(&["fig2", "--config", c.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,M,closed_form,simulated,abs_diff"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3 * 17);
    for r in &rows {
        assert!(r[4] < 10.0 * r[0].tanh().powi(82));
        let limit = 1.0 / (2.0 * r[0]).cosh();
        assert_eq!(r[3] > limit, r[1] as usize % 2 == 0);
    }
}

#[test]
fn cutoff_plans() {
    let doc = json_of(&run(&["cutoff-plan", "--config", configs().join("cutoff_squeezed.json").to_str().unwrap()]));
    let m = doc["plan"]["M"].as_u64().unwrap() as i32;
    assert!(1f64.tanh().powi(2 * (m + 1)) <= 0.01);
    assert!(1f64.tanh().powi(2 * m) > 0.01);

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "c.json", r#"{"family": "coherent", "E": 1.0, "eps": 0.1}"#);
    let doc = json_of(&run(&["cutoff-plan", "--config", cfg.to_str().unwrap()]));
    assert_eq!(doc["plan"]["M"], 4);
    assert_eq!(doc["plan"]["method"], "chernoff");

    let refused = write_config(&dir, "r.json", r#"{"family": "coherent", "E": 4.0, "eps": 0.1, "method": "normal"}"#);
    assert_eq!(run(&["cutoff-plan", "--config", refused.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn compile_cost_and_hybrid_configs_run() {
    let doc = json_of(&run(&["compile-cost", "--config", configs().join("compile_cost.json").to_str().unwrap()]));
    let exact = doc["exact_cost"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&exact));
    let doc = json_of(&run(&["hybrid", "--config", configs().join("hybrid.json").to_str().unwrap()]));
    let mean = doc["summary"]["grand_mean"][0].as_f64().unwrap();
    assert!((-1.0..=1.0).contains(&mean));
}

#[test]
fn output_is_identical_across_thread_counts() {
    let c = configs().join("perm.json");
    let one = bin().args(["perm", "--config", c.to_str().unwrap()]).env("RAYON_NUM_THREADS", "1").output().unwrap();
    let four = bin().args(["perm", "--config", c.to_str().unwrap()]).env("RAYON_NUM_THREADS", "4").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}
