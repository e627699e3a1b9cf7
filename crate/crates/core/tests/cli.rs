use std::fs;
use std::process::{Command, Output};

fn sparselab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparselab")).args(args).env_remove("SPARSELAB_THREADS").output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn constant_weight_has_unit_characteristics() {
    let out = sparselab(&["--L", "4", "constants", "constant"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["a1", "fw_dyadic", "fw_exact"] {
        assert_eq!(json[key], "1/1", "{key}");
    }
}

#[test]
fn weight_file_round_trip_and_malformed_file() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("w.json");
    fs::write(&good, r#"{"L": 1, "values": ["1", "2", "1", "1", "1", "4"]}"#).unwrap();
    let out = sparselab(&["--L", "1", "constants", good.to_str().unwrap(), "--fw", "dyadic"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"L": 1, "values": [1, 2"#).unwrap();
    let out = sparselab(&["--L", "1", "constants", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&sparselab(&["--L", "4", "--trials", "5", "verify", "thm-a"])), 0);
    assert_eq!(code(&sparselab(&["--L", "4", "--trials", "5", "verify", "prop32", "--k", "0.01"])), 1);
    assert_eq!(code(&sparselab(&["--L", "4", "--trials", "5", "--mode", "report", "verify", "prop32", "--k", "0.01"])), 0);
    assert_eq!(code(&sparselab(&["--no-such-flag", "verify", "thm-a"])), 2);
    assert_eq!(code(&sparselab(&["--trials", "0", "verify", "thm-a"])), 3);
    assert_eq!(code(&sparselab(&["verify", "no-such-target"])), 3);
    assert_eq!(code(&sparselab(&["--L", "4", "sweep", "--eps", "2"])), 3);
}

#[test]
fn assertion_failure_names_seed_trial_and_step() {
    let out = sparselab(&["--L", "4", "--seed", "7", "--trials", "3", "verify", "prop32", "--k", "0.01"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("seed 7") && err.contains("trial 0") && err.contains("step prop32"), "{err}");
}

#[test]
fn sweep_writes_one_row_per_eps() {
    let out = sparselab(&["--L", "5", "--trials", "4", "sweep", "--eps", "1,0.5,0.1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "eps,a1,fw_dyadic,fw_exact,measured,bound");
}

#[test]
fn single_iteration_search_returns_seed_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let best = dir.path().join("best.json");
    let out = sparselab(&["--L", "4", "--seed", "2", "search", "--iters", "1", "--best", best.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 2);
    let fields: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(fields[0], "0");
    assert_eq!(fields[1], fields[2]);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(best).unwrap()).unwrap();
    assert_eq!(json["objective"], "thm-a-ratio");
    let value: f64 = fields[1].parse().unwrap();
    assert!((json["value"].as_f64().unwrap() - value).abs() <= 1e-9 * value);
}

#[test]
fn identical_seeds_give_identical_bytes() {
    for args in [
        &["--L", "5", "--seed", "11", "--trials", "20", "verify", "thm-c", "--params", "2,4,1"][..],
        &["--L", "4", "--seed", "11", "search", "--iters", "30"][..],
        &["--L", "4", "--seed", "11", "--trials", "2", "gen"][..],
    ] {
        let a = sparselab(args);
        let b = sparselab(args);
        assert_eq!(code(&a), 0, "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["--L", "5", "--seed", "3", "--trials", "24", "verify", "kolmogorov"];
    let run = |threads: &str| Command::new(env!("CARGO_BIN_EXE_sparselab")).args(args).env("SPARSELAB_THREADS", threads).output().unwrap();
    let one = run("1");
    let four = run("4");
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(code(&run("zero")), 3);
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let args = ["--L", "4", "--seed", "1", "--trials", "6", "verify", "magic", "--theta", "1/2"];
    let stdout = sparselab(&args).stdout;
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    assert_eq!(code(&sparselab(&with_out)), 0);
    assert_eq!(fs::read(path).unwrap(), stdout);
}
