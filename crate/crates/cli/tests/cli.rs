use std::path::Path;
use std::process::{Command, Output};

use eby_cli::output::{manifest_path, RunManifest};

fn eby(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eby"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run eby")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

const REPORT: &str = r#"{
  "schema": 1,
  "procedure": "eby",
  "delta": 0.1,
  "families": [
    {"type": "hoeffding", "sample_mean": 0.3, "n": 100, "range": [0, 1], "alpha_prime": 0.1},
    {"type": "hoeffding", "sample_mean": 0.8, "n": 100, "range": [0, 1], "alpha_prime": 0.1},
    {"type": "indicator", "e": 40.0, "null": [0, 0]}
  ],
  "selection": {"rule": "indices", "indices": [1, 3]}
}"#;

#[test]
fn report_writes_one_row_per_selected_index() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "r.json", REPORT);
    let out = eby(&["report", "--config", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,alpha,region");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,"));
    assert!(lines[2].starts_with("3,") && lines[2].contains("null_complement"));
}

#[test]
fn bad_input_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        "{not json",
        &REPORT.replace("\"delta\": 0.1,", "\"delta\": 0.1, \"typo\": 1,"),
        &REPORT.replace("\"schema\": 1", "\"schema\": 2"),
        &REPORT.replace("[1, 3]", "[0, 3]"),
        &REPORT.replace("\"delta\": 0.1", "\"delta\": 1.5"),
    ];
    for (i, text) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("bad{i}.json"), text);
        let out = eby(&["report", "--config", &cfg], dir.path());
        assert_eq!(out.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = eby(&["report", "--config", "missing.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn contract_violation_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let plain = REPORT.replace(
        r#""type": "hoeffding", "sample_mean": 0.8, "n": 100, "range": [0, 1], "alpha_prime": 0.1"#,
        r#""type": "hoeffding_plain", "sample_mean": 0.8, "n": 100, "range": [0, 1]"#,
    );
    let cfg = write(dir.path(), "plain.json", &plain.replace("[1, 3]", "[2]"));
    let out = eby(&["report", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains('2'));

    let heavy = REPORT.replace("\"procedure\": \"eby\"", "\"procedure\": \"weighted-eby\", \"weights\": [3, 1, 1]");
    let cfg = write(dir.path(), "weights.json", &heavy);
    assert_eq!(eby(&["report", "--config", &cfg], dir.path()).status.code(), Some(3));

    // BY accepts the plain CI.
    let cfg = write(dir.path(), "by.json", &plain);
    let out = eby(&["report", "--config", &cfg, "--procedure", "by-dep"], dir.path());
    assert!(out.status.success());
}

const FIG2: &str = r#"{"schema": 1, "settings": ["independent", "dependent"], "ks": [10, 30, 60], "n": 50, "sigma": 0.5, "reps": 200, "seed": 4}"#;

#[test]
fn simulate_is_deterministic_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "fig2.json", FIG2);
    let mut outputs = Vec::new();
    for threads in ["1", "8", "1"] {
        let out = format!("fig2-{threads}-{}.csv", outputs.len());
        let run = eby(&["--threads", threads, "simulate", "fig2", "--config", &cfg, "--out", &out], dir.path());
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
        outputs.push(dir.path().join(out));
    }
    let bytes: Vec<Vec<u8>> = outputs.iter().map(|p| std::fs::read(p).unwrap()).collect();
    assert_eq!(bytes[0], bytes[1]);
    assert_eq!(bytes[0], bytes[2]);

    let text = String::from_utf8(bytes[0].clone()).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("setting,K,method,fcr_mean,fcr_se,width_mean,width_se,reps,seed"));
    assert_eq!(lines.count(), 12);

    let manifests: Vec<RunManifest> = outputs
        .iter()
        .map(|p| serde_json::from_str(&std::fs::read_to_string(manifest_path(p)).unwrap()).unwrap())
        .collect();
    assert_eq!(manifests[0].config_hash, manifests[1].config_hash);
    assert_eq!(manifests[0].master_seed, 4);
    assert!(manifests[0].finished >= manifests[0].started);
}

#[test]
fn seed_override_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ebh.json",
        r#"{"schema": 1, "k": 40, "non_nulls": 8, "signal": 3.0, "lambda": 3.0, "reps": 100}"#,
    );
    let run = |seed: &str, out: &str| {
        let r = eby(&["simulate", "ebh", "--config", &cfg, "--out", out, "--seed", seed], dir.path());
        assert!(r.status.success());
        std::fs::read_to_string(dir.path().join(out)).unwrap()
    };
    let a = run("1", "a.csv");
    let b = run("2", "b.csv");
    assert_ne!(a, b);
    assert_eq!(a, run("1", "c.csv"));
    let pm = eby(&["simulate", "ebh", "--config", &cfg, "--out", "d.csv", "--pvalue-mode", "paper"], dir.path());
    assert_eq!(pm.status.code(), Some(2));
}

#[test]
fn plot_renders_one_polyline_per_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sharp.json",
        r#"{"schema": 1, "k": 50, "gamma": 2.0, "epsilons": [0.1, 0.01, 0.001], "reps": 200}"#,
    );
    let r = eby(&["simulate", "sharpness", "--config", &cfg, "--out", "s.csv"], dir.path());
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let r = eby(&["plot", "s.csv", "--out", "s.svg"], dir.path());
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let svg = std::fs::read_to_string(dir.path().join("s.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<polyline").count(), 1);
    assert!(svg.contains(">epsilon<"));

    write(dir.path(), "empty.csv", "");
    assert_eq!(eby(&["plot", "empty.csv", "--out", "e.svg"], dir.path()).status.code(), Some(2));
}

#[test]
fn selfcheck_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = eby(&["selfcheck"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 5 && text.lines().all(|l| l.starts_with("PASS")));
}
