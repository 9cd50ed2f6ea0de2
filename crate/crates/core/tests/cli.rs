use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use varmeas::harness::read_plot_csv;

fn varmeas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varmeas"))
        .args(args)
        .env_remove("VARMEAS_SEED")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{
  "seed": 3,
  "horizon": 64,
  "tolerance": 0.05,
  "theorems": ["th1", "p4"],
  "families": [{ "kind": "bounded_pair", "params": { "atoms": 4 } }]
}"#;

#[test]
fn seed_override_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL);
    let run = |seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_varmeas"));
        cmd.args(["suite", "--config", &cfg]).env_remove("VARMEAS_SEED");
        if let Some(s) = seed {
            cmd.env("VARMEAS_SEED", s);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let base = run(None);
    let v: Value = serde_json::from_slice(&base).unwrap();
    assert_eq!(v["seed"], 3);
    assert_eq!(v["schema"], 1);
    let a = run(Some("99"));
    assert_eq!(a, run(Some("99")));
    assert_ne!(a, base);
    assert_eq!(serde_json::from_slice::<Value>(&a).unwrap()["seed"], 99);

    let mut cmd = Command::new(env!("CARGO_BIN_EXE_varmeas"));
    let out = cmd.args(["suite", "--config", &cfg]).env("VARMEAS_SEED", "nope").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", "{\n  \"seed\": 1,\n  \"horizon\": ,\n}");
    let out = varmeas(&["suite", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");

    let cfg = write(dir.path(), "short.json", &SMALL.replace("\"horizon\": 64", "\"horizon\": 4"));
    assert_eq!(varmeas(&["suite", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(varmeas(&["suite", "--config", "/nonexistent/c.json"]).status.code(), Some(2));
}

#[test]
fn unexpected_verdict_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"seed": 1, "horizon": 64, "tolerance": 0.05, "theorems": ["th1"],
            "families": [{ "kind": "mass_escape" }]}"#,
    );
    let out = varmeas(&["suite", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["summary"]["unexpected"], 1);
}

#[test]
fn family_paths_resolve_against_the_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("fams")).unwrap();
    write(&dir.path().join("fams"), "escape.json", r#"{"kind": "mass_escape", "expect": {"th1": "hypothesis_failed"}}"#);
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"seed": 1, "horizon": 32, "tolerance": 0.05, "theorems": ["th1"], "families": ["fams/escape.json"],
            "output": {"path": "OUT", "format": "csv"}}"#,
    );
    let out_path = dir.path().join("out.csv");
    std::fs::write(&cfg, std::fs::read_to_string(&cfg).unwrap().replace("OUT", out_path.to_str().unwrap())).unwrap();
    let out = varmeas(&["suite", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_plot_csv(std::fs::File::open(&out_path).unwrap()).unwrap();
    assert_eq!(rows.len(), 32);
    assert!(rows.iter().all(|r| r.theorem == "th1"));
}

#[test]
fn check_and_emit_plot_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let fam = write(
        dir.path(),
        "f.json",
        r#"{"kind": "custom_scalar", "name": "two atoms",
            "params": {"m": [0.5, 0.5], "mu": [0.25, 0.75], "f": [1.0, -1.0], "g": [0.5, 0.5],
                       "rate": {"form": "power", "c": 1.0, "p": 1.0}}}"#,
    );
    let out = varmeas(&["check", "th1", "--family", &fam, "--horizon", "100", "--tol", "0.05", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = write(dir.path(), "r.json", &String::from_utf8(out.stdout).unwrap());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["verdict"], "pass");

    let csv = dir.path().join("plot.csv");
    let out = varmeas(&["emit-plot", &report, csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("n,gap,theorem,family\n"));
    let rows = read_plot_csv(text.as_bytes()).unwrap();
    let curve = v["curve"].as_array().unwrap();
    assert_eq!(rows.len(), curve.len());
    for (row, point) in rows.iter().zip(curve) {
        assert_eq!(row.n as u64, point[0].as_u64().unwrap());
        assert_eq!(row.gap, point[1].as_f64().unwrap());
    }

    assert_eq!(varmeas(&["emit-plot", "/nonexistent.json", csv.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn check_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let fam = write(dir.path(), "f.json", r#"{"kind": "bounded_pair"}"#);
    assert_eq!(varmeas(&["check", "th9", "--family", &fam]).status.code(), Some(2));
    assert_eq!(varmeas(&["check", "th1", "--family", &fam, "--horizon", "2"]).status.code(), Some(2));
    assert_eq!(varmeas(&["check", "thmc", "--family", &fam]).status.code(), Some(2));
    let bad = write(dir.path(), "g.json", r#"{"kind": "bounded_pair", "params": {"atoms": "six"}}"#);
    assert_eq!(varmeas(&["check", "th1", "--family", &bad]).status.code(), Some(2));
    let mismatch = write(dir.path(), "h.json", r#"{"kind": "mass_escape"}"#);
    assert_eq!(varmeas(&["check", "th1", "--family", &mismatch]).status.code(), Some(1));
}

#[test]
fn gallery_entries() {
    let out = varmeas(&["gallery", "rem2_weak_not_tv", "--level", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["reproduced"], true);
    assert_eq!(v["parameters"]["level"], 6);
    assert_eq!(varmeas(&["gallery", "straddled_jump"]).status.code(), Some(0));
    assert_eq!(varmeas(&["gallery", "nope"]).status.code(), Some(2));
    assert_eq!(varmeas(&["gallery", "rem2_weak_not_tv", "--level", "2"]).status.code(), Some(2));
}
