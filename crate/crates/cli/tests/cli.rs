use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_birdbench"));
    c.env("RUST_LOG", "warn");
    c
}

fn levels() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../levels")
}

#[test]
fn validate_accepts_the_pack_and_rejects_the_fixtures() {
    let out = bin().arg("validate").arg("--levels").arg(levels()).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    assert!(text.contains("12/12 shown solvable"), "{text}");

    let out = bin()
        .args(["validate", "--probe", "0", "--levels"])
        .arg(levels().join("fixtures"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("UNSTABLE"));
}

#[test]
fn benchmark_prints_a_report() {
    let out = bin()
        .args(["--time-scale", "0.1", "benchmark", "--agent", "naive", "--seed", "3", "--levels"])
        .arg(levels())
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["budget"], 120.0);
    assert_eq!(report["levels"].as_array().unwrap().len(), 12);
}

#[test]
fn tournament_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let config = serde_json::json!({
        "levels_dir": levels(),
        "runs_dir": dir.path().join("runs"),
        "agents": [
            {"id": "a", "kind": "naive", "seed": 1},
            {"id": "b", "kind": "blocking"},
        ],
        "stages": [{"name": "grandfinal", "levels": ["L01", "L02", "L03", "L04", "L05", "L06", "L07", "L08"]}],
    });
    let path = dir.path().join("t.json");
    std::fs::write(&path, config.to_string()).unwrap();
    let out = bin()
        .args(["--time-scale", "0.05", "tournament", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    assert!(text.contains("champion: "), "{text}");

    let out = bin()
        .arg("replay")
        .arg("--run")
        .arg(dir.path().join("runs/grandfinal"))
        .arg("--levels")
        .arg(levels())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("replay matches"));
}

#[test]
fn unknown_agent_kind_is_refused() {
    let out = bin().args(["benchmark", "--agent", "oracle"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("unknown agent kind"));
}
