use std::path::Path;
use std::process::Command;

use tubelog::comb::CheckStatus;
use tubelog_cli::artifacts::{atlases, curves_csv, Artifacts};
use tubelog_cli::{exit, run_construct, run_verify, RunConfig, VerificationReport};

fn tubelog(args: &[&str], dir: &Path) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_tubelog"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn config_file(dir: &Path, json: &str) -> String {
    let path = dir.join("run.json");
    std::fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_eq!(tubelog(&["frobnicate"], dir), exit::USAGE);
    assert_eq!(tubelog(&["verify", "--out", "empty"], dir), exit::USAGE);
    let bad = config_file(dir, r#"{"depht": 2}"#);
    assert_eq!(tubelog(&["construct", "--config", &bad], dir), exit::USAGE);
    // the certified search stops after a_0
    assert_eq!(tubelog(&["construct", "--out", "o"], dir), exit::FRONTIER);
    assert_eq!(tubelog(&["verify", "--out", "o", "--check", "monodromy"], dir), exit::OK);
    assert_eq!(tubelog(&["verify", "--out", "o"], dir), exit::CHECK_FAILED);
    assert_eq!(tubelog(&["verify", "--out", "o", "--depth", "1"], dir), exit::USAGE);
    assert_eq!(tubelog(&["render", "--out", "o"], dir), exit::OK);
    assert_eq!(tubelog(&["all", "--out", "p"], dir), exit::FRONTIER);
    assert_eq!(tubelog(&["--help"], dir), exit::OK);
}

#[test]
fn all_writes_every_artifact_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    tubelog(&["all", "--out", "a"], dir);
    tubelog(&["all", "--out", "b"], dir);
    let files = ["ledger.json", "curves_depth0.csv", "foliation.svg", "boundaries.svg", "comb.svg", "disk.svg"];
    for f in files {
        assert_eq!(read(&dir.join("a"), f), read(&dir.join("b"), f), "{f}");
    }
    // the report records the output directory, so compare it without that
    let strip = |p: &str| -> serde_json::Value {
        let mut v: serde_json::Value = serde_json::from_slice(&read(&dir.join(p), "report.json")).unwrap();
        v["config"]["output_dir"] = serde_json::Value::Null;
        v
    };
    assert_eq!(strip("a"), strip("b"));
    let report: VerificationReport = serde_json::from_slice(&read(&dir.join("a"), "report.json")).unwrap();
    assert_eq!(report.checks.len(), 12);
}

#[test]
fn depth_zero_gives_the_single_segment() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let cfg = config_file(dir, r#"{"depth": 0, "output_dir": "z", "emit": ["csv", "report"]}"#);
    // nonlinearisability fails at n = 0: P_0 sits just below h_0
    assert_eq!(tubelog(&["all", "--config", &cfg], dir), exit::CHECK_FAILED);
    let art = Artifacts::load(&dir.join("z")).unwrap();
    assert_eq!(art.ledger.h0, 10.0);
    assert_eq!(art.ledger.a_values(), vec![5]);
    let csv = String::from_utf8(read(&dir.join("z"), "curves_depth0.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("prefix,t,re,im,d1_re,d1_im"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 16);
    for r in &rows {
        assert_eq!(r[0], "root");
        assert_eq!(r[2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[1], r[3]);
    }
    assert_eq!(rows[0][3], "1e0");
    assert_eq!(rows[15][3], "2e0");
    assert!(!dir.join("z").join("comb.svg").exists());
}

#[test]
fn persisted_ledger_round_trips() {
    let config = RunConfig::default();
    let art = run_construct(&config);
    let tmp = tempfile::tempdir().unwrap();
    art.save(tmp.path()).unwrap();
    let back = Artifacts::load(tmp.path()).unwrap();
    assert_eq!(back, art);
    let text = std::fs::read_to_string(Artifacts::path(tmp.path())).unwrap();
    assert!(text.contains(r#""a": "5""#));
}

#[test]
fn tampered_ledger_fails_verification() {
    let config = RunConfig::default();
    let art = run_construct(&config);
    let tampered = Artifacts {
        ledger: art.ledger.with_a(0, 4),
        ..art.clone()
    };
    let atl = atlases(&config, &tampered).unwrap();
    let report = run_verify(&config, &tampered, &atl, Some("construction"));
    let c = report.check("construction").unwrap();
    assert_eq!(c.status, CheckStatus::Fail);
    assert!(c.measurements.iter().any(|m| !m.passed && m.label.starts_with("stage 0 min_a")));
}

#[test]
fn alpha_above_the_certified_one_is_not_a_failure() {
    let config = RunConfig {
        depth: 0,
        holder_alpha: Some(0.9),
        ..RunConfig::default()
    };
    let art = run_construct(&config);
    let atl = atlases(&config, &art).unwrap();
    let report = run_verify(&config, &art, &atl, Some("regularity"));
    assert_eq!(report.checks.len(), 1);
    assert_eq!(report.checks[0].status, CheckStatus::NotCertified);
    assert!(report.all_passed());
}

#[test]
fn curve_csv_parses_back_exactly() {
    let config = RunConfig {
        depth: 0,
        ..RunConfig::default()
    };
    let art = run_construct(&config);
    let atl = atlases(&config, &art).unwrap();
    let text = curves_csv(&atl[0]).unwrap();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    for (rec, p) in r.records().zip(&atl[0].curves[0].points) {
        let rec = rec.unwrap();
        assert_eq!(rec[1].parse::<f64>().unwrap(), p.t);
        assert_eq!(rec[4].parse::<f64>().unwrap(), p.derivs[0].re);
    }
}
