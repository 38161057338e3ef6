use std::path::Path;
use std::process::{Command, Output};

use swingvi_core::scenario::{builtin_case, load_scenario, save_scenario, Scenario};

fn swingvi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swingvi")).args(args).output().expect("binary runs")
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn out_arg(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

#[test]
fn simulate_case_e1_variable_is_unstable() {
    let tmp = tempfile::tempdir().unwrap();
    let out = swingvi(&["simulate", "caseE1", "--strategy", "variable", "--out", out_arg(tmp.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s = summary(tmp.path());
    assert_eq!(s["verdict"]["classification"], "Unstable");
    assert!(s["boundary_angles"]["delta_th"].as_f64().unwrap() > 1.11);

    let mut rdr = csv::Reader::from_path(tmp.path().join("record.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["t", "delta", "omega_dev", "i_mag", "zapp_re", "zapp_im", "p_e", "vi_r", "vi_x", "psb", "ost"]
    );
    assert_eq!(rdr.records().count(), 60_001);
    let events = std::fs::read_to_string(tmp.path().join("relay_events.csv")).unwrap();
    assert!(events.starts_with("t,event,target\n"));
    assert!(events.contains("psb_asserted"));
}

#[test]
fn adaptive_trajectory_csv_lies_on_circle() {
    let tmp = tempfile::tempdir().unwrap();
    let out = swingvi(&["trajectory", "--strategy", "adaptive", "--samples", "720", "--out", out_arg(tmp.path())]);
    assert!(out.status.success());
    let p = swingvi_core::SystemParams::default();
    let center = p.z_relay_to_grid();
    let mut rdr = csv::Reader::from_path(tmp.path().join("trajectory.csv")).unwrap();
    let mut active = 0;
    for row in rdr.records() {
        let row = row.unwrap();
        if &row[3] == "active_adaptive" {
            let z = swingvi_core::Phasor::new(row[1].parse().unwrap(), row[2].parse().unwrap());
            assert!(((z - center).norm() - p.v_g_mag / p.i_max).abs() < 1e-12);
            active += 1;
        }
    }
    assert!(active > 100);
}

#[test]
fn pdelta_csv_has_all_curves() {
    let tmp = tempfile::tempdir().unwrap();
    let out = swingvi(&["pdelta", "--samples", "101", "--out", out_arg(tmp.path())]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(tmp.path().join("pdelta.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("delta,p_none,p_variable,vi_active_variable,p_adaptive,vi_active_adaptive"));
    assert_eq!(lines.count(), 101);
}

#[test]
fn sweep_larger_inertia_swings_slower() {
    let tmp = tempfile::tempdir().unwrap();
    let out = swingvi(&["sweep", "--case", "caseC1", "--h", "3,9", "--out", out_arg(tmp.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(tmp.path().join("sweep.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    let period = |r: &csv::StringRecord| r[6].parse::<f64>().unwrap();
    assert_eq!(&rows[0][0], "3");
    assert!(period(&rows[1]) > period(&rows[0]), "{} vs {}", &rows[1][6], &rows[0][6]);
}

#[test]
fn identical_scenarios_give_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("s.json");
    let mut s = builtin_case("caseB2").unwrap();
    s.horizon = 6.0;
    s.events.retain(|e| e.time < 6.0);
    save_scenario(&s, &path).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let out = swingvi(&["simulate", "--scenario", path.to_str().unwrap(), "--out", out_arg(dir)]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["record.csv", "relay_events.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn scenario_file_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    for id in swingvi_core::scenario::CASE_IDS {
        let path = tmp.path().join(format!("{id}.json"));
        let out = swingvi(&["case", id]);
        std::fs::write(&path, &out.stdout).unwrap();
        let loaded = load_scenario(&path).unwrap();
        assert_eq!(loaded, builtin_case(id).unwrap());
        save_scenario(&loaded, &path).unwrap();
        assert_eq!(load_scenario(&path).unwrap(), loaded);
    }
}

#[test]
fn bad_inputs_fail_with_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty.json");
    std::fs::write(&empty, "").unwrap();
    let out = swingvi(&["simulate", "--scenario", empty.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("parse error at line 1"));

    let invalid = tmp.path().join("invalid.json");
    let s = Scenario { dt: -1.0, ..Scenario::default() };
    std::fs::write(&invalid, s.to_json().unwrap()).unwrap();
    let out = swingvi(&["simulate", "--scenario", invalid.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt must be positive"));

    let out = swingvi(&["simulate", "caseQ"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown case id"));

    let out = swingvi(&["simulate", "caseA1", "--strategy", "bogus"]);
    assert!(!out.status.success());
}
