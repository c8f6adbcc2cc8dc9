use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tep_milp::lpfile::parse_lp;
use tep_milp::{solve_milp, MilpConfig};

fn tep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tep")).args(args).output().expect("run tep")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn strip_timings(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("timings");
            m.values_mut().for_each(strip_timings);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

#[test]
fn both_formulations_agree_on_ring() {
    let out = tep(&["solve", "fixture:B.1", "--formulation", "both", "--mip-gap", "0"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["cross_check"]["passed"], true);
    let r = v["results"].as_array().unwrap();
    assert_eq!(r.len(), 2);
    let (a, c) = (r[0]["objective_upper"].as_f64().unwrap(), r[1]["objective_upper"].as_f64().unwrap());
    assert!((a - c).abs() <= 1e-6 * a.abs());
    assert_eq!(r[0]["built"], serde_json::json!(["c1"]));
    assert_eq!(r[1]["status"], "optimal");
    assert!(r[1]["report"]["residuals"]["kcl"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn zone_cycle_rejects_angle_only() {
    assert_eq!(code(&tep(&["solve", "fixture:D.1", "--formulation", "angle"])), 4);
    let out = tep(&["solve", "fixture:D.1", "--formulation", "cycle", "--mip-gap", "0"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["results"][0]["status"], "optimal");
    let both = tep(&["solve", "fixture:D.1", "--formulation", "both"]);
    assert_eq!(code(&both), 4);
    let v = json(&both);
    assert_eq!(v["results"].as_array().unwrap().len(), 1);
    assert_eq!(v["skipped"][0][0], "angle");
}

#[test]
fn time_limit_keeps_valid_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net");
    let args = [
        "generate", "--out", net.to_str().unwrap(), "--seed", "3", "--buses", "12", "--zones", "3",
        "--corridors", "4", "--per-corridor", "2", "--snapshots", "3",
    ];
    assert_eq!(code(&tep(&args)), 0);
    let out = tep(&["solve", net.to_str().unwrap(), "--formulation", "both", "--time-limit", "0", "--mip-gap", "0"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    for r in v["results"].as_array().unwrap() {
        assert_eq!(r["status"], "time_limit");
        assert!(r["objective_upper"].as_f64().unwrap() >= r["objective_lower"].as_f64().unwrap());
    }
}

#[test]
fn solve_output_is_reproducible() {
    let run = || {
        let mut v = json(&tep(&["solve", "fixture:C.3", "--formulation", "both"]));
        strip_timings(&mut v);
        v
    };
    assert_eq!(run(), run());
}

#[test]
fn dump_graph_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("graph.txt");
    let out = tep(&["solve", "fixture:C.2", "--dump-graph", dump.to_str().unwrap(), "--table"]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&dump).unwrap();
    assert!(text.lines().any(|l| l.ends_with(" slack")));
    assert!(String::from_utf8_lossy(&out.stderr).contains("objective"));
}

#[test]
fn verify_passes_on_fixtures() {
    for name in ["A.1", "A.2", "A.3", "B.1", "B.2", "C.1", "C.2", "C.3", "D.1", "D.2"] {
        let out = tep(&["verify", &format!("fixture:{name}")]);
        assert_eq!(code(&out), 0, "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(json(&out)["report"]["violations"].as_array().unwrap().is_empty());
    }
}

#[test]
fn halved_big_m_fails_verification() {
    let out = tep(&["verify", "fixture:B.1", "--bigm-override", "kvl:c1=100"]);
    assert_eq!(code(&out), 6);
    assert!(!json(&out)["report"]["violations"].as_array().unwrap().is_empty());
    let out = tep(&["verify", "fixture:B.1", "--bigm-scale", "0.5"]);
    assert_eq!(code(&out), 6);
    let out = tep(&["verify", "fixture:B.1", "--negative-control"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["negative_control"].as_array().unwrap().iter().all(|c| c["detected"] == true));
    assert_eq!(code(&tep(&["verify", "fixture:B.1", "--bigm-override", "kvl:zz=1"])), 3);
    assert_eq!(code(&tep(&["verify", "fixture:B.1", "--bigm-override", "nonsense"])), 3);
}

#[test]
fn verify_binary_cap_and_empty_network() {
    assert_eq!(code(&tep(&["verify", "fixture:D.2", "--max-binaries", "3"])), 7);
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("n.json");
    let args = ["generate", "--out", net.to_str().unwrap(), "--format", "json", "--corridors", "0"];
    assert_eq!(code(&tep(&args)), 0);
    let out = tep(&["verify", net.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
}

#[test]
fn bigm_report_lists_every_value() {
    let out = tep(&["bigm-report", "fixture:C.3"]);
    assert_eq!(code(&out), 0);
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), ["kind", "key", "rule", "value", "members", "terms"]);
    let rows: Vec<csv::StringRecord> = r.records().map(|r| r.unwrap()).collect();
    let count = |k: &str| rows.iter().filter(|r| &r[0] == k).count();
    assert_eq!((count("kvl"), count("slack"), count("cycle")), (3, 3, 1));
    let cyc = rows.iter().find(|r| &r[0] == "cycle").unwrap();
    assert_eq!(&cyc[4], "c1;l7;c2;l3");
    assert!(rows.iter().filter(|r| &r[0] == "slack").all(|r| &r[2] == "slack"));
}

#[test]
fn exported_lp_solves_to_same_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let lp = dir.path().join("m.lp");
    assert_eq!(code(&tep(&["export", "fixture:B.2", "--formulation", "angle", "--out", lp.to_str().unwrap()])), 0);
    let p = parse_lp(&std::fs::read_to_string(&lp).unwrap()).unwrap();
    let s = solve_milp(&p, &MilpConfig::exact()).unwrap();
    let solved = json(&tep(&["solve", "fixture:B.2", "--formulation", "angle", "--mip-gap", "0"]));
    let obj = solved["results"][0]["objective_upper"].as_f64().unwrap();
    assert!((s.objective() - obj).abs() <= 1e-9 * obj.abs());
    let mps = tep(&["export", "fixture:B.2", "--format", "mps"]);
    assert_eq!(code(&mps), 0);
    assert!(String::from_utf8_lossy(&mps.stdout).contains("ENDATA"));
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let args = ["generate", "--out", d.to_str().unwrap(), "--seed", "7", "--zones", "2", "--snapshots", "2"];
        assert_eq!(code(&tep(&args)), 0);
    }
    for f in ["buses.csv", "lines.csv", "generators.csv", "load.csv", "availability.csv", "snapshots.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let fx = dir.path().join("fx.json");
    assert_eq!(code(&tep(&["generate", "--fixture", "B.1", "--format", "json", "--out", fx.to_str().unwrap()])), 0);
    assert_eq!(code(&tep(&["solve", fx.to_str().unwrap()])), 0);
}

#[test]
fn benchmark_writes_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("m.json");
    std::fs::write(&matrix, r#"[{"fixture": "B.1"}, {"fixture": "A.3"}]"#).unwrap();
    let csv_path = dir.path().join("out.csv");
    let out = tep(&["benchmark", matrix.to_str().unwrap(), "--repeats", "1", "--out", csv_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let mut r = csv::Reader::from_path(&csv_path).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(&rows[0][0], "B.1");
    assert_eq!(&rows[5][0], "min");

    let out = tep(&["benchmark", "--suite", "2", "--repeats", "1", "--jobs", "2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(csv::Reader::from_reader(out.stdout.as_slice()).records().count(), 6);

    std::fs::write(&matrix, "{not json").unwrap();
    assert_eq!(code(&tep(&["benchmark", matrix.to_str().unwrap()])), 3);
    assert_eq!(code(&tep(&["benchmark"])), 3);
}

#[test]
fn input_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = tep(&["solve", dir.path().join("missing").to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing"));
    let net = dir.path().join("net");
    assert_eq!(code(&tep(&["generate", "--fixture", "A.1", "--out", net.to_str().unwrap()])), 0);
    let lines = std::fs::read_to_string(net.join("lines.csv")).unwrap();
    let broken = lines.replacen("0.1", "abc", 1);
    assert_ne!(broken, lines);
    std::fs::write(net.join("lines.csv"), broken).unwrap();
    let out = tep(&["solve", net.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("lines.csv"));
    assert_eq!(code(&tep(&["solve"])), 2);
    assert_eq!(code(&tep(&["solve", "fixture:A.1", "--formulation", "polar"])), 2);
    assert!(Path::new(env!("CARGO_BIN_EXE_tep")).exists());
}
