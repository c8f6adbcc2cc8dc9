use tep_core::bench::{control_race, median, run_benchmark, BenchCase, BenchConfig, BenchError, SpecMatrix, Summary, CSV_HEADER};
use tep_core::formulation::FormulationKind;
use tep_core::instancegen::{generate, InstanceSpec};

fn quick() -> BenchConfig {
    BenchConfig {
        repeats: 1,
        ..Default::default()
    }
}

fn records(bytes: &[u8]) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(bytes).records().map(|r| r.unwrap()).collect()
}

#[test]
fn two_instances_give_two_rows_and_summary() {
    let cases = vec![
        BenchCase::Fixture { fixture: "B.1".into() },
        BenchCase::Spec(InstanceSpec::default()),
    ];
    let mut out = Vec::new();
    let rows = run_benchmark(&cases, &quick(), &mut out).unwrap();
    assert_eq!(rows.len(), 2);
    let recs = records(&out);
    assert_eq!(recs.len(), 2 + 4);
    let labels: Vec<&str> = recs[2..].iter().map(|r| &r[0]).collect();
    assert_eq!(labels, ["mean", "median", "max", "min"]);
    let header = csv::Reader::from_reader(out.as_slice()).headers().unwrap().clone();
    assert_eq!(header.iter().collect::<Vec<_>>(), CSV_HEADER);

    for (row, rec) in rows.iter().zip(&recs) {
        let a = row.angle.as_ref().unwrap();
        let c = row.cycle.as_ref().unwrap();
        let speedup: f64 = rec[26].parse().unwrap();
        assert!((speedup - a.solve_seconds / c.solve_seconds).abs() <= 1e-12 * speedup);
        let vr: f64 = rec[20].parse().unwrap();
        let identity = 1.0 - (row.buses * row.snapshots) as f64 / a.stats.columns as f64;
        assert!((vr - identity).abs() < 1e-12);
        assert_eq!(rec[10].parse::<usize>().unwrap(), a.stats.columns);
    }
    let speeds: Vec<f64> = rows.iter().filter_map(|r| r.speedup()).collect();
    let s = Summary::of(&speeds).unwrap();
    assert_eq!(recs[2][26].parse::<f64>().unwrap(), s.mean);
    assert_eq!(recs[5][26].parse::<f64>().unwrap(), s.min);
}

#[test]
fn unsupported_and_failing_cases() {
    let cases = vec![
        BenchCase::Fixture { fixture: "D.1".into() },
        BenchCase::Fixture { fixture: "nope".into() },
        BenchCase::Fixture { fixture: "A.1".into() },
    ];
    let mut out = Vec::new();
    let rows = run_benchmark(&cases, &quick(), &mut out).unwrap();
    assert_eq!(rows.len(), 2);
    let recs = records(&out);
    assert_eq!(&recs[0][5], "unsupported");
    assert_eq!(&recs[0][26], "");
    assert_eq!(&recs[1][0], "A.1");
}

#[test]
fn deterministic_columns_repeat() {
    let cases = vec![BenchCase::Spec(InstanceSpec::default())];
    let strip = |bytes: Vec<u8>| -> Vec<Vec<String>> {
        records(&bytes).iter().take(1).map(|r| r.iter().take(22).map(String::from).collect()).collect()
    };
    let mut a = Vec::new();
    let mut b = Vec::new();
    run_benchmark(&cases, &quick(), &mut a).unwrap();
    run_benchmark(&cases, &BenchConfig { jobs: 2, ..quick() }, &mut b).unwrap();
    assert_eq!(strip(a), strip(b));
}

#[test]
fn grid_matrix_expands() {
    let m: SpecMatrix = serde_json::from_str(r#"{"base": {"seed": 3, "n_buses": 4, "mesh_degree": 1.2, "n_zones": 1,
        "candidates_per_corridor": 1, "candidate_corridors": 1, "n_snapshots": 1, "renewable_share": 0.3,
        "co2_budget_fraction": null, "zone_cycle": false},
        "axes": {"n_buses": [4, 6, 8], "seed": [1, 2]}}"#)
    .unwrap();
    let cases = m.cases().unwrap();
    assert_eq!(cases.len(), 6);
    let m: SpecMatrix = serde_json::from_str(r#"{"axes": {"bogus": [1]}}"#).unwrap();
    assert!(matches!(m.cases(), Err(BenchError::Matrix(_))));
    let m: SpecMatrix = serde_json::from_str(r#"[{"fixture": "A.1"}]"#).unwrap();
    assert_eq!(m.cases().unwrap(), vec![BenchCase::Fixture { fixture: "A.1".into() }]);
}

#[test]
fn control_race_is_near_one() {
    let spec = InstanceSpec {
        n_buses: 10,
        candidate_corridors: 0,
        n_snapshots: 3,
        ..Default::default()
    };
    let net = generate(&spec).unwrap();
    let row = control_race(&net, FormulationKind::Angle, &BenchConfig { repeats: 5, ..Default::default() }).unwrap();
    let s = row.speedup().unwrap();
    assert!((0.2..=5.0).contains(&s), "{s}");
    assert_eq!(row.variable_ratio(), Some(1.0));
}

#[test]
fn medians() {
    assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    assert!(median(&[]).is_nan());
}
