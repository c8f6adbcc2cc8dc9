use tep_core::formulation::{FormulationConfig, FormulationKind, PrepareOptions, Prepared};
use tep_core::instancegen::{fixture, FIXTURE_NAMES};
use tep_core::netmodel::{Network, NetworkBuilder};
use tep_core::postproc::{recover_angles, verify_solution, Check, PostprocError, SolutionPoint, VerifyTolerances};
use tep_milp::{solve_milp, MilpConfig};

fn two_bus() -> Network {
    let mut b = NetworkBuilder::new(1, 8760.0);
    b.bus_flat("b0", 0.0).bus_flat("b1", 10.0);
    b.existing("l0", "b0", "b1", 0.1, 100.0);
    b.simple_generator("g0", "b0", 1.0, 0.0);
    b.build().unwrap()
}

fn solved(net: &Network, kind: FormulationKind) -> Option<SolutionPoint> {
    let prep = Prepared::new(net, &PrepareOptions::default());
    let m = prep.build(net, &FormulationConfig::new(kind)).ok()?;
    let s = solve_milp(&m.problem, &MilpConfig::exact()).unwrap();
    Some(SolutionPoint::from_model(net, &m, &s).unwrap())
}

#[test]
fn two_bus_angles() {
    let net = two_bus();
    let theta = recover_angles(&net, &[true], &[vec![10.0, -10.0]]).unwrap();
    assert!(theta[0][0].abs() < 1e-12);
    assert!((theta[0][1] + 1.0).abs() < 1e-12);
    let zero = recover_angles(&net, &[true], &[vec![0.0, 0.0]]).unwrap();
    assert_eq!(zero, vec![vec![0.0, 0.0]]);
}

#[test]
fn unbalanced_injections_are_rejected() {
    let net = two_bus();
    match recover_angles(&net, &[true], &[vec![10.0, -9.0]]) {
        Err(PostprocError::UnbalancedInjections { slack, t, .. }) => {
            assert_eq!(slack, "b0");
            assert_eq!(t, 0);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn built_chord_flows_follow_angles() {
    let net = fixture("B.1").unwrap();
    let point = solved(&net, FormulationKind::Cycle).unwrap();
    assert_eq!(point.built_ids(&net), ["c1"]);
    let theta = recover_angles(&net, &point.built, &point.injections(&net)).unwrap();
    for (k, l) in net.lines().iter().enumerate() {
        let (a, b) = net.ends(k);
        let f = (theta[0][a] - theta[0][b]) / l.x;
        assert!((f - point.flows[k][0]).abs() < 1e-6, "{}", l.id);
    }
}

#[test]
fn angles_shift_with_slack_choice_only() {
    let net = fixture("B.1").unwrap();
    let point = solved(&net, FormulationKind::Cycle).unwrap();
    let inj = point.injections(&net);
    let base = recover_angles(&net, &point.built, &inj).unwrap();
    // renaming n1 moves the slack of the single zone to n2
    let (mut buses, mut lines, mut gens, snaps, co2) = net.clone().into_parts();
    let rename = |s: &mut String| {
        if s == "n1" {
            *s = "z1".into();
        }
    };
    buses.iter_mut().for_each(|b| rename(&mut b.id));
    for l in &mut lines {
        rename(&mut l.from_bus);
        rename(&mut l.to_bus);
    }
    gens.iter_mut().for_each(|g| rename(&mut g.bus));
    let renamed = Network::new(buses, lines, gens, snaps, co2).unwrap();
    let moved = recover_angles(&renamed, &point.built, &inj).unwrap();
    let n2 = net.bus_pos("n2").unwrap();
    assert!(moved[0][n2].abs() < 1e-12);
    let shift = base[0][n2];
    for b in 0..net.n_buses() {
        assert!((moved[0][b] - (base[0][b] - shift)).abs() < 1e-9);
    }
}

#[test]
fn tree_solution_checks_kcl_only() {
    let net = two_bus();
    let point = solved(&net, FormulationKind::Angle).unwrap();
    let report = verify_solution(&net, &point, &VerifyTolerances::default()).unwrap();
    assert!(report.snapshots[0].kvl_residuals.is_empty());
    assert!((report.snapshots[0].flows["l0"] - 10.0).abs() < 1e-7);
    assert!((report.snapshots[0].loading["l0"] - 0.1).abs() < 1e-9);
    assert!((report.snapshots[0].angles["b1"] + 1.0).abs() < 1e-7);
}

#[test]
fn perturbed_flow_fails_kcl() {
    let net = fixture("B.1").unwrap();
    let mut point = solved(&net, FormulationKind::Angle).unwrap();
    point.flows[net.line_pos("l3").unwrap()][0] += 1.0;
    let err = verify_solution(&net, &point, &VerifyTolerances::default()).unwrap_err();
    assert!(err.violations.iter().any(|v| v.check == Check::Kcl));
    assert!(err.to_string().contains("kcl"));
}

#[test]
fn flow_on_unbuilt_candidate_is_flagged() {
    let net = fixture("A.1").unwrap();
    let mut point = solved(&net, FormulationKind::Cycle).unwrap();
    let c1 = net.line_pos("c1").unwrap();
    point.built[c1] = false;
    let err = verify_solution(&net, &point, &VerifyTolerances::default()).unwrap_err();
    assert!(err.violations.iter().any(|v| v.check == Check::Unbuilt && v.entity == "c1"));
}

#[test]
fn every_fixture_solution_passes() {
    for name in FIXTURE_NAMES {
        let net = fixture(name).unwrap();
        for kind in [FormulationKind::Angle, FormulationKind::Cycle] {
            let Some(point) = solved(&net, kind) else { continue };
            let report = verify_solution(&net, &point, &VerifyTolerances::default())
                .unwrap_or_else(|e| panic!("{name} {kind}: {e}"));
            assert!(report.residuals.max_loading <= 1.0 + 1e-6);
            let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
            assert_eq!(json["built"].as_array().unwrap().len(), report.built.len());
            let table = report.table();
            assert!(table.contains("objective"));
            for l in net.lines().iter().filter(|l| !l.is_candidate()) {
                assert!(table.contains(&l.id));
            }
        }
    }
}

#[test]
fn zones_after_investment_merge() {
    let net = fixture("C.3").unwrap();
    let point = solved(&net, FormulationKind::Angle).unwrap();
    let report = verify_solution(&net, &point, &VerifyTolerances::default()).unwrap();
    assert_eq!(report.built.len(), 3);
    assert_eq!(report.zones.len(), 1);
}
