use tep_core::bigm::BigMKind;
use tep_core::formulation::{FormulationKind, PrepareOptions, Prepared};
use tep_core::instancegen::{fixture, generate, InstanceSpec, FIXTURE_NAMES};
use tep_core::netmodel::NetworkBuilder;
use tep_core::verify::{bounds_overlap, line_removal_optimum, negative_control, run_oracle, OracleConfig, OracleViolation};
use tep_milp::Tolerances;

#[test]
fn fixtures_pass_the_oracle() {
    let cfg = OracleConfig::default();
    for name in FIXTURE_NAMES {
        let net = fixture(name).unwrap();
        let prep = Prepared::new(&net, &PrepareOptions::default());
        let r = run_oracle(&net, &prep, &prep.bigm, &cfg).unwrap();
        assert!(r.passed(), "{name}: {:?}", r.violations);
        let expected = if name.starts_with('D') { 1 } else { 2 };
        assert_eq!(r.formulations.len(), expected, "{name}");
        for f in &r.formulations {
            assert_eq!(f.assignments, 1 << net.n_candidates());
            assert!(f.min_gated_slack >= 1e-6);
            assert!(f.max_removal_diff <= 1e-6);
        }
        if name.starts_with('D') {
            assert_eq!(r.skipped[0].0, FormulationKind::Angle);
        }
    }
}

#[test]
fn halving_any_value_is_caught_on_ring_fixtures() {
    let cfg = OracleConfig::default();
    for name in ["B.1", "B.2"] {
        let net = fixture(name).unwrap();
        let prep = Prepared::new(&net, &PrepareOptions::default());
        let outcomes = negative_control(&net, &prep, &cfg).unwrap();
        assert_eq!(outcomes.len(), prep.bigm.len());
        for o in &outcomes {
            assert!(o.detected, "{name}: halving {}:{} went unnoticed", o.kind.prefix(), o.key);
        }
    }
}

#[test]
fn halved_value_shows_as_binding_row() {
    let net = fixture("A.1").unwrap();
    let prep = Prepared::new(&net, &PrepareOptions::default());
    let mut half = prep.bigm.clone();
    half.set(BigMKind::KvlAngle, "c1", 50.0);
    let r = run_oracle(&net, &prep, &half, &OracleConfig::default()).unwrap();
    assert!(r.violations.iter().any(|v| matches!(v,
        OracleViolation::BindingRow { formulation: FormulationKind::Angle, row, .. } if row.starts_with("kvlm:c1"))));
    assert!(r.violations.iter().any(|v| matches!(v, OracleViolation::RemovalMismatch { .. })));
}

#[test]
fn network_without_candidates_passes() {
    let spec = InstanceSpec {
        candidate_corridors: 0,
        ..Default::default()
    };
    let net = generate(&spec).unwrap();
    let prep = Prepared::new(&net, &PrepareOptions::default());
    let r = run_oracle(&net, &prep, &prep.bigm, &OracleConfig::default()).unwrap();
    assert!(r.passed());
    assert!(r.formulations.iter().all(|f| f.assignments == 1 && f.min_gated_slack.is_infinite()));
}

#[test]
fn too_many_binaries_is_an_error() {
    let net = fixture("D.2").unwrap();
    let prep = Prepared::new(&net, &PrepareOptions::default());
    let cfg = OracleConfig {
        max_binaries: 3,
        ..Default::default()
    };
    assert!(run_oracle(&net, &prep, &prep.bigm, &cfg).is_err());
}

#[test]
fn removal_optimum_adds_capital_cost() {
    let mut b = NetworkBuilder::new(1, 1.0);
    b.bus_flat("a", 0.0).bus_flat("b", 10.0);
    b.candidate("c", "a", "b", 0.1, 100.0, 5.0);
    b.simple_generator("g", "a", 1.0, 0.0);
    b.simple_generator("h", "b", 3.0, 0.0);
    let net = b.build().unwrap();
    let tol = Tolerances::default();
    let off = line_removal_optimum(&net, &[false], &tol).unwrap().unwrap();
    let on = line_removal_optimum(&net, &[true], &tol).unwrap().unwrap();
    assert!((off - 30.0).abs() < 1e-7);
    assert!((on - 15.0).abs() < 1e-7);
}

#[test]
fn bound_overlap_rule() {
    assert!(bounds_overlap((10.0, 9.0), (10.5, 9.5), 1e-9));
    assert!(!bounds_overlap((10.0, 9.9), (12.0, 11.0), 1e-9));
    assert!(!bounds_overlap((12.0, 11.0), (10.0, 9.9), 1e-9));
}
