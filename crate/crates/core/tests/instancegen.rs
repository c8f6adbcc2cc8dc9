use proptest::prelude::*;
use tep_core::graph::{slack_relaxation_plan, SlackStrategy, SubnetworkGraph};
use tep_core::instancegen::{desk_suite, fixture, fixtures, generate, GenerationError, InstanceSpec, FIXTURE_NAMES};
use tep_core::netmodel::{network_to_json, synchronous_zones};
use tep_core::verify::line_removal_optimum;
use tep_milp::Tolerances;

#[test]
fn minimal_spec_is_two_bus_line() {
    let spec = InstanceSpec {
        seed: 1,
        n_buses: 2,
        mesh_degree: 0.5,
        candidate_corridors: 0,
        ..Default::default()
    };
    let net = generate(&spec).unwrap();
    assert_eq!(net.n_buses(), 2);
    assert_eq!(net.lines().len(), 1);
    assert_eq!(net.n_candidates(), 0);
    assert_eq!(synchronous_zones(&net).len(), 1);
}

#[test]
fn zone_cycle_spec_breaks_forest() {
    let spec = InstanceSpec {
        seed: 4,
        n_buses: 9,
        n_zones: 3,
        candidate_corridors: 3,
        zone_cycle: true,
        ..Default::default()
    };
    let net = generate(&spec).unwrap();
    let zones = synchronous_zones(&net);
    assert_eq!(zones.len(), 3);
    let gs = SubnetworkGraph::new(&net, &zones);
    assert!(slack_relaxation_plan(&gs, &net, &SlackStrategy::BreadthFirstCentral).is_err());
    let tree = InstanceSpec { zone_cycle: false, ..spec };
    let net = generate(&tree).unwrap();
    let zones = synchronous_zones(&net);
    let gs = SubnetworkGraph::new(&net, &zones);
    assert!(slack_relaxation_plan(&gs, &net, &SlackStrategy::BreadthFirstCentral).is_ok());
}

#[test]
fn surplus_corridors_between_single_bus_zones_stay_a_forest() {
    // every corridor must be inter-zone here, so the extras run parallel to the tree
    for seed in 0..40 {
        let spec = InstanceSpec {
            seed,
            n_buses: 4,
            n_zones: 4,
            candidate_corridors: 6,
            ..Default::default()
        };
        let net = generate(&spec).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        let zones = synchronous_zones(&net);
        assert_eq!(zones.len(), 4);
        assert_eq!(net.n_candidates(), 6);
        let gs = SubnetworkGraph::new(&net, &zones);
        assert!(slack_relaxation_plan(&gs, &net, &SlackStrategy::BreadthFirstCentral).is_ok());
    }
}

#[test]
fn same_seed_same_bytes() {
    for spec in desk_suite(20, 99) {
        assert_eq!(network_to_json(&generate(&spec).unwrap()), network_to_json(&generate(&spec).unwrap()));
    }
    let a = InstanceSpec::default();
    let b = InstanceSpec { seed: 2, ..a.clone() };
    assert_ne!(network_to_json(&generate(&a).unwrap()), network_to_json(&generate(&b).unwrap()));
}

#[test]
fn invalid_specs_are_rejected() {
    let base = InstanceSpec::default();
    for bad in [
        InstanceSpec { n_buses: 1, ..base.clone() },
        InstanceSpec { n_zones: 7, ..base.clone() },
        InstanceSpec { candidates_per_corridor: 3, ..base.clone() },
        InstanceSpec { n_snapshots: 0, ..base.clone() },
        InstanceSpec { n_zones: 2, zone_cycle: true, ..base.clone() },
        InstanceSpec { n_zones: 4, candidate_corridors: 2, ..base.clone() },
        InstanceSpec { co2_budget_fraction: Some(0.0), ..base.clone() },
    ] {
        assert!(matches!(generate(&bad), Err(GenerationError::InvalidSpec(_))), "{bad:?}");
    }
}

#[test]
fn suite_covers_the_ranges() {
    let suite = desk_suite(200, 7);
    assert_eq!(suite.len(), 200);
    for s in &suite {
        assert!((2..=12).contains(&s.n_buses));
        assert!((1..=4).contains(&s.n_zones));
        assert!(s.n_candidates() <= 8);
        assert!((1..=3).contains(&s.n_snapshots));
    }
    assert!(suite.iter().any(|s| s.zone_cycle));
    assert!(suite.iter().any(|s| s.n_zones == 4));
    assert!(suite.iter().any(|s| s.candidates_per_corridor == 2));
    assert!(suite.iter().any(|s| s.co2_budget_fraction.is_some()));
}

#[test]
fn investment_is_sometimes_worth_it() {
    use tep_core::formulation::{FormulationConfig, FormulationKind, PrepareOptions, Prepared};
    use tep_milp::{solve_milp, MilpConfig};
    let mut some = 0;
    let mut none = 0;
    for spec in desk_suite(40, 11) {
        let net = generate(&spec).unwrap();
        let prep = Prepared::new(&net, &PrepareOptions::default());
        let m = prep.build(&net, &FormulationConfig::new(FormulationKind::Cycle)).unwrap();
        let s = solve_milp(&m.problem, &MilpConfig::exact()).unwrap();
        let built = m.problem.binaries().filter(|&v| s.values[v.0] > 0.5).count();
        if built > 0 {
            some += 1;
        } else {
            none += 1;
        }
    }
    assert!(some > 0 && none > 0, "{some} built, {none} without investment");
}

#[test]
fn fixture_catalogue() {
    let all = fixtures();
    assert_eq!(all.keys().cloned().collect::<Vec<_>>(), FIXTURE_NAMES);
    let b1 = fixture("B.1").unwrap();
    assert_eq!((b1.n_buses(), b1.n_existing(), b1.n_candidates()), (6, 6, 1));
    let c2 = fixture("C.2").unwrap();
    let zones = synchronous_zones(&c2);
    assert_eq!(zones.len(), 2);
    let cands: Vec<usize> = c2.candidate_lines().collect();
    assert_eq!(cands.len(), 2);
    assert!(cands.iter().all(|&k| {
        let (a, b) = c2.ends(k);
        !zones.same_zone(a, b)
    }));
    let d2 = fixture("D.2").unwrap();
    let zones = synchronous_zones(&d2);
    assert_eq!(zones.len(), 3);
    assert_eq!(d2.n_candidates(), 6);
    assert!(d2.candidate_lines().all(|k| {
        let (a, b) = d2.ends(k);
        !zones.same_zone(a, b)
    }));
    assert!(fixture("Z.9").is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_instances_are_valid_and_feasible(seed in 0u64..100_000, i in 0usize..8) {
        let spec = desk_suite(8, seed)[i].clone();
        let net = generate(&spec).unwrap();
        prop_assert_eq!(net.n_buses(), spec.n_buses);
        prop_assert_eq!(net.n_candidates(), spec.n_candidates());
        prop_assert_eq!(synchronous_zones(&net).len(), spec.n_zones);
        let hours: f64 = net.snapshots().iter().map(|s| s.weight).sum();
        prop_assert!((hours - 8760.0).abs() < 1e-6);
        let nothing = vec![false; net.lines().len()];
        prop_assert!(line_removal_optimum(&net, &nothing, &Tolerances::default()).unwrap().is_some());
    }
}
