use std::fs;
use std::path::Path;

use proptest::prelude::*;
use tep_core::graph::rank::exact_rank;
use tep_core::instancegen::{desk_suite, fixture, generate, InstanceSpec};
use tep_core::netmodel::{
    load_network, load_network_csv, network_from_json, network_to_json, write_network_csv, write_network_json,
};
use tep_core::netmodel::{incidence_matrix, synchronous_zones, NetError, NetworkBuilder};

fn write(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

fn two_bus(dir: &Path) {
    write(dir, "snapshots.csv", "index,weight\n0,8760\n");
    write(dir, "buses.csv", "id,zone_hint\nb0,\nb1,\n");
    write(dir, "lines.csv", "id,from_bus,to_bus,x,F,kind,capital_cost,corridor,multiplicity\nl0,b0,b1,0.1,100,existing,,,\n");
}

#[test]
fn two_bus_network_loads() {
    let dir = tempfile::tempdir().unwrap();
    two_bus(dir.path());
    let net = load_network_csv(dir.path()).unwrap();
    assert_eq!(net.n_buses(), 2);
    assert_eq!(net.lines().len(), 1);
    assert_eq!(synchronous_zones(&net).len(), 1);
    assert_eq!(net.buses()[0].load, vec![0.0]);
}

#[test]
fn unknown_bus_names_offending_line() {
    let dir = tempfile::tempdir().unwrap();
    two_bus(dir.path());
    write(dir.path(), "lines.csv", "id,from_bus,to_bus,x,F,kind\nl0,b9,b1,0.1,100,existing\n");
    match load_network_csv(dir.path()) {
        Err(NetError::Validation { entity, rule }) => {
            assert_eq!(entity, "l0");
            assert_eq!(rule, "from_bus not found");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn missing_file_and_parse_errors_are_located() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_network_csv(dir.path()), Err(NetError::MissingFile(_))));
    two_bus(dir.path());
    write(dir.path(), "lines.csv", "id,from_bus,to_bus,x,F,kind\nl0,b0,b1,abc,100,existing\n");
    match load_network_csv(dir.path()) {
        Err(NetError::Parse { row, column, .. }) => {
            assert_eq!(row, 2);
            assert_eq!(column, "x");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn invalid_values_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    two_bus(dir.path());
    for (body, rule) in [
        ("l0,b0,b0,0.1,100,existing,", "from_bus equals to_bus"),
        ("l0,b0,b1,0,100,existing,", "x must be > 0"),
        ("l0,b0,b1,0.1,100,existing,5", "existing line with capital_cost"),
    ] {
        write(
            dir.path(),
            "lines.csv",
            &format!("id,from_bus,to_bus,x,F,kind,capital_cost\n{body}\n"),
        );
        match load_network_csv(dir.path()) {
            Err(NetError::Validation { rule: r, .. }) => assert!(r.contains(rule), "{r}"),
            other => panic!("{body}: unexpected {other:?}"),
        }
    }
}

#[test]
fn corridor_multiplicity_expands() {
    let dir = tempfile::tempdir().unwrap();
    two_bus(dir.path());
    write(
        dir.path(),
        "lines.csv",
        "id,from_bus,to_bus,x,F,kind,capital_cost,corridor,multiplicity\n\
         l0,b0,b1,0.1,100,existing,,,\n\
         c0,b0,b1,0.1,100,candidate,5000,,2\n",
    );
    let net = load_network_csv(dir.path()).unwrap();
    let ids: Vec<&str> = net.lines().iter().map(|l| l.id.as_str()).collect();
    assert_eq!(ids, ["l0", "c0#1", "c0#2"]);
    assert!(net.lines()[1..].iter().all(|l| l.corridor.as_deref() == Some("c0")));
    assert_eq!(net.n_candidates(), 2);
}

#[test]
fn load_and_availability_tables() {
    let dir = tempfile::tempdir().unwrap();
    two_bus(dir.path());
    write(dir.path(), "snapshots.csv", "index,weight\n0,4000\n1,4760\n");
    write(dir.path(), "load.csv", "bus,0,1\nb1,10,20\n");
    write(
        dir.path(),
        "generators.csv",
        "id,bus,marginal_cost,capital_cost,p_nom_max,emission_rate\ng0,b0,10,100,,0.5\ng1,b1,0,200,inf,0\n",
    );
    write(dir.path(), "availability.csv", "generator,0,1\ng1,0.5,0.25\n");
    write(dir.path(), "meta.csv", "key,value\nco2_budget,1000\n");
    let net = load_network_csv(dir.path()).unwrap();
    assert_eq!(net.buses()[1].load, vec![10.0, 20.0]);
    assert_eq!(net.buses()[0].load, vec![0.0, 0.0]);
    assert_eq!(net.generators()[0].availability, vec![1.0, 1.0]);
    assert_eq!(net.generators()[1].availability, vec![0.5, 0.25]);
    assert_eq!(net.generators()[0].p_nom_max, None);
    assert_eq!(net.generators()[1].p_nom_max, None);
    assert_eq!(net.co2_budget(), Some(1000.0));
}

#[test]
fn ring_with_chord_has_one_zone() {
    let net = fixture("B.1").unwrap();
    assert_eq!(net.n_buses(), 6);
    assert_eq!(net.lines().len(), 7);
    assert_eq!(synchronous_zones(&net).len(), 1);
}

#[test]
fn zones_follow_existing_lines_only() {
    let mut b = NetworkBuilder::new(1, 8760.0);
    b.bus_flat("a", 0.0).bus_flat("b", 0.0).bus_flat("c", 0.0).bus_flat("d", 0.0);
    b.existing("l1", "a", "b", 0.1, 10.0).existing("l2", "c", "d", 0.1, 10.0);
    b.candidate("c1", "b", "c", 0.1, 10.0, 1.0);
    let zones = synchronous_zones(&b.build().unwrap());
    assert_eq!(zones.len(), 2);
    assert_eq!(zones.zones[0].slack, 0);
    assert_eq!(zones.zones[1].slack, 2);

    assert_eq!(synchronous_zones(&fixture("C.3").unwrap()).len(), 3);
    assert_eq!(synchronous_zones(&fixture("A.3").unwrap()).len(), 1);
}

#[test]
fn slack_is_smallest_bus_id() {
    let mut b = NetworkBuilder::new(1, 8760.0);
    b.bus_flat("z", 0.0).bus_flat("m", 0.0).bus_flat("q", 0.0);
    b.existing("l1", "z", "m", 0.1, 10.0).existing("l2", "m", "q", 0.1, 10.0);
    let net = b.build().unwrap();
    let zones = synchronous_zones(&net);
    assert_eq!(net.buses()[zones.zones[0].slack].id, "m");
}

#[test]
fn incidence_examples() {
    let mut b = NetworkBuilder::new(1, 8760.0);
    b.bus_flat("b0", 0.0).bus_flat("b1", 0.0).bus_flat("b2", 0.0);
    b.existing("l0", "b0", "b1", 0.1, 1.0)
        .existing("l1", "b1", "b2", 0.1, 1.0)
        .existing("l2", "b0", "b2", 0.1, 1.0);
    let net = b.build().unwrap();
    let single = incidence_matrix(&net, &[0]).to_dense();
    assert_eq!(single, vec![vec![1], vec![-1], vec![0]]);
    let k = incidence_matrix(&net, &[0, 1, 2]);
    assert_eq!(k.entries.len(), 6);
    let dense = k.to_dense();
    for col in 0..3 {
        assert_eq!(dense.iter().map(|r| i64::from(r[col])).sum::<i64>(), 0);
    }

    let ring = fixture("B.1").unwrap();
    let existing: Vec<usize> = ring.existing_lines().collect();
    for row in incidence_matrix(&ring, &existing).to_dense() {
        assert_eq!(row.iter().filter(|&&v| v != 0).count(), 2);
    }
}

fn zones_plus_rank_is_bus_count(net: &tep_core::netmodel::Network) {
    let existing: Vec<usize> = net.existing_lines().collect();
    let dense = incidence_matrix(net, &existing).to_dense();
    // rank of K equals rank of its transpose
    let rows: Vec<Vec<i64>> = (0..existing.len())
        .map(|c| dense.iter().map(|r| i64::from(r[c])).collect())
        .collect();
    let rank = if rows.is_empty() { 0 } else { exact_rank(&rows).unwrap() };
    assert_eq!(synchronous_zones(net).len() + rank, net.n_buses());
}

#[test]
fn fixtures_zone_rank_identity() {
    for name in tep_core::instancegen::FIXTURE_NAMES {
        zones_plus_rank_is_bus_count(&fixture(name).unwrap());
    }
}

#[test]
fn json_document_loads() {
    let text = r#"{
        "buses": [{"id": "b0", "load": [0]}, {"id": "b1", "load": [5]}],
        "lines": [
            {"id": "l0", "from_bus": "b0", "to_bus": "b1", "x": 0.1, "F": 100, "kind": "existing"},
            {"id": "c0", "from_bus": "b0", "to_bus": "b1", "x": 0.1, "F": 100, "kind": "candidate", "capital_cost": 10, "multiplicity": 2}
        ],
        "generators": [{"id": "g0", "bus": "b0", "marginal_cost": 1, "capital_cost": 2, "availability": [1]}],
        "snapshots": [{"index": 0, "weight": 8760}]
    }"#;
    let net = network_from_json(text).unwrap();
    assert_eq!(net.lines().len(), 3);
    assert_eq!(net.lines()[2].id, "c0#2");
    assert_eq!(net.generators()[0].emission_rate, 0.0);
}

fn spec_strategy() -> impl Strategy<Value = InstanceSpec> {
    (0u64..1000, 0usize..8).prop_map(|(seed, i)| desk_suite(8, seed)[i].clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn csv_round_trip(spec in spec_strategy()) {
        let net = generate(&spec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_network_csv(&net, dir.path()).unwrap();
        let back = load_network_csv(dir.path()).unwrap();
        prop_assert_eq!(&back, &net);
        write_network_csv(&back, dir.path()).unwrap();
        prop_assert_eq!(load_network(dir.path()).unwrap(), net);
    }

    #[test]
    fn json_round_trip(spec in spec_strategy()) {
        let net = generate(&spec).unwrap();
        let text = network_to_json(&net);
        prop_assert_eq!(network_from_json(&text).unwrap(), net.clone());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("network.json");
        write_network_json(&net, &path).unwrap();
        prop_assert_eq!(load_network(&path).unwrap(), net);
    }

    #[test]
    fn incidence_columns_and_rank(spec in spec_strategy()) {
        let net = generate(&spec).unwrap();
        let all: Vec<usize> = (0..net.lines().len()).collect();
        let k = incidence_matrix(&net, &all);
        prop_assert_eq!(k.entries.len(), 2 * net.lines().len());
        for col in 0..net.lines().len() {
            let s: i64 = k.to_dense().iter().map(|r| i64::from(r[col])).sum();
            prop_assert_eq!(s, 0);
        }
        zones_plus_rank_is_bus_count(&net);
    }
}
