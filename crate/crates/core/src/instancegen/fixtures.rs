//! Small hand-built networks reproducing the textbook topologies of the
//! angle/cycle comparison: parallel and detour candidates (A), in-zone
//! candidate cycles (B), candidates between synchronous zones (C) and zone
//! cycles (D).
//!
//! Unless noted, lines have `x = 0.1` and `F = 100`, so every line has
//! `F·x = 10`. Every bus carries a peaking generator (marginal 100,
//! capital 60 000) so all fixtures are feasible without investment; one bus
//! per fixture holds a cheap generator (marginal 10, capital 20 000) that
//! makes transmission worth building.

use std::collections::BTreeMap;

use crate::netmodel::{Network, NetworkBuilder};

const X: f64 = 0.1;
const F: f64 = 100.0;
const LINE_COST: f64 = 2.0e5;

fn economics(b: &mut NetworkBuilder, cheap_at: &str, loads: &[(&str, f64)]) -> Network {
    let ids = b.bus_ids();
    for id in &ids {
        b.simple_generator(&format!("peak:{id}"), id, 100.0, 60_000.0);
    }
    b.simple_generator(&format!("cheap:{cheap_at}"), cheap_at, 10.0, 20_000.0);
    let base = b.build().expect("fixture topology is valid");
    let (mut buses, lines, gens, snaps, co2) = base.into_parts();
    for bus in &mut buses {
        if let Some(&(_, d)) = loads.iter().find(|(id, _)| *id == bus.id) {
            bus.load = vec![d; snaps.len()];
        }
    }
    Network::new(buses, lines, gens, snaps, co2).expect("fixture is valid")
}

fn builder() -> NetworkBuilder {
    NetworkBuilder::new(1, 8760.0)
}

/// A.1: candidate `c1` parallel to existing `l1`.
pub fn a1() -> Network {
    let mut b = builder();
    b.bus_flat("a1", 0.0).bus_flat("a2", 0.0);
    b.existing("l1", "a1", "a2", X, F);
    b.candidate("c1", "a1", "a2", X, F, LINE_COST);
    economics(&mut b, "a1", &[("a2", 150.0)])
}

/// A.2: candidate `c1` (x = 0.2) spanning the two-hop detour `l1`, `l2`.
pub fn a2() -> Network {
    let mut b = builder();
    b.bus_flat("a1", 0.0).bus_flat("a2", 20.0).bus_flat("a3", 0.0);
    b.existing("l1", "a1", "a2", X, F).existing("l2", "a2", "a3", X, F);
    b.candidate("c1", "a1", "a3", 0.2, F, LINE_COST);
    economics(&mut b, "a1", &[("a2", 20.0), ("a3", 140.0)])
}

/// A.3: two detours between `a1` and `a4`, of F·x weight 20 (`l1`, `l2`)
/// and 50 (`l3`, `l4` with x = 0.25), plus candidate `c1` a1–a4.
pub fn a3() -> Network {
    let mut b = builder();
    for id in ["a1", "a2", "a3", "a4"] {
        b.bus_flat(id, 0.0);
    }
    b.existing("l1", "a1", "a2", X, F).existing("l2", "a2", "a4", X, F);
    b.existing("l3", "a1", "a3", 0.25, F).existing("l4", "a3", "a4", 0.25, F);
    b.candidate("c1", "a1", "a4", X, F, LINE_COST);
    economics(&mut b, "a1", &[("a4", 260.0)])
}

/// B.1: ring `n1`..`n6` (`l1` = n1–n2, .., `l6` = n6–n1) and chord `c1`
/// n2–n6.
pub fn b1() -> Network {
    let mut b = builder();
    for i in 1..=6 {
        b.bus_flat(&format!("n{i}"), 0.0);
    }
    for i in 1..=6 {
        let j = i % 6 + 1;
        b.existing(&format!("l{i}"), &format!("n{i}"), &format!("n{j}"), X, F);
    }
    b.candidate("c1", "n2", "n6", X, F, LINE_COST);
    economics(&mut b, "n2", &[("n4", 60.0), ("n6", 180.0)])
}

/// B.2: path n1 -l5- n2 -l1- n3 -l2- n4 -l3- n5 -l4- n6, `l6` parallel to
/// `l2`, candidates `c2` n2–n5 and `c1` n1–n6.
pub fn b2() -> Network {
    let mut b = builder();
    for i in 1..=6 {
        b.bus_flat(&format!("n{i}"), 0.0);
    }
    b.existing("l5", "n1", "n2", X, F)
        .existing("l1", "n2", "n3", X, F)
        .existing("l2", "n3", "n4", X, F)
        .existing("l3", "n4", "n5", X, F)
        .existing("l4", "n5", "n6", X, F)
        .existing("l6", "n3", "n4", X, F);
    b.candidate("c2", "n2", "n5", X, F, LINE_COST);
    b.candidate("c1", "n1", "n6", X, F, LINE_COST);
    economics(&mut b, "n1", &[("n5", 120.0), ("n6", 140.0)])
}

fn zone_v(b: &mut NetworkBuilder) {
    b.bus_flat("v1", 0.0).bus_flat("v2", 0.0).bus_flat("v3", 0.0);
    b.existing("l1", "v1", "v2", X, F)
        .existing("l2", "v2", "v3", X, F)
        .existing("l3", "v1", "v3", X, F);
}

fn zone_w(b: &mut NetworkBuilder) {
    for i in 1..=4 {
        b.bus_flat(&format!("w{i}"), 0.0);
    }
    b.existing("l4", "w1", "w2", X, F)
        .existing("l5", "w2", "w3", X, F)
        .existing("l6", "w3", "w4", X, F)
        .existing("l7", "w4", "w1", X, F);
}

/// C.1: zone v (triangle `l1`..`l3`), zone w (ring `l4`..`l7`) and one
/// inter-zone candidate `c1` v3–w4.
pub fn c1() -> Network {
    let mut b = builder();
    zone_v(&mut b);
    zone_w(&mut b);
    b.candidate("c1", "v3", "w4", X, F, LINE_COST);
    economics(&mut b, "v1", &[("v2", 30.0), ("w2", 80.0), ("w3", 40.0)])
}

/// C.2: C.1 plus a second inter-zone candidate `c2` v1–w1.
pub fn c2() -> Network {
    let mut b = builder();
    zone_v(&mut b);
    zone_w(&mut b);
    b.candidate("c1", "v3", "w4", X, F, LINE_COST);
    b.candidate("c2", "v1", "w1", X, F, LINE_COST);
    economics(&mut b, "v1", &[("v2", 30.0), ("w2", 120.0), ("w3", 90.0)])
}

/// C.3: zones u (`u1` -l8- `u2`, F·x = 30), v and w; `c3` u2–v2 joins u and
/// v, `c1` v3–w4 and `c2` v1–w1 (x = 0.4) join v and w.
pub fn c3() -> Network {
    let mut b = builder();
    b.bus_flat("u1", 0.0).bus_flat("u2", 0.0);
    b.existing("l8", "u1", "u2", 0.3, F);
    zone_v(&mut b);
    zone_w(&mut b);
    b.candidate("c1", "v3", "w4", X, F, LINE_COST);
    b.candidate("c2", "v1", "w1", 0.4, F, LINE_COST);
    b.candidate("c3", "u2", "v2", X, F, LINE_COST);
    economics(&mut b, "v1", &[("u1", 60.0), ("w2", 90.0), ("w3", 50.0)])
}

fn zones_uvw(b: &mut NetworkBuilder) {
    b.bus_flat("u1", 0.0);
    zone_v(b);
    zone_w(b);
}

/// D.1: zones u (single bus), v and w pairwise joined by one candidate
/// each: `c1` u1–v2, `c2` v3–w4, `c3` w1–u1.
pub fn d1() -> Network {
    let mut b = builder();
    zones_uvw(&mut b);
    b.candidate("c1", "u1", "v2", X, F, LINE_COST);
    b.candidate("c2", "v3", "w4", X, F, LINE_COST);
    b.candidate("c3", "w1", "u1", X, F, LINE_COST);
    economics(&mut b, "v1", &[("u1", 70.0), ("w2", 60.0)])
}

/// D.2: D.1 with two parallel candidates per zone pair: `c1`, `c2` u1–v2;
/// `c3`, `c4` v3–w4; `c5`, `c6` w1–u1.
pub fn d2() -> Network {
    let mut b = builder();
    zones_uvw(&mut b);
    b.candidate("c1", "u1", "v2", X, F, LINE_COST);
    b.candidate("c2", "u1", "v2", X, F, LINE_COST);
    b.candidate("c3", "v3", "w4", X, F, LINE_COST);
    b.candidate("c4", "v3", "w4", X, F, LINE_COST);
    b.candidate("c5", "w1", "u1", X, F, LINE_COST);
    b.candidate("c6", "w1", "u1", X, F, LINE_COST);
    economics(&mut b, "v1", &[("u1", 150.0), ("w2", 130.0)])
}

pub const FIXTURE_NAMES: [&str; 10] = ["A.1", "A.2", "A.3", "B.1", "B.2", "C.1", "C.2", "C.3", "D.1", "D.2"];

pub fn fixture(name: &str) -> Option<Network> {
    Some(match name {
        "A.1" => a1(),
        "A.2" => a2(),
        "A.3" => a3(),
        "B.1" => b1(),
        "B.2" => b2(),
        "C.1" => c1(),
        "C.2" => c2(),
        "C.3" => c3(),
        "D.1" => d1(),
        "D.2" => d2(),
        _ => return None,
    })
}

pub fn fixtures() -> BTreeMap<&'static str, Network> {
    FIXTURE_NAMES.iter().map(|&n| (n, fixture(n).unwrap())).collect()
}
