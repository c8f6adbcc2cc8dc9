use std::collections::BTreeMap;

use super::johnson::simple_cycles;
use super::paths::{shortest_path_in, Adjacency};
use super::subnetwork::SubnetworkGraph;
use super::{CycleSpec, GraphError};
use crate::netmodel::{Network, Zones};

pub const DEFAULT_CYCLE_CAP: usize = 10_000;

fn existing_adjacency(net: &Network) -> Adjacency {
    Adjacency::new(net, |k| !net.line(k).is_candidate())
}

/// One cycle per intra-zone candidate: the candidate plus the unit-weight
/// shortest existing path closing it. Ids are `ci:<line id>`.
pub fn candidate_cycles_intra(net: &Network, zones: &Zones) -> Vec<CycleSpec> {
    let adj = existing_adjacency(net);
    let mut out = Vec::new();
    for k in net.candidate_lines() {
        let (a, b) = net.ends(k);
        if !zones.same_zone(a, b) {
            continue;
        }
        let path = shortest_path_in(net, &adj, b, a, |_| 1.0).expect("buses in a zone are connected");
        let mut entries = vec![(k, 1i8)];
        entries.extend(path.lines);
        out.push(CycleSpec {
            id: format!("ci:{}", net.line(k).id),
            entries,
            gating: vec![k],
        });
    }
    out
}

/// Zone sequence of a circuit and the candidate chosen between each pair of
/// consecutive zones (the last one closes the circuit).
struct ZoneCircuit {
    zones: Vec<usize>,
    lines: Vec<usize>,
}

/// Simple cycles of the subnetwork graph, expanded to line-level cycles.
/// Two-edge cycles come from pairs of parallel candidates; longer ones from
/// elementary circuits of the merged zone graph, once per orientation and
/// once per choice among parallel candidates. Ids are `cx:0`, `cx:1`, ...
pub fn candidate_cycles_inter(
    net: &Network,
    zones: &Zones,
    gs: &SubnetworkGraph,
    cap: usize,
) -> Result<Vec<CycleSpec>, GraphError> {
    let merged = gs.merged();
    let by_id = |v: &mut Vec<usize>| v.sort_by(|&a, &b| net.line(a).id.cmp(&net.line(b).id));
    let parallel: BTreeMap<(usize, usize), Vec<usize>> = merged
        .into_iter()
        .map(|(k, mut v)| {
            by_id(&mut v);
            (k, v)
        })
        .collect();

    let mut circuits: Vec<ZoneCircuit> = Vec::new();
    let too_many = |count: usize| GraphError::CycleExplosion { count, cap };

    for (&(a, b), lines) in &parallel {
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                circuits.push(ZoneCircuit {
                    zones: vec![a, b],
                    lines: vec![lines[i], lines[j]],
                });
                if circuits.len() > cap {
                    return Err(too_many(circuits.len()));
                }
            }
        }
    }

    let adj = gs.simple_adjacency();
    let mut zone_cycles: Vec<Vec<usize>> = Vec::new();
    let mut expanded = circuits.len();
    let mut overflow = false;
    simple_cycles(&adj, |c| {
        // length-2 circuits are the u-v-u back-and-forth of a single edge;
        // keep one orientation of the rest
        if c.len() < 3 || c[1] > c[c.len() - 1] {
            return true;
        }
        let choices: usize = (0..c.len())
            .map(|i| {
                let (u, v) = (c[i], c[(i + 1) % c.len()]);
                parallel[&(u.min(v), u.max(v))].len()
            })
            .product();
        expanded = expanded.saturating_add(choices);
        if expanded > cap {
            overflow = true;
            return false;
        }
        zone_cycles.push(c.to_vec());
        true
    });
    if overflow {
        return Err(too_many(expanded));
    }
    zone_cycles.sort();
    for zc in zone_cycles {
        let options: Vec<&Vec<usize>> = (0..zc.len())
            .map(|i| {
                let (u, v) = (zc[i], zc[(i + 1) % zc.len()]);
                &parallel[&(u.min(v), u.max(v))]
            })
            .collect();
        let mut pick = vec![0usize; zc.len()];
        loop {
            circuits.push(ZoneCircuit {
                zones: zc.clone(),
                lines: pick.iter().zip(&options).map(|(&p, o)| o[p]).collect(),
            });
            // odometer over the parallel choices, last position fastest
            let mut pos = zc.len();
            let advanced = loop {
                if pos == 0 {
                    break false;
                }
                pos -= 1;
                pick[pos] += 1;
                if pick[pos] < options[pos].len() {
                    break true;
                }
                pick[pos] = 0;
            };
            if !advanced {
                break;
            }
        }
    }

    let adj = existing_adjacency(net);
    Ok(circuits
        .iter()
        .enumerate()
        .map(|(i, c)| expand_circuit(net, zones, &adj, c, format!("cx:{i}")))
        .collect())
}

/// Walks the circuit zone by zone: cross each candidate into the next zone,
/// then connect its attachment bus to the next candidate's attachment bus by
/// the unit-weight shortest existing path.
fn expand_circuit(net: &Network, zones: &Zones, adj: &Adjacency, c: &ZoneCircuit, id: String) -> CycleSpec {
    let k = c.zones.len();
    let mut entries = Vec::new();
    for i in 0..k {
        let (zu, zv) = (c.zones[i], c.zones[(i + 1) % k]);
        let line = c.lines[i];
        let (a, b) = net.ends(line);
        let (sign, arrive) = if zones.zone_of[a] == zu {
            (1i8, b)
        } else {
            (-1i8, a)
        };
        debug_assert_eq!(zones.zone_of[arrive], zv);
        entries.push((line, sign));
        let next = c.lines[(i + 1) % k];
        let (na, nb) = net.ends(next);
        let leave = if zones.zone_of[na] == zv { na } else { nb };
        let path = shortest_path_in(net, adj, arrive, leave, |_| 1.0).expect("buses in a zone are connected");
        entries.extend(path.lines);
    }
    let mut gating = c.lines.clone();
    gating.sort_by(|&a, &b| net.line(a).id.cmp(&net.line(b).id));
    CycleSpec { id, entries, gating }
}
