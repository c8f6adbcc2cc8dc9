//! Spanning-tree cycle bases, shortest paths, candidate cycles and the
//! subnetwork graph of synchronous zones.

mod basis;
mod candidates;
pub mod johnson;
mod paths;
pub mod rank;
mod subnetwork;

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::netmodel::{Network, Zones};

pub use basis::cycle_basis;
pub use candidates::{candidate_cycles_inter, candidate_cycles_intra, DEFAULT_CYCLE_CAP};
pub use paths::{shortest_path, shortest_path_in, Adjacency, Path};
pub use subnetwork::{
    slack_relaxation_plan, NotAForest, PlanEntry, SlackRelaxationPlan, SlackStrategy,
    SubnetworkGraph, ZoneEdge,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("{count} candidate cycles exceed the cap of {cap}")]
    CycleExplosion { count: usize, cap: usize },
}

/// A signed cycle over line positions and the candidates that gate it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleSpec {
    pub id: String,
    /// `(line, ±1)` in traversal order.
    pub entries: Vec<(usize, i8)>,
    /// Candidate lines among the entries, ascending by line id. Empty for
    /// basis cycles.
    pub gating: Vec<usize>,
}

impl CycleSpec {
    pub fn line_ids<'a>(&self, net: &'a Network) -> Vec<&'a str> {
        self.entries.iter().map(|&(k, _)| net.line(k).id.as_str()).collect()
    }

    /// Sum of the signed incidence columns; zero for a closed walk.
    pub fn boundary(&self, net: &Network) -> Vec<i64> {
        let mut b = vec![0i64; net.n_buses()];
        for &(k, s) in &self.entries {
            let (from, to) = net.ends(k);
            b[from] += i64::from(s);
            b[to] -= i64::from(s);
        }
        b
    }

    pub fn is_closed(&self, net: &Network) -> bool {
        self.boundary(net).iter().all(|&v| v == 0)
    }

    /// Dense signed row over all line positions.
    pub fn row(&self, n_lines: usize) -> Vec<i64> {
        let mut r = vec![0i64; n_lines];
        for &(k, s) in &self.entries {
            r[k] += i64::from(s);
        }
        r
    }

    /// `"+l1 -l2 ..."` rendering.
    pub fn signed_ids(&self, net: &Network) -> String {
        self.entries
            .iter()
            .map(|&(k, s)| format!("{}{}", if s > 0 { '+' } else { '-' }, net.line(k).id))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Plain-text dump for graph viewers: `node`, `edge` and `cycle` records,
/// one per line.
pub fn dump_graph(
    net: &Network,
    zones: &Zones,
    gs: &SubnetworkGraph,
    cycles: &[&CycleSpec],
) -> String {
    let mut out = String::new();
    for (i, b) in net.buses().iter().enumerate() {
        let z = zones.zone_of[i];
        let slack = if zones.slack_bus(z) == i { " slack" } else { "" };
        let _ = writeln!(out, "node {} zone={}{}", b.id, z, slack);
    }
    for l in net.lines() {
        let kind = if l.is_candidate() { "candidate" } else { "existing" };
        let _ = writeln!(out, "edge {} {} {} {} x={} F={}", l.id, l.from_bus, l.to_bus, kind, l.x, l.capacity);
    }
    for e in &gs.edges {
        let _ = writeln!(out, "zone-edge {} {} {}", net.line(e.line).id, e.from_zone, e.to_zone);
    }
    for c in cycles {
        let _ = writeln!(out, "cycle {} {}", c.id, c.signed_ids(net));
    }
    out
}
