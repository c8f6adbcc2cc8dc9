//! Network data model, validation and synchronous zones.

mod io;

use std::collections::HashMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{
    load_network, load_network_csv, load_network_json, network_from_json, network_to_json,
    write_network_csv, write_network_json,
};

#[derive(Debug, Error)]
pub enum NetError {
    #[error("missing input file {0}")]
    MissingFile(PathBuf),
    #[error("{file}: row {row}, column `{column}`: {message}")]
    Parse {
        file: String,
        row: usize,
        column: String,
        message: String,
    },
    #[error("invalid {entity}: {rule}")]
    Validation { entity: String, rule: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn invalid(entity: impl Into<String>, rule: impl Into<String>) -> NetError {
    NetError::Validation {
        entity: entity.into(),
        rule: rule.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zone_hint: Option<String>,
    /// Demand per snapshot in MW.
    pub load: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    Existing,
    Candidate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    /// Series reactance in per unit.
    pub x: f64,
    /// Thermal capacity in MW.
    #[serde(rename = "F")]
    pub capacity: f64,
    pub kind: LineKind,
    /// Annualised cost of building the line; zero for existing lines.
    #[serde(default)]
    pub capital_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corridor: Option<String>,
}

impl Line {
    pub fn is_candidate(&self) -> bool {
        self.kind == LineKind::Candidate
    }

    /// `F·x`, the largest angle difference the line can sustain.
    pub fn fx(&self) -> f64 {
        self.capacity * self.x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub id: String,
    pub bus: String,
    /// Currency per MWh.
    pub marginal_cost: f64,
    /// Currency per MW and year.
    pub capital_cost: f64,
    /// Expansion limit in MW; `None` is unbounded.
    #[serde(default)]
    pub p_nom_max: Option<f64>,
    /// Per-snapshot availability factor.
    pub availability: Vec<f64>,
    /// tCO2 per MWh.
    #[serde(default)]
    pub emission_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub index: i64,
    /// Hours represented by the snapshot.
    pub weight: f64,
}

/// A validated network. Construction goes through [`Network::new`], which
/// checks every invariant and builds the id lookup tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    buses: Vec<Bus>,
    lines: Vec<Line>,
    generators: Vec<Generator>,
    snapshots: Vec<Snapshot>,
    co2_budget: Option<f64>,
    bus_index: HashMap<String, usize>,
    line_index: HashMap<String, usize>,
    ends: Vec<(usize, usize)>,
}

impl Network {
    pub fn new(
        buses: Vec<Bus>,
        lines: Vec<Line>,
        generators: Vec<Generator>,
        snapshots: Vec<Snapshot>,
        co2_budget: Option<f64>,
    ) -> Result<Network, NetError> {
        if buses.is_empty() {
            return Err(invalid("network", "at least one bus is required"));
        }
        if snapshots.is_empty() {
            return Err(invalid("network", "at least one snapshot is required"));
        }
        let t = snapshots.len();
        let mut seen_snap = std::collections::HashSet::new();
        for s in &snapshots {
            if !seen_snap.insert(s.index) {
                return Err(invalid(format!("snapshot {}", s.index), "duplicate index"));
            }
            if !(s.weight > 0.0 && s.weight.is_finite()) {
                return Err(invalid(format!("snapshot {}", s.index), "weight must be > 0"));
            }
        }

        let mut bus_index = HashMap::new();
        for (i, b) in buses.iter().enumerate() {
            if b.id.is_empty() {
                return Err(invalid(format!("bus #{i}"), "empty id"));
            }
            if bus_index.insert(b.id.clone(), i).is_some() {
                return Err(invalid(&b.id, "duplicate bus id"));
            }
            if b.load.len() != t {
                return Err(invalid(&b.id, "load length differs from snapshot count"));
            }
            if b.load.iter().any(|&d| !(d >= 0.0 && d.is_finite())) {
                return Err(invalid(&b.id, "load must be finite and >= 0"));
            }
        }

        let mut line_index = HashMap::new();
        let mut ends = Vec::with_capacity(lines.len());
        for (k, l) in lines.iter().enumerate() {
            if l.id.is_empty() {
                return Err(invalid(format!("line #{k}"), "empty id"));
            }
            if line_index.insert(l.id.clone(), k).is_some() {
                return Err(invalid(&l.id, "duplicate line id"));
            }
            let from = *bus_index
                .get(&l.from_bus)
                .ok_or_else(|| invalid(&l.id, "from_bus not found"))?;
            let to = *bus_index
                .get(&l.to_bus)
                .ok_or_else(|| invalid(&l.id, "to_bus not found"))?;
            if from == to {
                return Err(invalid(&l.id, "from_bus equals to_bus"));
            }
            if !(l.x > 0.0 && l.x.is_finite()) {
                return Err(invalid(&l.id, "x must be > 0"));
            }
            if !(l.capacity >= 0.0 && l.capacity.is_finite()) {
                return Err(invalid(&l.id, "F must be finite and >= 0"));
            }
            if !(l.capital_cost >= 0.0 && l.capital_cost.is_finite()) {
                return Err(invalid(&l.id, "capital_cost must be finite and >= 0"));
            }
            if l.kind == LineKind::Existing && l.capital_cost != 0.0 {
                return Err(invalid(&l.id, "existing line with capital_cost"));
            }
            ends.push((from, to));
        }

        let mut gen_ids = std::collections::HashSet::new();
        for g in &generators {
            if !gen_ids.insert(g.id.as_str()) {
                return Err(invalid(&g.id, "duplicate generator id"));
            }
            if !bus_index.contains_key(&g.bus) {
                return Err(invalid(&g.id, "bus not found"));
            }
            if g.availability.len() != t {
                return Err(invalid(&g.id, "availability length differs from snapshot count"));
            }
            if g.availability.iter().any(|&a| !(0.0..=1.0).contains(&a)) {
                return Err(invalid(&g.id, "availability must lie in [0, 1]"));
            }
            if !g.marginal_cost.is_finite() {
                return Err(invalid(&g.id, "marginal_cost must be finite"));
            }
            if !(g.capital_cost >= 0.0 && g.capital_cost.is_finite()) {
                return Err(invalid(&g.id, "capital_cost must be finite and >= 0"));
            }
            if g.p_nom_max.is_some_and(|p| !(p >= 0.0)) {
                return Err(invalid(&g.id, "p_nom_max must be >= 0"));
            }
            if !(g.emission_rate >= 0.0 && g.emission_rate.is_finite()) {
                return Err(invalid(&g.id, "emission_rate must be finite and >= 0"));
            }
        }
        if co2_budget.is_some_and(|b| !(b >= 0.0)) {
            return Err(invalid("network", "co2_budget must be >= 0"));
        }

        Ok(Network {
            buses,
            lines,
            generators,
            snapshots,
            co2_budget,
            bus_index,
            line_index,
            ends,
        })
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn co2_budget(&self) -> Option<f64> {
        self.co2_budget
    }

    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn n_snapshots(&self) -> usize {
        self.snapshots.len()
    }

    pub fn bus_pos(&self, id: &str) -> Option<usize> {
        self.bus_index.get(id).copied()
    }

    pub fn line_pos(&self, id: &str) -> Option<usize> {
        self.line_index.get(id).copied()
    }

    pub fn line(&self, k: usize) -> &Line {
        &self.lines[k]
    }

    /// Bus positions `(from, to)` of line `k`.
    pub fn ends(&self, k: usize) -> (usize, usize) {
        self.ends[k]
    }

    pub fn existing_lines(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.lines.len()).filter(|&k| !self.lines[k].is_candidate())
    }

    pub fn candidate_lines(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.lines.len()).filter(|&k| self.lines[k].is_candidate())
    }

    pub fn n_existing(&self) -> usize {
        self.existing_lines().count()
    }

    pub fn n_candidates(&self) -> usize {
        self.candidate_lines().count()
    }

    pub fn into_parts(self) -> (Vec<Bus>, Vec<Line>, Vec<Generator>, Vec<Snapshot>, Option<f64>) {
        (self.buses, self.lines, self.generators, self.snapshots, self.co2_budget)
    }

    /// The network after an investment decision: candidates in `built`
    /// become existing lines, all other candidates are dropped.
    pub fn with_investment(&self, built: &[bool]) -> Network {
        let lines = self
            .lines
            .iter()
            .enumerate()
            .filter(|(k, l)| !l.is_candidate() || built[*k])
            .map(|(_, l)| Line {
                kind: LineKind::Existing,
                capital_cost: 0.0,
                ..l.clone()
            })
            .collect();
        Network::new(
            self.buses.clone(),
            lines,
            self.generators.clone(),
            self.snapshots.clone(),
            self.co2_budget,
        )
        .expect("dropping candidates keeps a network valid")
    }
}

/// Incremental construction of small networks in code; uniform snapshots
/// of equal weight.
#[derive(Debug, Clone)]
pub struct NetworkBuilder {
    buses: Vec<Bus>,
    lines: Vec<Line>,
    generators: Vec<Generator>,
    snapshots: Vec<Snapshot>,
    co2_budget: Option<f64>,
}

impl NetworkBuilder {
    /// `n_snapshots` snapshots whose weights sum to `total_hours`.
    pub fn new(n_snapshots: usize, total_hours: f64) -> Self {
        let w = total_hours / n_snapshots as f64;
        NetworkBuilder {
            buses: Vec::new(),
            lines: Vec::new(),
            generators: Vec::new(),
            snapshots: (0..n_snapshots)
                .map(|t| Snapshot {
                    index: t as i64,
                    weight: w,
                })
                .collect(),
            co2_budget: None,
        }
    }

    pub fn n_snapshots(&self) -> usize {
        self.snapshots.len()
    }

    pub fn bus(&mut self, id: &str, load: Vec<f64>) -> &mut Self {
        self.buses.push(Bus {
            id: id.into(),
            zone_hint: None,
            load,
        });
        self
    }

    /// Bus with the same load in every snapshot.
    pub fn bus_flat(&mut self, id: &str, load: f64) -> &mut Self {
        let t = self.snapshots.len();
        self.bus(id, vec![load; t])
    }

    pub fn existing(&mut self, id: &str, from: &str, to: &str, x: f64, capacity: f64) -> &mut Self {
        self.lines.push(Line {
            id: id.into(),
            from_bus: from.into(),
            to_bus: to.into(),
            x,
            capacity,
            kind: LineKind::Existing,
            capital_cost: 0.0,
            corridor: None,
        });
        self
    }

    pub fn candidate(
        &mut self,
        id: &str,
        from: &str,
        to: &str,
        x: f64,
        capacity: f64,
        capital_cost: f64,
    ) -> &mut Self {
        self.lines.push(Line {
            id: id.into(),
            from_bus: from.into(),
            to_bus: to.into(),
            x,
            capacity,
            kind: LineKind::Candidate,
            capital_cost,
            corridor: None,
        });
        self
    }

    pub fn generator(&mut self, g: Generator) -> &mut Self {
        self.generators.push(g);
        self
    }

    /// Generator always available, unbounded, emission-free unless changed.
    pub fn simple_generator(&mut self, id: &str, bus: &str, marginal_cost: f64, capital_cost: f64) -> &mut Self {
        let t = self.snapshots.len();
        self.generator(Generator {
            id: id.into(),
            bus: bus.into(),
            marginal_cost,
            capital_cost,
            p_nom_max: None,
            availability: vec![1.0; t],
            emission_rate: 0.0,
        })
    }

    pub fn co2_budget(&mut self, budget: Option<f64>) -> &mut Self {
        self.co2_budget = budget;
        self
    }

    pub fn bus_ids(&self) -> Vec<String> {
        self.buses.iter().map(|b| b.id.clone()).collect()
    }

    pub fn build(&self) -> Result<Network, NetError> {
        Network::new(
            self.buses.clone(),
            self.lines.clone(),
            self.generators.clone(),
            self.snapshots.clone(),
            self.co2_budget,
        )
    }
}

/// A connected component of the existing-line graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SynchronousZone {
    pub id: usize,
    /// Bus positions, ascending by bus id.
    pub buses: Vec<usize>,
    /// Position of the lexicographically smallest bus id.
    pub slack: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Zones {
    pub zones: Vec<SynchronousZone>,
    /// Zone id of every bus position.
    pub zone_of: Vec<usize>,
}

impl Zones {
    pub fn len(&self) -> usize {
        self.zones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zones.is_empty()
    }

    pub fn same_zone(&self, a: usize, b: usize) -> bool {
        self.zone_of[a] == self.zone_of[b]
    }

    pub fn slack_bus(&self, zone: usize) -> usize {
        self.zones[zone].slack
    }
}

fn find(parent: &mut [usize], mut a: usize) -> usize {
    while parent[a] != a {
        parent[a] = parent[parent[a]];
        a = parent[a];
    }
    a
}

/// Connected components over the lines selected by `include`. Zones are
/// numbered by ascending slack bus id.
pub fn components(net: &Network, include: impl Fn(usize) -> bool) -> Zones {
    let n = net.n_buses();
    let mut parent: Vec<usize> = (0..n).collect();
    for k in 0..net.lines().len() {
        if include(k) {
            let (a, b) = net.ends(k);
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for b in 0..n {
        let r = find(&mut parent, b);
        groups.entry(r).or_default().push(b);
    }
    let mut list: Vec<Vec<usize>> = groups.into_values().collect();
    for g in &mut list {
        g.sort_by(|&a, &b| net.buses()[a].id.cmp(&net.buses()[b].id));
    }
    list.sort_by(|a, b| net.buses()[a[0]].id.cmp(&net.buses()[b[0]].id));
    let mut zone_of = vec![0; n];
    let zones = list
        .into_iter()
        .enumerate()
        .map(|(id, buses)| {
            for &b in &buses {
                zone_of[b] = id;
            }
            SynchronousZone {
                id,
                slack: buses[0],
                buses,
            }
        })
        .collect();
    Zones { zones, zone_of }
}

/// Zones of the existing network; candidate lines are ignored.
pub fn synchronous_zones(net: &Network) -> Zones {
    components(net, |k| !net.line(k).is_candidate())
}

/// Signed bus-by-line incidence matrix in triplet form.
#[derive(Debug, Clone, PartialEq)]
pub struct Incidence {
    pub n_buses: usize,
    /// Line positions, one per column.
    pub lines: Vec<usize>,
    /// `(bus, column, ±1)`.
    pub entries: Vec<(usize, usize, i8)>,
}

impl Incidence {
    pub fn to_dense(&self) -> Vec<Vec<i8>> {
        let mut m = vec![vec![0i8; self.lines.len()]; self.n_buses];
        for &(b, c, s) in &self.entries {
            m[b][c] = s;
        }
        m
    }
}

/// `K[i, ℓ] = +1` where ℓ starts, `-1` where it ends.
pub fn incidence_matrix(net: &Network, lines: &[usize]) -> Incidence {
    let mut entries = Vec::with_capacity(2 * lines.len());
    for (c, &k) in lines.iter().enumerate() {
        let (a, b) = net.ends(k);
        entries.push((a, c, 1));
        entries.push((b, c, -1));
    }
    Incidence {
        n_buses: net.n_buses(),
        lines: lines.to_vec(),
        entries,
    }
}
