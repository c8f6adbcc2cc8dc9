use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{slack_relaxation_plan, SlackStrategy, SubnetworkGraph};
use crate::netmodel::{synchronous_zones, Bus, Generator, Line, LineKind, Network, Snapshot};

const MAX_ATTEMPTS: u64 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub seed: u64,
    pub n_buses: usize,
    /// Target existing lines per bus; every zone gets at least a spanning tree.
    pub mesh_degree: f64,
    pub n_zones: usize,
    /// Parallel candidates per corridor, 1 or 2.
    pub candidates_per_corridor: usize,
    /// Candidate corridors. With several zones the first `n_zones - 1`
    /// join the zones into a tree.
    pub candidate_corridors: usize,
    pub n_snapshots: usize,
    /// Mean availability of the renewable generator at every bus.
    pub renewable_share: f64,
    /// Emission budget as a share of the emissions of serving all load from
    /// peakers; `None` adds no budget.
    pub co2_budget_fraction: Option<f64>,
    /// Spend one corridor on closing a cycle of zones (needs three zones).
    pub zone_cycle: bool,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        InstanceSpec {
            seed: 1,
            n_buses: 6,
            mesh_degree: 1.3,
            n_zones: 1,
            candidates_per_corridor: 1,
            candidate_corridors: 2,
            n_snapshots: 1,
            renewable_share: 0.4,
            co2_budget_fraction: None,
            zone_cycle: false,
        }
    }
}

impl InstanceSpec {
    pub fn n_candidates(&self) -> usize {
        self.candidate_corridors * self.candidates_per_corridor
    }

    pub fn validate(&self) -> Result<(), GenerationError> {
        let bad = |m: &str| Err(GenerationError::InvalidSpec(m.to_string()));
        if self.n_buses < 2 {
            return bad("n_buses must be at least 2");
        }
        if self.n_zones == 0 || self.n_zones > self.n_buses {
            return bad("n_zones must be between 1 and n_buses");
        }
        if !(1..=2).contains(&self.candidates_per_corridor) {
            return bad("candidates_per_corridor must be 1 or 2");
        }
        if self.n_snapshots == 0 {
            return bad("n_snapshots must be positive");
        }
        if self.candidate_corridors + 1 < self.n_zones + usize::from(self.zone_cycle) {
            return bad("too few corridors to join the zones");
        }
        if self.zone_cycle && self.n_zones < 3 {
            return bad("zone_cycle needs at least three zones");
        }
        if !(0.0..=1.0).contains(&self.renewable_share) {
            return bad("renewable_share must lie in [0, 1]");
        }
        if matches!(self.co2_budget_fraction, Some(f) if !(f > 0.0)) {
            return bad("co2_budget_fraction must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GenerationError {
    #[error("invalid instance spec: {0}")]
    InvalidSpec(String),
    #[error("no valid instance after {attempts} attempts for seed {seed}")]
    GenerationFailure { seed: u64, attempts: u64 },
}

/// Random geometric multigraph with the requested zone structure. The same
/// spec always yields the same network.
pub fn generate(spec: &InstanceSpec) -> Result<Network, GenerationError> {
    spec.validate()?;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(attempt);
        if let Some(net) = attempt_generate(spec, &mut rng) {
            return Ok(net);
        }
        log::debug!("seed {} attempt {attempt} rejected", spec.seed);
    }
    Err(GenerationError::GenerationFailure {
        seed: spec.seed,
        attempts: MAX_ATTEMPTS,
    })
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

fn attempt_generate(spec: &InstanceSpec, rng: &mut ChaCha8Rng) -> Option<Network> {
    let n = spec.n_buses;
    let nz = spec.n_zones;
    let width = if n >= 100 { 3 } else { 2 };
    let ids: Vec<String> = (0..n).map(|i| format!("n{i:0width$}")).collect();

    // zone z owns a vertical strip of the unit square
    let mut zone_of: Vec<usize> = (0..n).map(|i| i % nz).collect();
    zone_of.sort_unstable();
    let pos: Vec<(f64, f64)> = zone_of
        .iter()
        .map(|&z| ((z as f64 + rng.gen_range(0.1..0.9)) / nz as f64, rng.gen::<f64>()))
        .collect();
    let members: Vec<Vec<usize>> = (0..nz).map(|z| (0..n).filter(|&i| zone_of[i] == z).collect()).collect();

    let reactance = |a: usize, b: usize, rng: &mut ChaCha8Rng| {
        let x = 0.05 + 0.3 * dist(pos[a], pos[b]) + rng.gen_range(0.0..0.05);
        (x * 1e4).round() / 1e4
    };
    let capacity = |rng: &mut ChaCha8Rng| f64::from(rng.gen_range(5u32..=15) * 10);

    let mut lines = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for m in &members {
        // Prim on distances gives the spanning tree of the zone
        let mut inside = vec![m[0]];
        let mut rest: Vec<usize> = m[1..].to_vec();
        while !rest.is_empty() {
            let (ri, from) = rest
                .iter()
                .enumerate()
                .flat_map(|(ri, &r)| inside.iter().map(move |&i| (ri, i, r)))
                .min_by(|a, b| dist(pos[a.1], pos[a.2]).total_cmp(&dist(pos[b.1], pos[b.2])))
                .map(|(ri, i, _)| (ri, i))?;
            let to = rest.swap_remove(ri);
            pairs.push((from, to));
            inside.push(to);
        }
        let target = ((spec.mesh_degree * m.len() as f64).round() as usize).max(m.len() - 1);
        let mut extra = target - (m.len() - 1);
        let mut options: Vec<(usize, usize)> = Vec::new();
        for (i, &a) in m.iter().enumerate() {
            for &b in &m[i + 1..] {
                options.push((a, b));
            }
        }
        options.shuffle(rng);
        options.sort_by(|p, q| dist(pos[p.0], pos[p.1]).total_cmp(&dist(pos[q.0], pos[q.1])));
        for &(a, b) in &options {
            if extra == 0 {
                break;
            }
            let taken = pairs.contains(&(a, b)) || pairs.contains(&(b, a));
            // keep a few parallel existing lines in the mix
            if !taken || rng.gen_bool(0.1) {
                pairs.push((a, b));
                extra -= 1;
            }
        }
    }
    for (k, &(a, b)) in pairs.iter().enumerate() {
        let x = reactance(a, b, rng);
        let f = capacity(rng);
        lines.push(Line {
            id: format!("l{}", k + 1),
            from_bus: ids[a].clone(),
            to_bus: ids[b].clone(),
            x,
            capacity: f,
            kind: LineKind::Existing,
            capital_cost: 0.0,
            corridor: None,
        });
    }

    // candidate corridors: a tree over the zones, an optional zone cycle,
    // then corridors inside zones or between zone pairs
    let mut corridors: Vec<(usize, usize)> = Vec::new();
    let pick = |z: usize, rng: &mut ChaCha8Rng| *members[z].choose(rng).expect("zones are nonempty");
    let mut order: Vec<usize> = (1..nz).collect();
    order.shuffle(rng);
    let mut joined = vec![0usize];
    let mut tree_edges = Vec::new();
    for z in order {
        let parent = *joined.choose(rng).expect("nonempty");
        tree_edges.push((parent, z));
        corridors.push((pick(parent, rng), pick(z, rng)));
        joined.push(z);
    }
    if spec.zone_cycle {
        // close a cycle between two zones not adjacent in the tree
        let mut closing = Vec::new();
        for a in 0..nz {
            for b in a + 1..nz {
                if !tree_edges.contains(&(a, b)) && !tree_edges.contains(&(b, a)) {
                    closing.push((a, b));
                }
            }
        }
        let &(a, b) = closing.choose(rng)?;
        corridors.push((pick(a, rng), pick(b, rng)));
    }
    while corridors.len() < spec.candidate_corridors {
        let za = rng.gen_range(0..nz);
        let mut zb = if nz > 1 && rng.gen_bool(0.3) { rng.gen_range(0..nz) } else { za };
        let mut za = za;
        if !spec.zone_cycle && za != zb && !tree_edges.contains(&(za, zb)) && !tree_edges.contains(&(zb, za)) {
            // any other zone pair would close a zone cycle; run parallel to the tree instead
            (za, zb) = *tree_edges.choose(rng).expect("several zones");
        }
        let a = pick(za, rng);
        let b = pick(zb, rng);
        if a != b {
            corridors.push((a, b));
        }
    }
    for (c, &(a, b)) in corridors.iter().enumerate() {
        let x = reactance(a, b, rng);
        let f = capacity(rng);
        let cost = ((2e4 + 4e5 * dist(pos[a], pos[b]) * rng.gen_range(0.5..1.5)) / 100.0).round() * 100.0;
        for j in 0..spec.candidates_per_corridor {
            let id = if spec.candidates_per_corridor == 1 {
                format!("c{}", c + 1)
            } else {
                format!("c{}#{}", c + 1, j + 1)
            };
            lines.push(Line {
                id,
                from_bus: ids[a].clone(),
                to_bus: ids[b].clone(),
                x,
                capacity: f,
                kind: LineKind::Candidate,
                capital_cost: cost,
                corridor: Some(format!("c{}", c + 1)),
            });
        }
    }

    let t_n = spec.n_snapshots;
    let raw: Vec<f64> = (0..t_n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let total: f64 = raw.iter().sum();
    let snapshots: Vec<Snapshot> = raw
        .iter()
        .enumerate()
        .map(|(t, w)| Snapshot {
            index: t as i64,
            weight: w / total * 8760.0,
        })
        .collect();
    let profile: Vec<f64> = (0..t_n).map(|_| rng.gen_range(0.7..1.0)).collect();

    let buses: Vec<Bus> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let base = f64::from(rng.gen_range(10u32..=80));
            Bus {
                id: id.clone(),
                zone_hint: Some(format!("z{}", zone_of[i])),
                load: profile.iter().map(|p| (base * p * 100.0).round() / 100.0).collect(),
            }
        })
        .collect();

    // a peaker and a renewable at every bus keep every bus self-sufficient;
    // cheap baseload at a few buses gives transmission its value
    let mut generators = Vec::new();
    for (i, id) in ids.iter().enumerate() {
        generators.push(Generator {
            id: format!("peak:{id}"),
            bus: id.clone(),
            marginal_cost: rng.gen_range(70.0..100.0f64).round(),
            capital_cost: (rng.gen_range(40_000.0..60_000.0f64) / 100.0).round() * 100.0,
            p_nom_max: None,
            availability: vec![1.0; t_n],
            emission_rate: 0.5,
        });
        let mean = spec.renewable_share;
        generators.push(Generator {
            id: format!("res:{id}"),
            bus: id.clone(),
            marginal_cost: 0.0,
            capital_cost: (rng.gen_range(60_000.0..120_000.0f64) / 100.0).round() * 100.0,
            p_nom_max: None,
            availability: (0..t_n)
                .map(|_| ((mean + rng.gen_range(-0.3..0.3)).clamp(0.05, 1.0) * 1e3).round() / 1e3)
                .collect(),
            emission_rate: 0.0,
        });
        if i % 3 == 0 || rng.gen_bool(0.15) {
            generators.push(Generator {
                id: format!("base:{id}"),
                bus: id.clone(),
                marginal_cost: rng.gen_range(10.0..25.0f64).round(),
                capital_cost: (rng.gen_range(15_000.0..30_000.0f64) / 100.0).round() * 100.0,
                p_nom_max: Some(f64::from(rng.gen_range(5u32..=20) * 10)),
                availability: vec![1.0; t_n],
                emission_rate: 0.9,
            });
        }
    }

    let co2 = spec.co2_budget_fraction.map(|frac| {
        let peak_emissions: f64 = snapshots
            .iter()
            .enumerate()
            .map(|(t, s)| s.weight * 0.5 * buses.iter().map(|b| b.load[t]).sum::<f64>())
            .sum();
        (frac * peak_emissions).round()
    });

    let net = Network::new(buses, lines, generators, snapshots, co2).ok()?;
    let zones = synchronous_zones(&net);
    if zones.len() != nz {
        return None;
    }
    let gs = SubnetworkGraph::new(&net, &zones);
    let forest = slack_relaxation_plan(&gs, &net, &SlackStrategy::BreadthFirstCentral).is_ok();
    if forest == spec.zone_cycle {
        return None;
    }
    Some(net)
}

/// Randomised specs spanning 2–12 buses, 1–4 zones, up to 8 candidates and
/// 1–3 snapshots. A quarter of the multi-zone specs with three or more zones
/// close a zone cycle.
pub fn desk_suite(count: usize, seed: u64) -> Vec<InstanceSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| loop {
            let n_buses = rng.gen_range(2..=12usize);
            let n_zones = rng.gen_range(1..=4usize.min(n_buses));
            let zone_cycle = n_zones >= 3 && rng.gen_bool(0.25);
            let per = if rng.gen_bool(0.25) { 2 } else { 1 };
            let min_corr = n_zones - 1 + usize::from(zone_cycle);
            let max_corr = 8 / per;
            if min_corr > max_corr {
                continue;
            }
            let corridors = rng.gen_range(min_corr.max(1)..=max_corr.min(min_corr + 3));
            break InstanceSpec {
                seed: seed.wrapping_mul(1_000_003).wrapping_add(i as u64),
                n_buses,
                mesh_degree: rng.gen_range(1.0..1.8),
                n_zones,
                candidates_per_corridor: per,
                candidate_corridors: corridors,
                n_snapshots: rng.gen_range(1..=3),
                renewable_share: rng.gen_range(0.2..0.6),
                co2_budget_fraction: if rng.gen_bool(0.3) { Some(rng.gen_range(0.4..0.9)) } else { None },
                zone_cycle,
            };
        })
        .collect()
}
