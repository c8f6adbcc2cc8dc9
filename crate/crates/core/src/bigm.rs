//! Big-M constants for the disjunctive KVL and slack constraints, each with
//! the path or cycle it was derived from.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{shortest_path, CycleSpec, SlackRelaxationPlan};
use crate::netmodel::{Network, Zones};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BigMError {
    #[error("candidate {0} joins two synchronous zones")]
    NotSameZone(String),
    #[error("candidate {0} lies inside one synchronous zone")]
    SameZone(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Shortest F·x path inside the zone divided by the candidate reactance.
    KvlIntra,
    /// Sum of F·x over all lines divided by the candidate reactance.
    KvlInter,
    /// Shortest F·x path between the two slack buses through the candidate.
    Slack,
    /// Sum of |C|·x·F over the cycle.
    Cycle,
    /// A user-supplied value.
    Override,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::KvlIntra => "kvl_intra",
            Rule::KvlInter => "kvl_inter",
            Rule::Slack => "slack",
            Rule::Cycle => "cycle",
            Rule::Override => "override",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub rule: Rule,
    /// Line ids of the path or cycle.
    pub members: Vec<String>,
    /// Named contributions, e.g. path length, set maximum, upstream offset.
    pub terms: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BigMKind {
    KvlAngle,
    Slack,
    KvlCycle,
}

impl BigMKind {
    pub fn prefix(self) -> &'static str {
        match self {
            BigMKind::KvlAngle => "kvl",
            BigMKind::Slack => "slack",
            BigMKind::KvlCycle => "cycle",
        }
    }
}

/// All big-M values. Angle and slack values are keyed by candidate line id,
/// cycle values by cycle id; provenance by `<kind prefix>:<key>`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BigMSet {
    /// MW.
    pub kvl_angle: BTreeMap<String, f64>,
    /// Angle units (same as F·x).
    pub slack: BTreeMap<String, f64>,
    /// MW times per unit reactance.
    pub kvl_cycle: BTreeMap<String, f64>,
    pub provenance: BTreeMap<String, Provenance>,
}

impl BigMSet {
    pub fn map(&self, kind: BigMKind) -> &BTreeMap<String, f64> {
        match kind {
            BigMKind::KvlAngle => &self.kvl_angle,
            BigMKind::Slack => &self.slack,
            BigMKind::KvlCycle => &self.kvl_cycle,
        }
    }

    pub fn map_mut(&mut self, kind: BigMKind) -> &mut BTreeMap<String, f64> {
        match kind {
            BigMKind::KvlAngle => &mut self.kvl_angle,
            BigMKind::Slack => &mut self.slack,
            BigMKind::KvlCycle => &mut self.kvl_cycle,
        }
    }

    /// Multiplies every value by `factor`.
    pub fn scaled(&self, factor: f64) -> BigMSet {
        let mut out = self.clone();
        for kind in [BigMKind::KvlAngle, BigMKind::Slack, BigMKind::KvlCycle] {
            for v in out.map_mut(kind).values_mut() {
                *v *= factor;
            }
        }
        out
    }

    /// Replaces one value and records the override. Returns false when the
    /// key is unknown.
    pub fn set(&mut self, kind: BigMKind, key: &str, value: f64) -> bool {
        let Some(v) = self.map_mut(kind).get_mut(key) else {
            return false;
        };
        let old = *v;
        *v = value;
        let prov = self
            .provenance
            .entry(format!("{}:{key}", kind.prefix()))
            .or_insert(Provenance {
                rule: Rule::Override,
                members: Vec::new(),
                terms: Vec::new(),
            });
        prov.rule = Rule::Override;
        prov.terms.push(("replaced".into(), old));
        true
    }

    pub fn len(&self) -> usize {
        self.kvl_angle.len() + self.slack.len() + self.kvl_cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn ids(net: &Network, lines: impl IntoIterator<Item = usize>) -> Vec<String> {
    lines.into_iter().map(|k| net.line(k).id.clone()).collect()
}

/// `|P_min| / x_ℓ` with `P_min` the F·x-weighted shortest existing path
/// between the candidate's endpoints.
pub fn kvl_bigm_intra(net: &Network, zones: &Zones, line: usize) -> Result<(f64, Provenance), BigMError> {
    let (a, b) = net.ends(line);
    let l = net.line(line);
    if !zones.same_zone(a, b) {
        return Err(BigMError::NotSameZone(l.id.clone()));
    }
    let path = shortest_path(net, a, b, |k| net.line(k).fx(), |k| !net.line(k).is_candidate())
        .expect("buses of one zone are connected");
    let value = path.length / l.x;
    Ok((
        value,
        Provenance {
            rule: Rule::KvlIntra,
            members: ids(net, path.lines.iter().map(|p| p.0)),
            terms: vec![("path_fx".into(), path.length), ("x".into(), l.x)],
        },
    ))
}

/// `Σ_{L⁰ ∪ L¹} F·x / x_ℓ`.
pub fn kvl_bigm_inter(net: &Network, zones: &Zones, line: usize) -> Result<(f64, Provenance), BigMError> {
    let (a, b) = net.ends(line);
    let l = net.line(line);
    if zones.same_zone(a, b) {
        return Err(BigMError::SameZone(l.id.clone()));
    }
    let total: f64 = net.lines().iter().map(|k| k.fx()).sum();
    Ok((
        total / l.x,
        Provenance {
            rule: Rule::KvlInter,
            members: Vec::new(),
            terms: vec![("total_fx".into(), total), ("x".into(), l.x)],
        },
    ))
}

/// Slack relaxation constants: per candidate the F·x shortest path between
/// the slack buses of its two zones through existing lines and the
/// candidate itself, raised to the maximum of its relaxing set, then offset
/// by the largest value of the upstream zone, walking each tree from its
/// root.
pub fn slack_bigm(
    net: &Network,
    zones: &Zones,
    plan: &SlackRelaxationPlan,
) -> BTreeMap<usize, (f64, Provenance)> {
    let mut zone_max: BTreeMap<usize, f64> = BTreeMap::new();
    let mut out = BTreeMap::new();
    for e in &plan.entries {
        let (s_up, s_v) = (zones.slack_bus(e.upstream), zones.slack_bus(e.zone));
        let mut bases = Vec::with_capacity(e.relaxing.len());
        for &c in &e.relaxing {
            let path = shortest_path(
                net,
                s_up,
                s_v,
                |k| net.line(k).fx(),
                |k| !net.line(k).is_candidate() || k == c,
            )
            .expect("the candidate joins the two zones");
            bases.push((c, path));
        }
        let set_max = bases.iter().map(|(_, p)| p.length).fold(0.0, f64::max);
        let upstream = zone_max.get(&e.upstream).copied().unwrap_or(0.0);
        let value = set_max + upstream;
        zone_max.insert(e.zone, value);
        for (c, path) in bases {
            out.insert(
                c,
                (
                    value,
                    Provenance {
                        rule: Rule::Slack,
                        members: ids(net, path.lines.iter().map(|p| p.0)),
                        terms: vec![
                            ("path_fx".into(), path.length),
                            ("set_max".into(), set_max),
                            ("upstream_max".into(), upstream),
                        ],
                    },
                ),
            );
        }
    }
    out
}

/// `Σ |C_ℓc|·x_ℓ·F_ℓ`.
pub fn cycle_bigm(net: &Network, cycle: &CycleSpec) -> (f64, Provenance) {
    let value = cycle
        .entries
        .iter()
        .map(|&(k, s)| f64::from(s.unsigned_abs()) * net.line(k).fx())
        .sum();
    (
        value,
        Provenance {
            rule: Rule::Cycle,
            members: ids(net, cycle.entries.iter().map(|p| p.0)),
            terms: vec![("sum_fx".into(), value)],
        },
    )
}

/// Every big-M of the instance. Slack values need a plan and are omitted
/// without one.
pub fn compute_all(
    net: &Network,
    zones: &Zones,
    candidate_cycles: &[CycleSpec],
    plan: Option<&SlackRelaxationPlan>,
) -> BigMSet {
    let mut set = BigMSet::default();
    for k in net.candidate_lines() {
        let (a, b) = net.ends(k);
        let (v, p) = if zones.same_zone(a, b) {
            kvl_bigm_intra(net, zones, k)
        } else {
            kvl_bigm_inter(net, zones, k)
        }
        .expect("rule chosen by zone membership");
        let id = net.line(k).id.clone();
        set.provenance.insert(format!("kvl:{id}"), p);
        set.kvl_angle.insert(id, v);
    }
    if let Some(plan) = plan {
        for (k, (v, p)) in slack_bigm(net, zones, plan) {
            let id = net.line(k).id.clone();
            set.provenance.insert(format!("slack:{id}"), p);
            set.slack.insert(id, v);
        }
    }
    for c in candidate_cycles {
        let (v, p) = cycle_bigm(net, c);
        set.provenance.insert(format!("cycle:{}", c.id), p);
        set.kvl_cycle.insert(c.id.clone(), v);
    }
    set
}
