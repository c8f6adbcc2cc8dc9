//! Angle recovery, physical consistency checks and solution reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use tep_milp::{MilpProblem, Solution};

use crate::formulation::{names, TepModel};
use crate::graph::cycle_basis;
use crate::netmodel::{synchronous_zones, Network};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PostprocError {
    #[error("singular reduced Laplacian in zone with slack {slack} (pivot {pivot:e})")]
    SingularLaplacian { slack: String, pivot: f64 },
    #[error("injections in zone with slack {slack} at snapshot {t} do not balance (sum {imbalance:e})")]
    UnbalancedInjections { slack: String, t: usize, imbalance: f64 },
    #[error("solution has no column `{0}`")]
    MissingColumn(String),
    #[error("solution carries no primal point")]
    NoPoint,
}

/// Primal values of one solved model, indexed like the network.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionPoint {
    /// Per line; existing lines count as built.
    pub built: Vec<bool>,
    /// `[line][t]`, MW.
    pub flows: Vec<Vec<f64>>,
    /// `[generator][t]`, MW.
    pub dispatch: Vec<Vec<f64>>,
    /// Per generator, MW.
    pub capacity: Vec<f64>,
    pub objective: f64,
}

impl SolutionPoint {
    pub fn from_model(net: &Network, model: &TepModel, sol: &Solution) -> Result<SolutionPoint, PostprocError> {
        SolutionPoint::from_problem(net, &model.problem, sol)
    }

    pub fn from_problem(net: &Network, p: &MilpProblem, sol: &Solution) -> Result<SolutionPoint, PostprocError> {
        if !sol.has_point() {
            return Err(PostprocError::NoPoint);
        }
        let get = |name: String| sol.value(p, &name).ok_or(PostprocError::MissingColumn(name));
        let n_t = net.n_snapshots();
        let mut built = Vec::with_capacity(net.lines().len());
        let mut flows = Vec::with_capacity(net.lines().len());
        for l in net.lines() {
            built.push(!l.is_candidate() || get(names::build(&l.id))? > 0.5);
            flows.push((0..n_t).map(|t| get(names::flow(&l.id, t))).collect::<Result<Vec<_>, _>>()?);
        }
        let mut dispatch = Vec::new();
        let mut capacity = Vec::new();
        for g in net.generators() {
            capacity.push(get(names::capacity(&g.id))?);
            dispatch.push((0..n_t).map(|t| get(names::dispatch(&g.id, t))).collect::<Result<Vec<_>, _>>()?);
        }
        Ok(SolutionPoint {
            built,
            flows,
            dispatch,
            capacity,
            objective: sol.objective(),
        })
    }

    /// Generation minus load per bus, `[t][bus]`.
    pub fn injections(&self, net: &Network) -> Vec<Vec<f64>> {
        let mut p: Vec<Vec<f64>> = (0..net.n_snapshots())
            .map(|t| net.buses().iter().map(|b| -b.load[t]).collect())
            .collect();
        for (gi, g) in net.generators().iter().enumerate() {
            let b = net.bus_pos(&g.bus).expect("validated generator bus");
            for (t, row) in p.iter_mut().enumerate() {
                row[b] += self.dispatch[gi][t];
            }
        }
        p
    }

    pub fn built_ids<'a>(&self, net: &'a Network) -> Vec<&'a str> {
        net.lines()
            .iter()
            .zip(&self.built)
            .filter(|(l, &b)| l.is_candidate() && b)
            .map(|(l, _)| l.id.as_str())
            .collect()
    }
}

/// Voltage angles `[t][bus]` of the network after investment, from nodal
/// injections `[t][bus]`. Each post-investment zone holds its slack bus at
/// zero and solves the reduced Laplacian system for the rest.
pub fn recover_angles(net: &Network, built: &[bool], injections: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, PostprocError> {
    let post = net.with_investment(built);
    let zones = synchronous_zones(&post);
    let n = post.n_buses();
    let mut angles = vec![vec![0.0; n]; injections.len()];

    for z in &zones.zones {
        let slack = post.buses()[z.slack].id.clone();
        let others: Vec<usize> = z.buses.iter().copied().filter(|&b| b != z.slack).collect();
        for (t, p) in injections.iter().enumerate() {
            let sum: f64 = z.buses.iter().map(|&b| p[b]).sum();
            let scale: f64 = z.buses.iter().map(|&b| p[b].abs()).sum();
            if sum.abs() > 1e-6 * scale + 1e-9 {
                return Err(PostprocError::UnbalancedInjections { slack, t, imbalance: sum });
            }
        }
        if others.is_empty() {
            continue;
        }
        let mut pos = vec![usize::MAX; n];
        for (r, &b) in others.iter().enumerate() {
            pos[b] = r;
        }
        let m = others.len();
        let mut lap = DMatrix::<f64>::zeros(m, m);
        for k in 0..post.lines().len() {
            let (a, b) = post.ends(k);
            if zones.zone_of[a] != z.id {
                continue;
            }
            let y = 1.0 / post.line(k).x;
            for (u, v) in [(a, b), (b, a)] {
                if pos[u] != usize::MAX {
                    lap[(pos[u], pos[u])] += y;
                    if pos[v] != usize::MAX {
                        lap[(pos[u], pos[v])] -= y;
                    }
                }
            }
        }
        let lu = lap.lu();
        let diag = lu.u().diagonal();
        let (lo, hi) = diag
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d.abs()), hi.max(d.abs())));
        if !(lo > 1e-12 * hi.max(1.0)) {
            return Err(PostprocError::SingularLaplacian { slack, pivot: lo });
        }
        log::debug!("zone {slack}: laplacian pivot ratio {:e}", hi / lo);
        for (t, p) in injections.iter().enumerate() {
            let rhs = DVector::from_iterator(m, others.iter().map(|&b| p[b]));
            let theta = lu.solve(&rhs).ok_or(PostprocError::SingularLaplacian { slack: slack.clone(), pivot: lo })?;
            for (r, &b) in others.iter().enumerate() {
                angles[t][b] = theta[r];
            }
        }
    }
    Ok(angles)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Kcl,
    Kvl,
    Limit,
    Unbuilt,
    Dispatch,
    AngleFlow,
    AngleRecovery,
}

impl Check {
    pub fn as_str(self) -> &'static str {
        match self {
            Check::Kcl => "kcl",
            Check::Kvl => "kvl",
            Check::Limit => "limit",
            Check::Unbuilt => "unbuilt",
            Check::Dispatch => "dispatch",
            Check::AngleFlow => "angle_flow",
            Check::AngleRecovery => "angle_recovery",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: Check,
    pub entity: String,
    pub snapshot: Option<usize>,
    pub residual: f64,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}", self.check.as_str(), self.entity)?;
        if let Some(t) = self.snapshot {
            write!(f, " t={t}")?;
        }
        write!(f, " residual {:e}", self.residual)
    }
}

#[derive(Debug, Clone, Error)]
#[error("verification failed: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct VerificationFailure {
    pub violations: Vec<Violation>,
    pub report: Box<FlowReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyTolerances {
    pub kcl: f64,
    pub kvl: f64,
    pub limit: f64,
    pub unbuilt: f64,
    pub angle_flow: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        VerifyTolerances {
            kcl: 1e-6,
            kvl: 1e-6,
            limit: 1e-6,
            unbuilt: 1e-6,
            angle_flow: 1e-6,
        }
    }
}

/// Largest residual of each check.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Residuals {
    pub kcl: f64,
    pub kvl: f64,
    pub limit_excess: f64,
    pub unbuilt_flow: f64,
    pub angle_flow: f64,
    pub max_loading: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapshotReport {
    pub t: usize,
    pub index: i64,
    /// Lines of the post-investment network.
    pub flows: BTreeMap<String, f64>,
    pub loading: BTreeMap<String, f64>,
    pub angles: BTreeMap<String, f64>,
    /// Post-investment basis cycle id to `Σ x·f`.
    pub kvl_residuals: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowReport {
    pub objective: f64,
    pub built: Vec<String>,
    /// Bus ids of each zone after investment.
    pub zones: Vec<Vec<String>>,
    pub snapshots: Vec<SnapshotReport>,
    pub residuals: Residuals,
}

impl FlowReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "objective  {:.6}", self.objective);
        let built = if self.built.is_empty() { "-".to_string() } else { self.built.join(" ") };
        let _ = writeln!(s, "built      {built}");
        let _ = writeln!(s, "zones      {}", self.zones.len());
        for snap in &self.snapshots {
            let _ = writeln!(s, "\nsnapshot {} (index {})", snap.t, snap.index);
            let _ = writeln!(s, "  {:<16} {:>14} {:>9}", "line", "flow", "loading");
            for (id, f) in &snap.flows {
                let _ = writeln!(s, "  {:<16} {:>14.6} {:>9.4}", id, f, snap.loading[id]);
            }
            let _ = writeln!(s, "  {:<16} {:>14}", "bus", "angle");
            for (id, a) in &snap.angles {
                let _ = writeln!(s, "  {:<16} {:>14.6}", id, a);
            }
        }
        let r = &self.residuals;
        let _ = writeln!(
            s,
            "\nresiduals  kcl {:.1e}  kvl {:.1e}  angle-flow {:.1e}  unbuilt {:.1e}  limit {:.1e}",
            r.kcl, r.kvl, r.angle_flow, r.unbuilt_flow, r.limit_excess
        );
        s
    }
}

/// Re-checks a solution against the network alone: nodal balance, line and
/// generator limits, zero flow on unbuilt candidates, KVL on a freshly
/// computed basis of the post-investment network, and agreement between the
/// flows and those implied by the recovered angles.
pub fn verify_solution(net: &Network, point: &SolutionPoint, tol: &VerifyTolerances) -> Result<FlowReport, VerificationFailure> {
    let n_t = net.n_snapshots();
    let mut v = Vec::new();
    let mut res = Residuals::default();
    let flag = |v: &mut Vec<Violation>, check, entity: &str, t: Option<usize>, r: f64, limit: f64| {
        if !(r <= limit) {
            v.push(Violation {
                check,
                entity: entity.to_string(),
                snapshot: t,
                residual: r,
            });
        }
    };

    let inj = point.injections(net);
    let lines = net.lines();
    for t in 0..n_t {
        let mut net_out = vec![0.0; net.n_buses()];
        for (k, f) in point.flows.iter().enumerate() {
            let (a, b) = net.ends(k);
            net_out[a] += f[t];
            net_out[b] -= f[t];
        }
        for (bi, bus) in net.buses().iter().enumerate() {
            let r = (inj[t][bi] - net_out[bi]).abs();
            res.kcl = res.kcl.max(r);
            flag(&mut v, Check::Kcl, &bus.id, Some(t), r, tol.kcl);
        }
        for (k, l) in lines.iter().enumerate() {
            let f = point.flows[k][t];
            if point.built[k] {
                let r = (f.abs() - l.capacity).max(0.0);
                res.limit_excess = res.limit_excess.max(r);
                flag(&mut v, Check::Limit, &l.id, Some(t), r, tol.limit);
            } else {
                res.unbuilt_flow = res.unbuilt_flow.max(f.abs());
                flag(&mut v, Check::Unbuilt, &l.id, Some(t), f.abs(), tol.unbuilt);
            }
        }
        for (gi, g) in net.generators().iter().enumerate() {
            let d = point.dispatch[gi][t];
            let r = (d - g.availability[t] * point.capacity[gi]).max(-d).max(0.0);
            flag(&mut v, Check::Dispatch, &g.id, Some(t), r, tol.limit);
        }
    }
    for (gi, g) in net.generators().iter().enumerate() {
        let c = point.capacity[gi];
        let r = (-c).max(g.p_nom_max.map_or(0.0, |m| c - m)).max(0.0);
        flag(&mut v, Check::Dispatch, &g.id, None, r, tol.limit);
    }

    let post = net.with_investment(&point.built);
    let post_zones = synchronous_zones(&post);
    // post-investment line position to original position
    let orig: Vec<usize> = post.lines().iter().map(|l| net.line_pos(&l.id).expect("same ids")).collect();
    let basis = cycle_basis(&post, &post_zones);

    let angles = match recover_angles(net, &point.built, &inj) {
        Ok(a) => Some(a),
        Err(e) => {
            v.push(Violation {
                check: Check::AngleRecovery,
                entity: e.to_string(),
                snapshot: None,
                residual: f64::NAN,
            });
            None
        }
    };

    let mut snapshots = Vec::with_capacity(n_t);
    for t in 0..n_t {
        let mut snap = SnapshotReport {
            t,
            index: net.snapshots()[t].index,
            flows: BTreeMap::new(),
            loading: BTreeMap::new(),
            angles: BTreeMap::new(),
            kvl_residuals: BTreeMap::new(),
        };
        for c in &basis {
            let r: f64 = c
                .entries
                .iter()
                .map(|&(k, s)| f64::from(s) * post.line(k).x * point.flows[orig[k]][t])
                .sum();
            res.kvl = res.kvl.max(r.abs());
            flag(&mut v, Check::Kvl, &c.signed_ids(&post), Some(t), r.abs(), tol.kvl);
            snap.kvl_residuals.insert(c.id.clone(), r);
        }
        for (pk, l) in post.lines().iter().enumerate() {
            let f = point.flows[orig[pk]][t];
            let loading = if l.capacity > 0.0 { f.abs() / l.capacity } else { 0.0 };
            res.max_loading = res.max_loading.max(loading);
            snap.flows.insert(l.id.clone(), f);
            snap.loading.insert(l.id.clone(), loading);
            if let Some(a) = &angles {
                let (i, j) = post.ends(pk);
                let implied = (a[t][i] - a[t][j]) / l.x;
                let r = (implied - f).abs();
                res.angle_flow = res.angle_flow.max(r);
                flag(&mut v, Check::AngleFlow, &l.id, Some(t), r, tol.angle_flow);
            }
        }
        if let Some(a) = &angles {
            for (bi, b) in net.buses().iter().enumerate() {
                snap.angles.insert(b.id.clone(), a[t][bi]);
            }
        }
        snapshots.push(snap);
    }

    let report = FlowReport {
        objective: point.objective,
        built: point.built_ids(net).into_iter().map(String::from).collect(),
        zones: post_zones
            .zones
            .iter()
            .map(|z| z.buses.iter().map(|&b| net.buses()[b].id.clone()).collect())
            .collect(),
        snapshots,
        residuals: res,
    };
    if v.is_empty() {
        Ok(report)
    } else {
        Err(VerificationFailure {
            violations: v,
            report: Box::new(report),
        })
    }
}
