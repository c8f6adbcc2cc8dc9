use tep_milp::{MilpError, MilpProblem, Sense, VarId};

use super::names;
use super::FormulationConfig;
use crate::netmodel::Network;

/// Column handles of the shared block.
#[derive(Debug, Clone)]
pub struct CoreVars {
    /// `[generator]`
    pub capacity: Vec<VarId>,
    /// `[generator][t]`
    pub dispatch: Vec<Vec<VarId>>,
    /// `[line][t]`
    pub flow: Vec<Vec<VarId>>,
    /// `[line]`, `None` for existing lines.
    pub build: Vec<Option<VarId>>,
}

/// Objective, nodal balance, availability, line limits and the optional
/// emission budget.
pub fn build_core(
    net: &Network,
    cfg: &FormulationConfig,
    p: &mut MilpProblem,
) -> Result<CoreVars, MilpError> {
    let n_t = net.n_snapshots();
    let snaps = net.snapshots();

    let mut capacity = Vec::new();
    let mut dispatch = Vec::new();
    for g in net.generators() {
        let cap = p.continuous(
            names::capacity(&g.id),
            0.0,
            g.p_nom_max.unwrap_or(f64::INFINITY),
            g.capital_cost,
        )?;
        let mut per_t = Vec::with_capacity(n_t);
        for (t, s) in snaps.iter().enumerate() {
            let d = p.continuous(names::dispatch(&g.id, t), 0.0, f64::INFINITY, s.weight * g.marginal_cost)?;
            p.add_row(
                format!("avail:{}:{t}", g.id),
                [(d, 1.0), (cap, -g.availability[t])],
                Sense::Le,
                0.0,
            )?;
            per_t.push(d);
        }
        capacity.push(cap);
        dispatch.push(per_t);
    }

    let mut flow = Vec::new();
    let mut build = Vec::new();
    for l in net.lines() {
        let i = if l.is_candidate() {
            Some(p.binary(names::build(&l.id), l.capital_cost)?)
        } else {
            None
        };
        let mut per_t = Vec::with_capacity(n_t);
        for t in 0..n_t {
            let f = match i {
                None => p.continuous(names::flow(&l.id, t), -l.capacity, l.capacity, 0.0)?,
                Some(i) => {
                    let f = p.continuous(names::flow(&l.id, t), f64::NEG_INFINITY, f64::INFINITY, 0.0)?;
                    p.add_row(format!("cand:{}:{t}:hi", l.id), [(f, 1.0), (i, -l.capacity)], Sense::Le, 0.0)?;
                    p.add_row(format!("cand:{}:{t}:lo", l.id), [(f, 1.0), (i, l.capacity)], Sense::Ge, 0.0)?;
                    f
                }
            };
            per_t.push(f);
        }
        flow.push(per_t);
        build.push(i);
    }

    // generation minus outgoing plus incoming flow equals load
    let mut at_bus: Vec<Vec<usize>> = vec![Vec::new(); net.n_buses()];
    for (gi, g) in net.generators().iter().enumerate() {
        at_bus[net.bus_pos(&g.bus).unwrap()].push(gi);
    }
    let mut incident: Vec<Vec<(usize, f64)>> = vec![Vec::new(); net.n_buses()];
    for k in 0..net.lines().len() {
        let (a, b) = net.ends(k);
        incident[a].push((k, -1.0));
        incident[b].push((k, 1.0));
    }
    for (bi, bus) in net.buses().iter().enumerate() {
        for t in 0..n_t {
            let terms = at_bus[bi]
                .iter()
                .map(|&gi| (dispatch[gi][t], 1.0))
                .chain(incident[bi].iter().map(|&(k, s)| (flow[k][t], s)));
            p.add_row(names::kcl(&bus.id, t), terms, Sense::Eq, bus.load[t])?;
        }
    }

    if let (true, Some(budget)) = (cfg.include_co2, net.co2_budget()) {
        let mut terms = Vec::new();
        for (gi, g) in net.generators().iter().enumerate() {
            if g.emission_rate > 0.0 {
                for (t, s) in snaps.iter().enumerate() {
                    terms.push((dispatch[gi][t], s.weight * g.emission_rate));
                }
            }
        }
        if !terms.is_empty() {
            p.add_row("co2", terms, Sense::Le, budget)?;
        }
    }

    Ok(CoreVars {
        capacity,
        dispatch,
        flow,
        build,
    })
}
