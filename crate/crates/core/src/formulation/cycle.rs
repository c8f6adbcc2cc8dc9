use std::time::Instant;

use tep_milp::{MilpProblem, Sense, VarId};

use super::{build_core, names, FormulationConfig, FormulationError, FormulationKind, Gate, GatedRow, TepModel};
use crate::bigm::BigMSet;
use crate::graph::CycleSpec;
use crate::netmodel::Network;

/// Cycle-based model: `Σ C·x·f = 0` on every basis cycle and the big-M pair
/// on every candidate cycle, relaxed by `M·Σ(1 - i)` over its gating
/// candidates.
pub fn build_cycle(
    net: &Network,
    basis: &[CycleSpec],
    candidates: &[CycleSpec],
    bigm: &BigMSet,
    cfg: &FormulationConfig,
) -> Result<TepModel, FormulationError> {
    let start = Instant::now();
    let mut p = MilpProblem::new("tep-cycle");
    let v = build_core(net, cfg, &mut p)?;
    let n_t = net.n_snapshots();
    let mut gated = Vec::new();

    let weighted = |c: &CycleSpec, t: usize| -> Vec<(VarId, f64)> {
        c.entries
            .iter()
            .map(|&(k, s)| (v.flow[k][t], f64::from(s) * net.line(k).x))
            .collect()
    };

    for c in basis {
        for t in 0..n_t {
            p.add_row(names::cycle(&c.id, t), weighted(c, t), Sense::Eq, 0.0)?;
        }
    }

    for c in candidates {
        let m = cfg.effective(
            *bigm
                .kvl_cycle
                .get(&c.id)
                .ok_or_else(|| FormulationError::MissingBigM(format!("cycle:{}", c.id)))?,
        );
        let gates: Vec<VarId> = c.gating.iter().map(|&k| v.build[k].expect("gating lines are candidates")).collect();
        let n = gates.len() as f64;
        let binaries: Vec<String> = c.gating.iter().map(|&k| names::build(&net.line(k).id)).collect();
        for t in 0..n_t {
            let base = weighted(c, t);
            let hi = names::candidate_cycle(&c.id, t, "hi");
            let lo = names::candidate_cycle(&c.id, t, "lo");
            p.add_row(&hi, base.iter().copied().chain(gates.iter().map(|&i| (i, m))), Sense::Le, m * n)?;
            p.add_row(&lo, base.into_iter().chain(gates.iter().map(|&i| (i, -m))), Sense::Ge, -m * n)?;
            for row in [hi, lo] {
                gated.push(GatedRow {
                    row,
                    binaries: binaries.clone(),
                    gate: Gate::AnyUnbuilt,
                });
            }
        }
    }

    p.canonicalize();
    Ok(TepModel {
        kind: FormulationKind::Cycle,
        problem: p,
        gated,
        n_buses: net.n_buses(),
        n_snapshots: n_t,
        build_seconds: start.elapsed().as_secs_f64(),
    })
}
