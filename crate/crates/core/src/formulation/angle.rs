use std::time::Instant;

use tep_milp::{MilpProblem, Sense};

use super::{build_core, names, FormulationConfig, FormulationError, FormulationKind, Gate, GatedRow, TepModel};
use crate::bigm::BigMSet;
use crate::graph::SlackRelaxationPlan;
use crate::netmodel::{Network, Zones};

/// Angle-based model: `f = Δθ/x` on existing lines, the big-M pair on
/// candidates, a fixed reference angle in every root zone and relaxed ones
/// elsewhere.
pub fn build_angle(
    net: &Network,
    zones: &Zones,
    plan: &SlackRelaxationPlan,
    bigm: &BigMSet,
    cfg: &FormulationConfig,
) -> Result<TepModel, FormulationError> {
    let start = Instant::now();
    let mut p = MilpProblem::new("tep-angle");
    let v = build_core(net, cfg, &mut p)?;
    let n_t = net.n_snapshots();
    let mut gated = Vec::new();

    let mut theta = Vec::with_capacity(net.n_buses());
    for b in net.buses() {
        let per_t = (0..n_t)
            .map(|t| p.continuous(names::angle(&b.id, t), f64::NEG_INFINITY, f64::INFINITY, 0.0))
            .collect::<Result<Vec<_>, _>>()?;
        theta.push(per_t);
    }

    for (k, l) in net.lines().iter().enumerate() {
        let (a, b) = net.ends(k);
        let inv_x = 1.0 / l.x;
        for t in 0..n_t {
            let base = [(v.flow[k][t], 1.0), (theta[a][t], -inv_x), (theta[b][t], inv_x)];
            match v.build[k] {
                None => {
                    p.add_row(names::kvl(&l.id, t), base, Sense::Eq, 0.0)?;
                }
                Some(i) => {
                    let m = cfg.effective(
                        *bigm
                            .kvl_angle
                            .get(&l.id)
                            .ok_or_else(|| FormulationError::MissingBigM(format!("kvl:{}", l.id)))?,
                    );
                    let hi = names::kvl_bigm(&l.id, t, "hi");
                    let lo = names::kvl_bigm(&l.id, t, "lo");
                    p.add_row(&hi, base.into_iter().chain([(i, m)]), Sense::Le, m)?;
                    p.add_row(&lo, base.into_iter().chain([(i, -m)]), Sense::Ge, -m)?;
                    for row in [hi, lo] {
                        gated.push(GatedRow {
                            row,
                            binaries: vec![names::build(&l.id)],
                            gate: Gate::AnyUnbuilt,
                        });
                    }
                }
            }
        }
    }

    for z in &zones.zones {
        let bus = &net.buses()[z.slack].id;
        let entry = plan.entry(z.id);
        for t in 0..n_t {
            let th = theta[z.slack][t];
            let Some(e) = entry else {
                p.add_row(names::slack(bus, t), [(th, 1.0)], Sense::Eq, 0.0)?;
                continue;
            };
            let mut relax = Vec::with_capacity(e.relaxing.len());
            for &c in &e.relaxing {
                let id = &net.line(c).id;
                let m = bigm
                    .slack
                    .get(id)
                    .ok_or_else(|| FormulationError::MissingBigM(format!("slack:{id}")))?;
                relax.push((v.build[c].expect("relaxing lines are candidates"), cfg.effective(*m)));
            }
            let hi = names::slack_relaxed(bus, t, "hi");
            let lo = names::slack_relaxed(bus, t, "lo");
            p.add_row(&hi, [(th, 1.0)].into_iter().chain(relax.iter().map(|&(i, m)| (i, -m))), Sense::Le, 0.0)?;
            p.add_row(&lo, [(th, 1.0)].into_iter().chain(relax.iter().copied()), Sense::Ge, 0.0)?;
            let binaries: Vec<String> = e.relaxing.iter().map(|&c| names::build(&net.line(c).id)).collect();
            for row in [hi, lo] {
                gated.push(GatedRow {
                    row,
                    binaries: binaries.clone(),
                    gate: Gate::AnyBuilt,
                });
            }
        }
    }

    p.canonicalize();
    Ok(TepModel {
        kind: FormulationKind::Angle,
        problem: p,
        gated,
        n_buses: net.n_buses(),
        n_snapshots: n_t,
        build_seconds: start.elapsed().as_secs_f64(),
    })
}
