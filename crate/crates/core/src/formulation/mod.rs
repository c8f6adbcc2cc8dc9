//! MILP builders: the shared investment-planning core plus either the
//! angle-based or the cycle-based KVL block.
//!
//! Column names: `G:<gen>` capacity, `g:<gen>:<t>` dispatch, `f:<line>:<t>`
//! flow, `i:<line>` build decision, `theta:<bus>:<t>` angle. Row names:
//! `kcl:<bus>:<t>`, `avail:<gen>:<t>`, `cand:<line>:<t>:{lo,hi}`, `co2`,
//! `kvl:<line>:<t>`, `kvlm:<line>:<t>:{lo,hi}`, `slack:<bus>:<t>[:{lo,hi}]`,
//! `cyc:<cycle>:<t>` and `ccyc:<cycle>:<t>:{lo,hi}`. `t` is the snapshot
//! position, starting at 0.

mod angle;
mod core;
mod cycle;
pub mod names;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use tep_milp::{MilpError, MilpProblem, ProblemStats};

use crate::bigm::{compute_all, BigMSet};
use crate::graph::{
    candidate_cycles_inter, candidate_cycles_intra, cycle_basis, slack_relaxation_plan, CycleSpec,
    GraphError, NotAForest, SlackRelaxationPlan, SlackStrategy, SubnetworkGraph,
    DEFAULT_CYCLE_CAP,
};
use crate::netmodel::{synchronous_zones, Network, Zones};

pub use self::angle::build_angle;
pub use self::core::{build_core, CoreVars};
pub use self::cycle::build_cycle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulationKind {
    Angle,
    Cycle,
}

impl FormulationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FormulationKind::Angle => "angle",
            FormulationKind::Cycle => "cycle",
        }
    }
}

impl std::fmt::Display for FormulationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormulationConfig {
    pub kind: FormulationKind,
    /// Add the emission budget row when the network has a budget.
    pub include_co2: bool,
    pub mip_gap: f64,
    /// Multiplier applied to every big-M before it enters a row.
    pub bigm_slack_factor: f64,
    /// Absolute amount added to every big-M coefficient so that a relaxed
    /// row never sits exactly on its bound.
    pub bigm_margin: f64,
}

impl FormulationConfig {
    pub fn new(kind: FormulationKind) -> Self {
        FormulationConfig {
            kind,
            include_co2: true,
            mip_gap: 0.005,
            bigm_slack_factor: 1.0,
            bigm_margin: 1e-3,
        }
    }

    pub(crate) fn effective(&self, m: f64) -> f64 {
        self.bigm_slack_factor * m + self.bigm_margin
    }
}

#[derive(Debug, Error)]
pub enum FormulationError {
    #[error("angle-based formulation unsupported: {0}")]
    AngleUnsupported(NotAForest),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("missing big-M for {0}")]
    MissingBigM(String),
    #[error(transparent)]
    Milp(#[from] MilpError),
}

/// When a disjunctive row must be non-binding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    /// Some gating candidate is not built (KVL rows of candidates and
    /// candidate cycles).
    AnyUnbuilt,
    /// Some relaxing candidate is built (slack rows of non-root zones).
    AnyBuilt,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GatedRow {
    pub row: String,
    /// Build-decision column names.
    pub binaries: Vec<String>,
    pub gate: Gate,
}

impl GatedRow {
    pub fn relaxed(&self, built: impl Fn(&str) -> bool) -> bool {
        match self.gate {
            Gate::AnyUnbuilt => self.binaries.iter().any(|b| !built(b)),
            Gate::AnyBuilt => self.binaries.iter().any(|b| built(b)),
        }
    }
}

/// A built problem with the bookkeeping needed to check it.
#[derive(Debug, Clone)]
pub struct TepModel {
    pub kind: FormulationKind,
    pub problem: MilpProblem,
    pub gated: Vec<GatedRow>,
    pub n_buses: usize,
    pub n_snapshots: usize,
    pub build_seconds: f64,
}

impl TepModel {
    pub fn stats(&self) -> ProblemStats {
        self.problem.stats()
    }
}

pub fn problem_stats(p: &MilpProblem) -> ProblemStats {
    p.stats()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepareOptions {
    pub strategy: SlackStrategy,
    pub cycle_cap: usize,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        PrepareOptions {
            strategy: SlackStrategy::BreadthFirstCentral,
            cycle_cap: DEFAULT_CYCLE_CAP,
        }
    }
}

/// Graph structures and big-M values shared by both builders.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub zones: Zones,
    pub basis: Vec<CycleSpec>,
    pub subnetwork: SubnetworkGraph,
    pub plan: Result<SlackRelaxationPlan, NotAForest>,
    /// Intra-zone candidate cycles followed by inter-zone ones.
    pub candidate_cycles: Result<Vec<CycleSpec>, GraphError>,
    pub bigm: BigMSet,
}

impl Prepared {
    pub fn new(net: &Network, opts: &PrepareOptions) -> Prepared {
        let zones = synchronous_zones(net);
        let basis = cycle_basis(net, &zones);
        let subnetwork = SubnetworkGraph::new(net, &zones);
        let plan = slack_relaxation_plan(&subnetwork, net, &opts.strategy);
        let candidate_cycles = candidate_cycles_inter(net, &zones, &subnetwork, opts.cycle_cap).map(|inter| {
            let mut all = candidate_cycles_intra(net, &zones);
            all.extend(inter);
            all
        });
        let bigm = compute_all(
            net,
            &zones,
            candidate_cycles.as_deref().unwrap_or(&[]),
            plan.as_ref().ok(),
        );
        Prepared {
            zones,
            basis,
            subnetwork,
            plan,
            candidate_cycles,
            bigm,
        }
    }

    pub fn build(&self, net: &Network, cfg: &FormulationConfig) -> Result<TepModel, FormulationError> {
        self.build_with(net, cfg, &self.bigm)
    }

    /// Builds with substitute big-M values.
    pub fn build_with(
        &self,
        net: &Network,
        cfg: &FormulationConfig,
        bigm: &BigMSet,
    ) -> Result<TepModel, FormulationError> {
        match cfg.kind {
            FormulationKind::Angle => {
                let plan = self
                    .plan
                    .as_ref()
                    .map_err(|e| FormulationError::AngleUnsupported(e.clone()))?;
                build_angle(net, &self.zones, plan, bigm, cfg)
            }
            FormulationKind::Cycle => {
                let cycles = self.candidate_cycles.as_ref().map_err(|e| e.clone())?;
                build_cycle(net, &self.basis, cycles, bigm, cfg)
            }
        }
    }
}
