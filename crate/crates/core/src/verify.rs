//! Exhaustive cross-checks of the two formulations on small networks.
//!
//! For every binary assignment the big-M model is compared against the
//! same network with unbuilt candidates removed and built ones turned into
//! existing lines, solved as a plain dispatch LP. Every disjunctive row whose
//! gating condition is unmet must keep a positive slack.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use tep_milp::{bruteforce_milp, solve_lp, solve_milp, MilpConfig, MilpError, Solution, Status, Tolerances};

use crate::bigm::{BigMKind, BigMSet};
use crate::formulation::{FormulationConfig, FormulationError, FormulationKind, Prepared, TepModel};
use crate::netmodel::Network;
use crate::postproc::{verify_solution, SolutionPoint, VerifyTolerances};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleConfig {
    pub max_binaries: usize,
    /// Minimum slack of a non-binding disjunctive row.
    pub min_slack: f64,
    /// Relative objective agreement.
    pub rel_tol: f64,
    pub mip_gap: f64,
    pub physics: VerifyTolerances,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_binaries: 20,
            min_slack: 1e-6,
            rel_tol: 1e-6,
            mip_gap: 0.005,
            physics: VerifyTolerances::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Milp(#[from] MilpError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OracleViolation {
    /// A row that should be non-binding is tight or violated.
    BindingRow {
        formulation: FormulationKind,
        built: Vec<String>,
        row: String,
        slack: f64,
    },
    /// Big-M model and line-removal model disagree on one assignment.
    RemovalMismatch {
        formulation: FormulationKind,
        built: Vec<String>,
        bigm: Option<f64>,
        removal: Option<f64>,
    },
    /// Exact optima of the two formulations differ.
    Equivalence { angle: f64, cycle: f64 },
    /// The upper bound of one gap-limited solve lies below the lower bound
    /// of the other.
    CrossBound {
        angle: (f64, f64),
        cycle: (f64, f64),
    },
    /// Branch and bound leaves the gap interval around the exact optimum.
    BranchAndBound {
        formulation: FormulationKind,
        exact: f64,
        upper: f64,
        lower: f64,
    },
    /// The optimal point fails the physics checks.
    Physics {
        formulation: FormulationKind,
        detail: String,
    },
}

impl std::fmt::Display for OracleViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OracleViolation::BindingRow { formulation, built, row, slack } => {
                write!(f, "{formulation}: row {row} has slack {slack:e} with built {built:?}")
            }
            OracleViolation::RemovalMismatch { formulation, built, bigm, removal } => {
                write!(f, "{formulation}: built {built:?} gives {bigm:?}, line removal gives {removal:?}")
            }
            OracleViolation::Equivalence { angle, cycle } => write!(f, "angle optimum {angle} differs from cycle optimum {cycle}"),
            OracleViolation::CrossBound { angle, cycle } => {
                write!(f, "bounds do not overlap: angle [{}, {}], cycle [{}, {}]", angle.1, angle.0, cycle.1, cycle.0)
            }
            OracleViolation::BranchAndBound { formulation, exact, upper, lower } => {
                write!(f, "{formulation}: branch and bound [{lower}, {upper}] misses exact optimum {exact}")
            }
            OracleViolation::Physics { formulation, detail } => write!(f, "{formulation}: {detail}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulationOracle {
    pub formulation: FormulationKind,
    pub binaries: usize,
    pub assignments: usize,
    pub feasible_assignments: usize,
    pub best_objective: Option<f64>,
    pub best_built: Vec<String>,
    /// Smallest slack over all rows that should be non-binding.
    pub min_gated_slack: f64,
    /// Largest relative gap to the line-removal optimum.
    pub max_removal_diff: f64,
    /// Bounds of the gap-limited branch and bound `(upper, lower)`.
    pub bnb_bounds: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub formulations: Vec<FormulationOracle>,
    /// Formulations that could not be built, with the reason.
    pub skipped: Vec<(FormulationKind, String)>,
    pub violations: Vec<OracleViolation>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn get(&self, kind: FormulationKind) -> Option<&FormulationOracle> {
        self.formulations.iter().find(|f| f.formulation == kind)
    }
}

pub fn relative_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Optimum of the network with the given lines built and all other
/// candidates removed, including the capital cost of the built lines.
pub fn line_removal_optimum(net: &Network, built: &[bool], tol: &Tolerances) -> Result<Option<f64>, OracleError> {
    let post = net.with_investment(built);
    let prep = Prepared::new(&post, &Default::default());
    let model = prep.build(&post, &FormulationConfig::new(FormulationKind::Angle))?;
    let sol = solve_lp(&model.problem, tol)?;
    let capex: f64 = net
        .lines()
        .iter()
        .zip(built)
        .filter(|(l, &b)| l.is_candidate() && b)
        .map(|(l, _)| l.capital_cost)
        .sum();
    Ok((sol.status == Status::Optimal).then(|| sol.objective() + capex))
}

/// Runs the exhaustive checks for both formulations. A formulation that
/// cannot be built (angle-based on zone cycles) is skipped and recorded.
pub fn run_oracle(net: &Network, prep: &Prepared, bigm: &BigMSet, cfg: &OracleConfig) -> Result<OracleReport, OracleError> {
    let tol = Tolerances::default();
    let mut report = OracleReport {
        formulations: Vec::new(),
        skipped: Vec::new(),
        violations: Vec::new(),
    };
    let mut removal_cache: HashMap<Vec<bool>, Option<f64>> = HashMap::new();
    let mut exact = Vec::new();

    for kind in [FormulationKind::Angle, FormulationKind::Cycle] {
        let mut fcfg = FormulationConfig::new(kind);
        fcfg.mip_gap = cfg.mip_gap;
        let model = match prep.build_with(net, &fcfg, bigm) {
            Ok(m) => m,
            Err(e @ FormulationError::AngleUnsupported(_)) => {
                report.skipped.push((kind, e.to_string()));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let (summary, best) = check_formulation(net, &model, cfg, &tol, &mut removal_cache, &mut report.violations)?;
        exact.push((kind, best));
        report.formulations.push(summary);
    }

    if let [(_, Some(a)), (_, Some(c))] = exact.as_slice() {
        if relative_diff(*a, *c) > cfg.rel_tol {
            report.violations.push(OracleViolation::Equivalence { angle: *a, cycle: *c });
        }
    }
    if let (Some(a), Some(c)) = (
        report.get(FormulationKind::Angle).and_then(|f| f.bnb_bounds),
        report.get(FormulationKind::Cycle).and_then(|f| f.bnb_bounds),
    ) {
        if !bounds_overlap(a, c, cfg.rel_tol) {
            report.violations.push(OracleViolation::CrossBound { angle: a, cycle: c });
        }
    }
    Ok(report)
}

/// Each upper bound must not lie below the other lower bound.
pub fn bounds_overlap(a: (f64, f64), b: (f64, f64), rel_tol: f64) -> bool {
    let ok = |upper: f64, lower: f64| upper >= lower - rel_tol * upper.abs().max(1.0);
    ok(a.0, b.1) && ok(b.0, a.1)
}

fn check_formulation(
    net: &Network,
    model: &TepModel,
    cfg: &OracleConfig,
    tol: &Tolerances,
    removal_cache: &mut HashMap<Vec<bool>, Option<f64>>,
    violations: &mut Vec<OracleViolation>,
) -> Result<(FormulationOracle, Option<f64>), OracleError> {
    let kind = model.kind;
    let p = &model.problem;
    let bf = bruteforce_milp(p, cfg.max_binaries, tol)?;
    let line_of: Vec<usize> = bf
        .binaries
        .iter()
        .map(|&v| {
            let name = &p.variable(v).name;
            net.line_pos(name.strip_prefix("i:").expect("build columns")).expect("known line")
        })
        .collect();
    let rows: Vec<_> = model
        .gated
        .iter()
        .map(|g| (g, p.row(&g.row).expect("gated rows exist")))
        .collect();

    let mut summary = FormulationOracle {
        formulation: kind,
        binaries: bf.binaries.len(),
        assignments: bf.assignments.len(),
        feasible_assignments: 0,
        best_objective: None,
        best_built: Vec::new(),
        min_gated_slack: f64::INFINITY,
        max_removal_diff: 0.0,
        bnb_bounds: None,
    };

    for a in &bf.assignments {
        let mut built = vec![true; net.lines().len()];
        for k in net.candidate_lines() {
            built[k] = false;
        }
        for (bit, &k) in a.bits.iter().zip(&line_of) {
            built[k] = *bit;
        }
        let built_ids = || -> Vec<String> {
            line_of
                .iter()
                .zip(&a.bits)
                .filter(|(_, &b)| b)
                .map(|(&k, _)| net.line(k).id.clone())
                .collect()
        };
        let bigm_obj = (a.solution.status == Status::Optimal).then(|| a.solution.objective());
        let removal = match removal_cache.get(&built) {
            Some(r) => *r,
            None => {
                let r = line_removal_optimum(net, &built, tol)?;
                removal_cache.insert(built.clone(), r);
                r
            }
        };
        match (bigm_obj, removal) {
            (Some(x), Some(y)) => {
                let d = relative_diff(x, y);
                summary.max_removal_diff = summary.max_removal_diff.max(d);
                if d > cfg.rel_tol {
                    violations.push(OracleViolation::RemovalMismatch {
                        formulation: kind,
                        built: built_ids(),
                        bigm: bigm_obj,
                        removal,
                    });
                }
            }
            (None, None) => {}
            _ => violations.push(OracleViolation::RemovalMismatch {
                formulation: kind,
                built: built_ids(),
                bigm: bigm_obj,
                removal,
            }),
        }
        if bigm_obj.is_none() {
            continue;
        }
        summary.feasible_assignments += 1;
        let is_built = |name: &str| {
            let k = net.line_pos(name.strip_prefix("i:").expect("build columns")).expect("known line");
            built[k]
        };
        for &(g, r) in &rows {
            if !g.relaxed(is_built) {
                continue;
            }
            let s = p.constraint(r).slack(&a.solution.values);
            summary.min_gated_slack = summary.min_gated_slack.min(s);
            if !(s >= cfg.min_slack) {
                violations.push(OracleViolation::BindingRow {
                    formulation: kind,
                    built: built_ids(),
                    row: g.row.clone(),
                    slack: s,
                });
            }
        }
    }

    let best = (bf.best.status == Status::Optimal).then(|| bf.best.objective());
    summary.best_objective = best;
    if let Some(exact) = best {
        let point = SolutionPoint::from_model(net, model, &bf.best).expect("oracle solution has every column");
        summary.best_built = point.built_ids(net).into_iter().map(String::from).collect();
        if let Err(e) = verify_solution(net, &point, &cfg.physics) {
            violations.push(OracleViolation::Physics {
                formulation: kind,
                detail: e.to_string(),
            });
        }
        let mut mcfg = MilpConfig {
            mip_gap: cfg.mip_gap,
            ..MilpConfig::default()
        };
        mcfg.tolerances = *tol;
        let sol: Solution = solve_milp(p, &mcfg)?;
        if sol.has_point() {
            let (upper, lower) = (sol.objective_upper, sol.objective_lower);
            summary.bnb_bounds = Some((upper, lower));
            let slack = cfg.rel_tol * exact.abs().max(1.0);
            if !(lower <= exact + slack && upper >= exact - slack && upper <= exact * (1.0 + cfg.mip_gap) + slack) {
                violations.push(OracleViolation::BranchAndBound {
                    formulation: kind,
                    exact,
                    upper,
                    lower,
                });
            }
        }
    }
    Ok((summary, best))
}

/// Big-M keys of a prepared network, as `(kind, key)`.
pub fn bigm_keys(bigm: &BigMSet) -> Vec<(BigMKind, String)> {
    [BigMKind::KvlAngle, BigMKind::Slack, BigMKind::KvlCycle]
        .into_iter()
        .flat_map(|k| bigm.map(k).keys().map(move |key| (k, key.clone())))
        .collect()
}

/// Result of running the oracle with one big-M halved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlOutcome {
    pub kind: BigMKind,
    pub key: String,
    pub value: f64,
    pub detected: bool,
    pub violations: usize,
}

/// Halves each big-M of the network in turn and records whether the oracle
/// notices. The exact value has no margin to spare, so each halving that
/// cuts into a reachable flow should be detected.
pub fn negative_control(net: &Network, prep: &Prepared, cfg: &OracleConfig) -> Result<Vec<ControlOutcome>, OracleError> {
    let mut out = Vec::new();
    for (kind, key) in bigm_keys(&prep.bigm) {
        let value = prep.bigm.map(kind)[&key];
        let mut halved = prep.bigm.clone();
        halved.set(kind, &key, value / 2.0);
        let r = run_oracle(net, prep, &halved, cfg)?;
        out.push(ControlOutcome {
            kind,
            key,
            value,
            detected: !r.passed(),
            violations: r.violations.len(),
        });
    }
    Ok(out)
}

/// Names of the build columns, in the order their bits are enumerated.
pub fn binary_names(model: &TepModel) -> Vec<String> {
    model
        .problem
        .binaries()
        .map(|v| model.problem.variable(v).name.clone())
        .collect()
}

