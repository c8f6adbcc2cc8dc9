//! Best-first branch-and-bound over binary columns, and the exhaustive
//! enumeration oracle.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::MilpError;
use crate::problem::{MilpProblem, VarId};
use crate::simplex::{outcome_to_solution, LpData, LpOutcome};
use crate::solution::{relative_gap, Solution, Status, Timings};
use crate::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MilpConfig {
    /// Relative gap at which the search stops.
    pub mip_gap: f64,
    /// Wall-clock limit in seconds.
    pub time_limit: Option<f64>,
    pub node_limit: Option<usize>,
    pub tolerances: Tolerances,
}

impl Default for MilpConfig {
    fn default() -> Self {
        MilpConfig {
            mip_gap: 0.005,
            time_limit: None,
            node_limit: None,
            tolerances: Tolerances::default(),
        }
    }
}

impl MilpConfig {
    pub fn exact() -> Self {
        MilpConfig {
            mip_gap: 0.0,
            ..Default::default()
        }
    }
}

struct Node {
    bound: f64,
    seq: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    values: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // max-heap: the smallest bound, then the oldest node, pops first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Search<'a> {
    problem: &'a MilpProblem,
    data: LpData,
    binaries: Vec<VarId>,
    cfg: &'a MilpConfig,
    iterations: usize,
    lp_solves: usize,
}

impl Search<'_> {
    fn lp(&mut self, lower: &[f64], upper: &[f64]) -> Result<LpOutcome, MilpError> {
        let out = self.data.solve(lower, upper, &self.cfg.tolerances)?;
        self.iterations += out.iterations;
        self.lp_solves += 1;
        Ok(out)
    }

    /// Most fractional binary; ties go to the smallest name.
    fn branching_candidate(&self, values: &[f64]) -> Option<VarId> {
        let tol = self.cfg.tolerances.integrality;
        let mut best: Option<(VarId, f64)> = None;
        for &b in &self.binaries {
            let v = values[b.0];
            let frac = (v - v.round()).abs();
            if frac <= tol {
                continue;
            }
            let score = (v - 0.5).abs();
            let replace = match best {
                None => true,
                Some((cur, s)) => {
                    score < s - 1e-12
                        || (score <= s + 1e-12
                            && self.problem.variable(b).name < self.problem.variable(cur).name)
                }
            };
            if replace {
                best = Some((b, score));
            }
        }
        best.map(|(b, _)| b)
    }

    /// Re-solves with every binary fixed to its rounded value.
    fn polish(
        &mut self,
        values: &[f64],
        lower: &[f64],
        upper: &[f64],
    ) -> Result<Option<LpOutcome>, MilpError> {
        let mut lo = lower.to_vec();
        let mut hi = upper.to_vec();
        for &b in &self.binaries {
            let r = values[b.0].round().clamp(0.0, 1.0);
            lo[b.0] = r;
            hi[b.0] = r;
        }
        let out = self.lp(&lo, &hi)?;
        Ok((out.status == Status::Optimal).then_some(out))
    }
}

/// Branch-and-bound: best-first node selection, most-fractional branching.
pub fn solve_milp(problem: &MilpProblem, cfg: &MilpConfig) -> Result<Solution, MilpError> {
    let start = Instant::now();
    let mut search = Search {
        problem,
        data: LpData::from_problem(problem),
        binaries: problem.binaries().collect(),
        cfg,
        iterations: 0,
        lp_solves: 0,
    };
    let base_lo: Vec<f64> = problem.variables().iter().map(|v| v.lower).collect();
    let base_hi: Vec<f64> = problem.variables().iter().map(|v| v.upper).collect();

    let root = search.lp(&base_lo, &base_hi)?;
    match root.status {
        Status::Optimal => {}
        status => {
            let mut sol = Solution::without_point(status, root.objective, root.objective);
            sol.node_count = 1;
            sol.simplex_iterations = search.iterations;
            sol.timings.solve_seconds = start.elapsed().as_secs_f64();
            return Ok(sol);
        }
    }

    let mut incumbent: Option<LpOutcome> = None;
    let mut seq = 0usize;
    let mut heap = BinaryHeap::new();
    let mut nodes = 1usize;

    let consider = |out: LpOutcome,
                        lower: Vec<f64>,
                        upper: Vec<f64>,
                        search: &mut Search,
                        incumbent: &mut Option<LpOutcome>,
                        heap: &mut BinaryHeap<Node>,
                        seq: &mut usize|
     -> Result<(), MilpError> {
        if out.status != Status::Optimal {
            return Ok(());
        }
        let inc_val = incumbent.as_ref().map_or(f64::INFINITY, |i| i.objective);
        if out.objective >= inc_val {
            return Ok(());
        }
        if search.branching_candidate(&out.values).is_none() {
            if let Some(p) = search.polish(&out.values, &lower, &upper)? {
                if p.objective < inc_val {
                    *incumbent = Some(p);
                }
            }
            return Ok(());
        }
        *seq += 1;
        heap.push(Node {
            bound: out.objective,
            seq: *seq,
            lower,
            upper,
            values: out.values,
        });
        Ok(())
    };

    let root_values = root.values.clone();
    consider(
        root,
        base_lo.clone(),
        base_hi.clone(),
        &mut search,
        &mut incumbent,
        &mut heap,
        &mut seq,
    )?;

    // rounding-up heuristic at the root
    if incumbent.is_none() && !heap.is_empty() {
        let mut lo = base_lo.clone();
        let mut hi = base_hi.clone();
        for &b in &search.binaries {
            let v = root_values[b.0];
            let r = if (v - v.round()).abs() <= cfg.tolerances.integrality {
                v.round()
            } else {
                1.0
            };
            lo[b.0] = r;
            hi[b.0] = r;
        }
        let h = search.lp(&lo, &hi)?;
        if h.status == Status::Optimal {
            incumbent = Some(h);
        }
    }

    let mut status = Status::Optimal;
    let mut lower_bound;
    loop {
        let inc_val = incumbent.as_ref().map_or(f64::INFINITY, |i| i.objective);
        let Some(node) = heap.pop() else {
            lower_bound = inc_val;
            if incumbent.is_none() {
                status = Status::Infeasible;
            }
            break;
        };
        lower_bound = node.bound;
        if node.bound >= inc_val {
            lower_bound = inc_val;
            break;
        }
        if relative_gap(inc_val, node.bound) <= cfg.mip_gap {
            status = Status::GapReached;
            break;
        }
        if cfg
            .time_limit
            .is_some_and(|t| start.elapsed().as_secs_f64() >= t)
        {
            status = Status::TimeLimit;
            break;
        }
        if cfg.node_limit.is_some_and(|n| nodes >= n) {
            status = Status::NodeLimit;
            break;
        }
        let b = search
            .branching_candidate(&node.values)
            .expect("open nodes are fractional");
        for fix in [0.0, 1.0] {
            let mut lo = node.lower.clone();
            let mut hi = node.upper.clone();
            lo[b.0] = fix;
            hi[b.0] = fix;
            let out = search.lp(&lo, &hi)?;
            nodes += 1;
            consider(out, lo, hi, &mut search, &mut incumbent, &mut heap, &mut seq)?;
        }
    }

    let upper = incumbent.as_ref().map_or(f64::INFINITY, |i| i.objective);
    if status == Status::GapReached && relative_gap(upper, lower_bound) <= 1e-9 {
        status = Status::Optimal;
    }
    let lower_bound = lower_bound.min(upper);
    debug!(
        "branch-and-bound: {nodes} nodes, {} LPs, status {status:?}, bounds [{lower_bound}, {upper}]",
        search.lp_solves
    );
    let mut sol = match incumbent {
        Some(inc) => {
            let mut s = outcome_to_solution(inc, 0.0);
            s.status = status;
            s.objective_upper = upper;
            s.objective_lower = lower_bound;
            s
        }
        None => Solution::without_point(status, upper, lower_bound),
    };
    sol.node_count = nodes;
    sol.simplex_iterations = search.iterations;
    sol.timings = Timings {
        build_seconds: 0.0,
        solve_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(sol)
}

/// One enumerated binary assignment and the LP solved under it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Assignment {
    /// Values of the binaries in column order.
    pub bits: Vec<bool>,
    pub solution: Solution,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BruteforceResult {
    pub best: Solution,
    /// Index into `assignments` of the best feasible one.
    pub best_index: Option<usize>,
    pub assignments: Vec<Assignment>,
    pub binaries: Vec<VarId>,
}

/// Enumerates all `2^k` binary assignments (k ≤ `cap`) and solves each LP.
/// Bit `k` of the counter drives the `k`-th binary column.
pub fn bruteforce_milp(
    problem: &MilpProblem,
    cap: usize,
    tol: &Tolerances,
) -> Result<BruteforceResult, MilpError> {
    let start = Instant::now();
    let binaries: Vec<VarId> = problem.binaries().collect();
    if binaries.len() > cap {
        return Err(MilpError::TooManyBinaries {
            count: binaries.len(),
            cap,
        });
    }
    let data = LpData::from_problem(problem);
    let base_lo: Vec<f64> = problem.variables().iter().map(|v| v.lower).collect();
    let base_hi: Vec<f64> = problem.variables().iter().map(|v| v.upper).collect();
    let mut assignments: Vec<Assignment> = Vec::with_capacity(1 << binaries.len());
    let mut best_index: Option<usize> = None;
    let mut iterations = 0;
    for mask in 0u64..(1u64 << binaries.len()) {
        let bits: Vec<bool> = (0..binaries.len()).map(|k| mask >> k & 1 == 1).collect();
        let mut lo = base_lo.clone();
        let mut hi = base_hi.clone();
        for (&b, &on) in binaries.iter().zip(&bits) {
            let v = if on { 1.0 } else { 0.0 };
            lo[b.0] = v;
            hi[b.0] = v;
        }
        let out = data.solve(&lo, &hi, tol)?;
        iterations += out.iterations;
        let solution = outcome_to_solution(out, 0.0);
        if solution.status == Status::Optimal
            && best_index.is_none_or(|i: usize| {
                solution.objective_upper < assignments[i].solution.objective_upper
            })
        {
            best_index = Some(assignments.len());
        }
        assignments.push(Assignment { bits, solution });
    }
    let mut best = match best_index {
        Some(i) => assignments[i].solution.clone(),
        None => Solution::without_point(Status::Infeasible, f64::INFINITY, f64::INFINITY),
    };
    best.node_count = assignments.len();
    best.simplex_iterations = iterations;
    best.timings.solve_seconds = start.elapsed().as_secs_f64();
    Ok(BruteforceResult {
        best,
        best_index,
        assignments,
        binaries,
    })
}
