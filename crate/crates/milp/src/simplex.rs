//! Dense revised primal simplex for bounded variables.
//!
//! Every row `lo_r <= a_r x <= hi_r` gets a logical column `s_r = a_r x`, so
//! the working system is `[A  -I] (x, s) = 0` with bounds on all `n + m`
//! variables. The initial basis is the logicals (`B = -I`). Phase one
//! minimises the sum of bound violations of the basic variables; phase two
//! minimises the true costs from the resulting feasible basis. The basis
//! inverse is stored explicitly, updated by a product-form pivot per
//! iteration and refactorised periodically.

use std::time::Instant;

use log::{debug, trace};

use crate::error::MilpError;
use crate::problem::{MilpProblem, Sense};
use crate::solution::{Solution, Status, Timings};
use crate::Tolerances;

const NONBASIC: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free column resting at zero.
    Zero,
}

/// Column-major copy of a problem's constraint matrix with row bounds.
#[derive(Debug, Clone)]
pub struct LpData {
    n: usize,
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    row_lo: Vec<f64>,
    row_hi: Vec<f64>,
}

impl LpData {
    pub fn from_problem(problem: &MilpProblem) -> Self {
        let n = problem.num_vars();
        let m = problem.num_rows();
        let mut cols = vec![Vec::new(); n];
        let mut row_lo = Vec::with_capacity(m);
        let mut row_hi = Vec::with_capacity(m);
        for (r, row) in problem.constraints().iter().enumerate() {
            for &(v, a) in &row.terms {
                cols[v.0].push((r, a));
            }
            let (lo, hi) = match row.sense {
                Sense::Le => (f64::NEG_INFINITY, row.rhs),
                Sense::Ge => (row.rhs, f64::INFINITY),
                Sense::Eq => (row.rhs, row.rhs),
            };
            row_lo.push(lo);
            row_hi.push(hi);
        }
        let cost = problem.variables().iter().map(|v| v.cost).collect();
        LpData {
            n,
            m,
            cols,
            cost,
            row_lo,
            row_hi,
        }
    }

    /// Solves the LP with the given column bounds (binaries are treated as
    /// continuous within whatever bounds are passed).
    pub fn solve(
        &self,
        col_lo: &[f64],
        col_hi: &[f64],
        tol: &Tolerances,
    ) -> Result<LpOutcome, MilpError> {
        assert_eq!(col_lo.len(), self.n);
        assert_eq!(col_hi.len(), self.n);
        if col_lo.iter().zip(col_hi).any(|(l, u)| l > u) {
            return Ok(LpOutcome::infeasible(0));
        }
        let mut lo = col_lo.to_vec();
        lo.extend_from_slice(&self.row_lo);
        let mut up = col_hi.to_vec();
        up.extend_from_slice(&self.row_hi);
        let mut engine = Engine::new(self, lo, up, *tol);
        engine.run()
    }
}

/// Raw LP result in column order.
#[derive(Debug, Clone)]
pub struct LpOutcome {
    pub status: Status,
    pub objective: f64,
    pub values: Vec<f64>,
    pub activities: Vec<f64>,
    pub dual_objective: Option<f64>,
    pub iterations: usize,
}

impl LpOutcome {
    fn infeasible(iterations: usize) -> Self {
        LpOutcome {
            status: Status::Infeasible,
            objective: f64::INFINITY,
            values: Vec::new(),
            activities: Vec::new(),
            dual_objective: None,
            iterations,
        }
    }
}

struct Engine<'a> {
    lp: &'a LpData,
    m: usize,
    lo: Vec<f64>,
    up: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    pos: Vec<usize>,
    binv: Vec<f64>,
    tol: Tolerances,
    iterations: usize,
    since_refactor: usize,
    bland: bool,
    condition: f64,
}

enum Step {
    Optimal,
    Unbounded,
    Moved,
}

impl<'a> Engine<'a> {
    fn new(lp: &'a LpData, lo: Vec<f64>, up: Vec<f64>, tol: Tolerances) -> Self {
        let n = lp.n;
        let m = lp.m;
        let mut x = vec![0.0; n + m];
        let mut state = vec![State::Basic; n + m];
        for j in 0..n {
            let (l, u) = (lo[j], up[j]);
            let (v, s) = if l.is_finite() {
                (l, State::Lower)
            } else if u.is_finite() {
                (u, State::Upper)
            } else {
                (0.0, State::Zero)
            };
            x[j] = v;
            state[j] = s;
        }
        let basis: Vec<usize> = (n..n + m).collect();
        let mut pos = vec![NONBASIC; n + m];
        for (i, &j) in basis.iter().enumerate() {
            pos[j] = i;
        }
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = -1.0;
        }
        let mut engine = Engine {
            lp,
            m,
            lo,
            up,
            x,
            state,
            basis,
            pos,
            binv,
            tol,
            iterations: 0,
            since_refactor: 0,
            bland: false,
            condition: 1.0,
        };
        engine.recompute_basic_values();
        engine
    }

    fn cost(&self, j: usize) -> f64 {
        if j < self.lp.n {
            self.lp.cost[j]
        } else {
            0.0
        }
    }

    fn for_each_entry(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.lp.n {
            for &(r, a) in &self.lp.cols[j] {
                f(r, a);
            }
        } else {
            f(j - self.lp.n, -1.0);
        }
    }

    /// `B^{-1} M_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        self.for_each_entry(j, |r, a| {
            for (i, slot) in alpha.iter_mut().enumerate() {
                *slot += a * self.binv[i * m + r];
            }
        });
        alpha
    }

    /// `c_B^T B^{-1}`.
    fn btran(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (i, &c) in cb.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let row = &self.binv[i * m..(i + 1) * m];
            for (yr, &b) in y.iter_mut().zip(row) {
                *yr += c * b;
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, cost: f64, y: &[f64]) -> f64 {
        let mut d = cost;
        self.for_each_entry(j, |r, a| d -= a * y[r]);
        d
    }

    fn recompute_basic_values(&mut self) {
        let m = self.m;
        let mut rhs = vec![0.0; m];
        for j in 0..self.x.len() {
            if self.state[j] == State::Basic {
                continue;
            }
            let xj = self.x[j];
            if xj != 0.0 {
                self.for_each_entry(j, |r, a| rhs[r] -= a * xj);
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let v: f64 = row.iter().zip(&rhs).map(|(b, r)| b * r).sum();
            self.x[self.basis[i]] = v;
        }
    }

    fn refactor(&mut self) -> Result<(), MilpError> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (i, &j) in self.basis.iter().enumerate() {
            self.for_each_entry(j, |r, v| a[r * m + i] = v);
        }
        let norm_b = matrix_norm1(&a, m);
        let inv = invert(a, m).ok_or(MilpError::NumericalFailure {
            condition: f64::INFINITY,
        })?;
        self.condition = norm_b * matrix_norm1(&inv, m);
        self.binv = inv;
        self.since_refactor = 0;
        self.recompute_basic_values();
        Ok(())
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        (self.lo[j] - v).max(v - self.up[j]).max(0.0)
    }

    fn total_infeasibility(&self) -> f64 {
        self.basis.iter().map(|&j| self.infeasibility(j)).sum()
    }

    fn primal_feasible(&self) -> bool {
        self.basis
            .iter()
            .all(|&j| self.infeasibility(j) <= self.tol.feasibility)
    }

    fn run(&mut self) -> Result<LpOutcome, MilpError> {
        let n_total = self.x.len();
        let limit = 50 * (n_total + self.m) + 1000;
        let mut phase_one = !self.primal_feasible();
        let mut best = f64::INFINITY;
        let mut stalled = 0usize;

        loop {
            if self.iterations > limit {
                return Err(MilpError::NumericalFailure {
                    condition: self.condition,
                });
            }
            if self.since_refactor >= self.tol.refactor_interval {
                self.refactor()?;
                phase_one = !self.primal_feasible();
            }
            let step = self.iterate(phase_one)?;
            match step {
                Step::Moved => {
                    self.iterations += 1;
                    let measure = if phase_one {
                        self.total_infeasibility()
                    } else {
                        self.objective()
                    };
                    if measure < best - 1e-12 * (1.0 + best.abs().min(1e300)) {
                        best = measure;
                        stalled = 0;
                    } else {
                        stalled += 1;
                        if stalled > self.tol.stall_iterations && !self.bland {
                            debug!("simplex stalled at iteration {}, switching to Bland's rule", self.iterations);
                            self.bland = true;
                        }
                    }
                    if phase_one && self.primal_feasible() {
                        phase_one = false;
                        best = f64::INFINITY;
                        stalled = 0;
                    }
                }
                Step::Unbounded => {
                    if phase_one {
                        return Err(MilpError::NumericalFailure {
                            condition: self.condition,
                        });
                    }
                    return Ok(LpOutcome {
                        status: Status::Unbounded,
                        objective: f64::NEG_INFINITY,
                        values: Vec::new(),
                        activities: Vec::new(),
                        dual_objective: None,
                        iterations: self.iterations,
                    });
                }
                Step::Optimal => {
                    // confirm on a fresh factorisation before declaring the result
                    if self.since_refactor > 0 {
                        self.refactor()?;
                        let feasible = self.primal_feasible();
                        if phase_one == feasible {
                            phase_one = !feasible;
                            continue;
                        }
                        if self.iterate_check(phase_one) {
                            continue;
                        }
                    }
                    if phase_one {
                        trace!(
                            "infeasible: residual infeasibility {:.3e}",
                            self.total_infeasibility()
                        );
                        return Ok(LpOutcome::infeasible(self.iterations));
                    }
                    return self.finish();
                }
            }
        }
    }

    /// Whether an improving column exists at the current basis.
    fn iterate_check(&self, phase_one: bool) -> bool {
        let cb = self.basic_costs(phase_one);
        let y = self.btran(&cb);
        self.price(phase_one, &y).is_some()
    }

    fn basic_costs(&self, phase_one: bool) -> Vec<f64> {
        self.basis
            .iter()
            .map(|&j| {
                if phase_one {
                    let v = self.x[j];
                    if v < self.lo[j] - self.tol.feasibility {
                        -1.0
                    } else if v > self.up[j] + self.tol.feasibility {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    self.cost(j)
                }
            })
            .collect()
    }

    /// Chooses the entering column and its direction of movement.
    fn price(&self, phase_one: bool, y: &[f64]) -> Option<(usize, f64)> {
        let opt = self.tol.optimality;
        let mut chosen: Option<(usize, f64, f64)> = None;
        for j in 0..self.x.len() {
            let st = self.state[j];
            if st == State::Basic || self.lo[j] == self.up[j] {
                continue;
            }
            let c = if phase_one { 0.0 } else { self.cost(j) };
            let d = self.reduced_cost(j, c, y);
            let dir = match st {
                State::Lower if d < -opt => 1.0,
                State::Upper if d > opt => -1.0,
                State::Zero if d.abs() > opt => -d.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            let score = d.abs();
            if chosen.is_none_or(|(_, _, s)| score > s) {
                chosen = Some((j, dir, score));
            }
        }
        chosen.map(|(j, dir, _)| (j, dir))
    }

    fn iterate(&mut self, phase_one: bool) -> Result<Step, MilpError> {
        let cb = self.basic_costs(phase_one);
        let y = self.btran(&cb);
        let Some((q, dir)) = self.price(phase_one, &y) else {
            return Ok(Step::Optimal);
        };
        let alpha = self.ftran(q);
        let ftol = self.tol.feasibility;
        let ptol = self.tol.pivot;

        let mut t_best = self.up[q] - self.lo[q];
        let mut leave: Option<(usize, f64)> = None;
        let mut best_pivot = 0.0f64;
        for (i, &a) in alpha.iter().enumerate() {
            if a.abs() < ptol {
                continue;
            }
            let j = self.basis[i];
            let rate = -dir * a;
            let v = self.x[j];
            let (l, u) = (self.lo[j], self.up[j]);
            let target = if phase_one && v < l - ftol {
                if rate > 0.0 {
                    l
                } else {
                    continue;
                }
            } else if phase_one && v > u + ftol {
                if rate < 0.0 {
                    u
                } else {
                    continue;
                }
            } else if rate > 0.0 {
                if u.is_finite() {
                    u
                } else {
                    continue;
                }
            } else if l.is_finite() {
                l
            } else {
                continue;
            };
            let t = ((target - v) / rate).max(0.0);
            // a tie with the entering column's own range keeps the bound flip
            let better = match leave {
                None => t < t_best,
                Some((bi, _)) => {
                    if t < t_best - 1e-12 {
                        true
                    } else if t <= t_best + 1e-12 {
                        if self.bland {
                            j < self.basis[bi]
                        } else {
                            a.abs() > best_pivot
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                t_best = t;
                leave = Some((i, target));
                best_pivot = a.abs();
            }
        }

        if !t_best.is_finite() {
            return Ok(Step::Unbounded);
        }

        // move
        let step = dir * t_best;
        if step != 0.0 {
            self.x[q] += step;
            for (i, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    let j = self.basis[i];
                    self.x[j] -= step * a;
                }
            }
        }

        match leave {
            None => {
                // bound flip of the entering column
                if dir > 0.0 {
                    self.x[q] = self.up[q];
                    self.state[q] = State::Upper;
                } else {
                    self.x[q] = self.lo[q];
                    self.state[q] = State::Lower;
                }
            }
            Some((r, target)) => {
                let out = self.basis[r];
                self.x[out] = target;
                self.state[out] = if target == self.lo[out] {
                    State::Lower
                } else {
                    State::Upper
                };
                self.pos[out] = NONBASIC;
                self.basis[r] = q;
                self.pos[q] = r;
                self.state[q] = State::Basic;
                self.pivot(r, &alpha);
            }
        }
        Ok(Step::Moved)
    }

    fn pivot(&mut self, r: usize, alpha: &[f64]) {
        let m = self.m;
        let piv = alpha[r];
        let (head, rest) = self.binv.split_at_mut(r * m);
        let (row_r, tail) = rest.split_at_mut(m);
        for v in row_r.iter_mut() {
            *v /= piv;
        }
        for (i, &a) in alpha.iter().enumerate() {
            if i == r || a == 0.0 {
                continue;
            }
            let row = if i < r {
                &mut head[i * m..(i + 1) * m]
            } else {
                let k = i - r - 1;
                &mut tail[k * m..(k + 1) * m]
            };
            for (v, &p) in row.iter_mut().zip(row_r.iter()) {
                *v -= a * p;
            }
        }
        self.since_refactor += 1;
    }

    fn objective(&self) -> f64 {
        (0..self.lp.n).map(|j| self.lp.cost[j] * self.x[j]).sum()
    }

    fn finish(&mut self) -> Result<LpOutcome, MilpError> {
        let n = self.lp.n;
        let cb = self.basic_costs(false);
        let y = self.btran(&cb);
        let mut dual = 0.0;
        for j in 0..self.x.len() {
            let d = if self.state[j] == State::Basic {
                0.0
            } else {
                self.reduced_cost(j, self.cost(j), &y)
            };
            let contribution = if d.abs() <= self.tol.optimality {
                d * self.x[j]
            } else if d > 0.0 {
                d * self.lo[j]
            } else {
                d * self.up[j]
            };
            dual += contribution;
        }
        let primal = self.objective();
        if !dual.is_finite() || (primal - dual).abs() > self.tol.duality * primal.abs().max(1.0) {
            return Err(MilpError::NumericalFailure {
                condition: self.condition,
            });
        }
        let mut values = self.x[..n].to_vec();
        // snap columns that drifted within tolerance of a bound
        for (j, v) in values.iter_mut().enumerate() {
            if *v < self.lo[j] {
                *v = self.lo[j];
            } else if *v > self.up[j] {
                *v = self.up[j];
            }
        }
        let mut activities = vec![0.0; self.m];
        for (j, col) in self.lp.cols.iter().enumerate() {
            for &(r, a) in col {
                activities[r] += a * values[j];
            }
        }
        Ok(LpOutcome {
            status: Status::Optimal,
            objective: primal,
            values,
            activities,
            dual_objective: Some(dual),
            iterations: self.iterations,
        })
    }
}

fn matrix_norm1(a: &[f64], m: usize) -> f64 {
    (0..m)
        .map(|c| (0..m).map(|r| a[r * m + c].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Gauss-Jordan inversion with partial pivoting; `None` when singular.
fn invert(mut a: Vec<f64>, m: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    for c in 0..m {
        let p = (c..m).max_by(|&i, &k| a[i * m + c].abs().total_cmp(&a[k * m + c].abs()))?;
        let pv = a[p * m + c];
        if pv.abs() < 1e-11 {
            return None;
        }
        if p != c {
            for k in 0..m {
                a.swap(p * m + k, c * m + k);
                inv.swap(p * m + k, c * m + k);
            }
        }
        for k in 0..m {
            a[c * m + k] /= pv;
            inv[c * m + k] /= pv;
        }
        for r in 0..m {
            if r == c {
                continue;
            }
            let f = a[r * m + c];
            if f == 0.0 {
                continue;
            }
            for k in 0..m {
                a[r * m + k] -= f * a[c * m + k];
                inv[r * m + k] -= f * inv[c * m + k];
            }
        }
    }
    Some(inv)
}

/// Solves the LP relaxation of `problem` (binaries relaxed to `[0, 1]`).
pub fn solve_lp(problem: &MilpProblem, tol: &Tolerances) -> Result<Solution, MilpError> {
    let lo: Vec<f64> = problem.variables().iter().map(|v| v.lower).collect();
    let hi: Vec<f64> = problem.variables().iter().map(|v| v.upper).collect();
    solve_lp_with_bounds(problem, &lo, &hi, tol)
}

/// Solves the LP with explicit column bounds, e.g. with binaries fixed.
pub fn solve_lp_with_bounds(
    problem: &MilpProblem,
    lower: &[f64],
    upper: &[f64],
    tol: &Tolerances,
) -> Result<Solution, MilpError> {
    let start = Instant::now();
    let data = LpData::from_problem(problem);
    let out = data.solve(lower, upper, tol)?;
    Ok(outcome_to_solution(out, start.elapsed().as_secs_f64()))
}

pub(crate) fn outcome_to_solution(out: LpOutcome, seconds: f64) -> Solution {
    let (upper, lower) = match out.status {
        Status::Optimal => (out.objective, out.objective),
        Status::Unbounded => (f64::NEG_INFINITY, f64::NEG_INFINITY),
        _ => (f64::INFINITY, f64::INFINITY),
    };
    Solution {
        status: out.status,
        objective_upper: upper,
        objective_lower: lower,
        values: out.values,
        activities: out.activities,
        timings: Timings {
            build_seconds: 0.0,
            solve_seconds: seconds,
        },
        node_count: 0,
        simplex_iterations: out.iterations,
        dual_objective: out.dual_objective,
    }
}
