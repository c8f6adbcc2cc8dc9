use serde::{Deserialize, Serialize};

use crate::problem::MilpProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    GapReached,
    TimeLimit,
    NodeLimit,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub build_seconds: f64,
    pub solve_seconds: f64,
}

/// Result of an LP or MILP solve. Column values and row activities are
/// aligned with the problem they were computed for; both are empty when no
/// point is available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: Status,
    pub objective_upper: f64,
    pub objective_lower: f64,
    pub values: Vec<f64>,
    pub activities: Vec<f64>,
    pub timings: Timings,
    pub node_count: usize,
    pub simplex_iterations: usize,
    /// Dual objective of the final LP, when one was solved to optimality.
    pub dual_objective: Option<f64>,
}

impl Solution {
    /// Whether the solution carries a primal point.
    pub fn has_point(&self) -> bool {
        !self.values.is_empty()
    }

    pub(crate) fn without_point(status: Status, upper: f64, lower: f64) -> Self {
        Solution {
            status,
            objective_upper: upper,
            objective_lower: lower,
            values: Vec::new(),
            activities: Vec::new(),
            timings: Timings::default(),
            node_count: 0,
            simplex_iterations: 0,
            dual_objective: None,
        }
    }

    pub fn objective(&self) -> f64 {
        self.objective_upper
    }

    /// Relative gap `(upper - lower) / max(1, |upper|)`.
    pub fn gap(&self) -> f64 {
        relative_gap(self.objective_upper, self.objective_lower)
    }

    pub fn value(&self, problem: &MilpProblem, name: &str) -> Option<f64> {
        let id = problem.var(name)?;
        self.values.get(id.0).copied()
    }

    pub fn activity(&self, problem: &MilpProblem, name: &str) -> Option<f64> {
        let id = problem.row(name)?;
        self.activities.get(id.0).copied()
    }
}

pub fn relative_gap(upper: f64, lower: f64) -> f64 {
    if upper == lower {
        return 0.0;
    }
    if !upper.is_finite() || !lower.is_finite() {
        return f64::INFINITY;
    }
    ((upper - lower) / upper.abs().max(1.0)).max(0.0)
}
