//! Desk-scale mixed-integer linear programming.
//!
//! A [`MilpProblem`] is built by name, solved exactly by [`solve_lp`] /
//! [`solve_milp`], checked against exhaustive enumeration with
//! [`bruteforce_milp`], and written to CPLEX LP or fixed MPS files for
//! external solvers.

pub mod bnb;
pub mod error;
pub mod lpfile;
pub mod mps;
pub mod problem;
pub mod simplex;
pub mod solution;

pub use bnb::{bruteforce_milp, solve_milp, Assignment, BruteforceResult, MilpConfig};
pub use error::MilpError;
pub use problem::{
    CoefficientRange, Constraint, MilpProblem, ProblemStats, RowId, Sense, VarId, VarKind,
    Variable,
};
pub use simplex::{solve_lp, solve_lp_with_bounds};
pub use solution::{relative_gap, Solution, Status, Timings};

/// Every numerical tolerance used by the solver.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    /// Allowed bound or row violation of a basic solution.
    pub feasibility: f64,
    /// Reduced-cost threshold for optimality.
    pub optimality: f64,
    /// Smallest pivot element accepted in the ratio test.
    pub pivot: f64,
    /// Distance from 0/1 under which a binary counts as integral.
    pub integrality: f64,
    /// Relative primal/dual objective mismatch accepted at simplex exit.
    pub duality: f64,
    /// Non-improving iterations before switching to Bland's rule.
    pub stall_iterations: usize,
    /// Pivots between refactorisations of the basis inverse.
    pub refactor_interval: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feasibility: 1e-7,
            optimality: 1e-7,
            pivot: 1e-9,
            integrality: 1e-6,
            duality: 1e-6,
            stall_iterations: 50,
            refactor_interval: 64,
        }
    }
}
