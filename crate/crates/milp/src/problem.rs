//! Solver-agnostic mixed-integer linear problems with name-addressable rows and columns.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::MilpError;

/// Index of a column in a [`MilpProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub usize);

/// Index of a row in a [`MilpProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RowId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    /// Row activity `a·x` at the given column values.
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Distance to the violating side; negative when violated. Equality rows
    /// report minus the absolute residual.
    pub fn slack(&self, values: &[f64]) -> f64 {
        let act = self.activity(values);
        match self.sense {
            Sense::Le => self.rhs - act,
            Sense::Ge => act - self.rhs,
            Sense::Eq => -(act - self.rhs).abs(),
        }
    }
}

/// Row/column/nonzero counts of a problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ProblemStats {
    pub rows: usize,
    pub columns: usize,
    pub binaries: usize,
    pub nonzeros: usize,
}

/// Range of absolute nonzero coefficients over all rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRange {
    pub min_abs: f64,
    pub max_abs: f64,
}

impl CoefficientRange {
    pub fn ratio(&self) -> f64 {
        self.max_abs / self.min_abs
    }
}

/// A minimisation problem. Names are unique across columns and across rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MilpProblem {
    pub tag: String,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    #[serde(skip)]
    var_index: HashMap<String, VarId>,
    #[serde(skip)]
    row_index: HashMap<String, RowId>,
}

impl MilpProblem {
    pub fn new(tag: impl Into<String>) -> Self {
        MilpProblem {
            tag: tag.into(),
            ..Default::default()
        }
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
        cost: f64,
    ) -> Result<VarId, MilpError> {
        let name = name.into();
        if self.var_index.contains_key(&name) {
            return Err(MilpError::DuplicateName(name));
        }
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            VarKind::Continuous => (lower, upper),
        };
        if lower > upper || lower.is_nan() || upper.is_nan() {
            return Err(MilpError::InvalidBounds { name, lower, upper });
        }
        let id = VarId(self.variables.len());
        self.var_index.insert(name.clone(), id);
        self.variables.push(Variable {
            name,
            kind,
            lower,
            upper,
            cost,
        });
        Ok(id)
    }

    pub fn continuous(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        cost: f64,
    ) -> Result<VarId, MilpError> {
        self.add_var(name, VarKind::Continuous, lower, upper, cost)
    }

    pub fn binary(&mut self, name: impl Into<String>, cost: f64) -> Result<VarId, MilpError> {
        self.add_var(name, VarKind::Binary, 0.0, 1.0, cost)
    }

    /// Adds a row. Repeated columns are merged and exact zeros dropped.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> Result<RowId, MilpError> {
        let name = name.into();
        if self.row_index.contains_key(&name) {
            return Err(MilpError::DuplicateName(name));
        }
        let mut merged: Vec<(VarId, f64)> = Vec::new();
        for (v, a) in terms {
            if v.0 >= self.variables.len() {
                return Err(MilpError::UnknownVariable(format!("#{} in row {name}", v.0)));
            }
            match merged.iter_mut().find(|(w, _)| *w == v) {
                Some(entry) => entry.1 += a,
                None => merged.push((v, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        merged.sort_by_key(|&(v, _)| v);
        let id = RowId(self.constraints.len());
        self.row_index.insert(name.clone(), id);
        self.constraints.push(Constraint {
            name,
            terms: merged,
            sense,
            rhs,
        });
        Ok(id)
    }

    /// Sorts columns and rows by name so that files written from the problem
    /// are byte-stable regardless of construction order.
    pub fn canonicalize(&mut self) {
        let mut order: Vec<usize> = (0..self.variables.len()).collect();
        order.sort_by(|&a, &b| self.variables[a].name.cmp(&self.variables[b].name));
        let mut remap = vec![0usize; order.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let mut vars: Vec<Option<Variable>> = self.variables.drain(..).map(Some).collect();
        self.variables = order.iter().map(|&old| vars[old].take().unwrap()).collect();
        for row in &mut self.constraints {
            for t in &mut row.terms {
                t.0 = VarId(remap[t.0 .0]);
            }
            row.terms.sort_by_key(|&(v, _)| v);
        }
        self.constraints.sort_by(|a, b| a.name.cmp(&b.name));
        self.rebuild_index();
    }

    fn rebuild_index(&mut self) {
        self.var_index = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.clone(), VarId(i)))
            .collect();
        self.row_index = self
            .constraints
            .iter()
            .enumerate()
            .map(|(i, r)| (r.name.clone(), RowId(i)))
            .collect();
    }

    /// Restores the name lookup tables after deserialization.
    pub fn reindex(&mut self) {
        self.rebuild_index();
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied()
    }

    pub fn row(&self, name: &str) -> Option<RowId> {
        self.row_index.get(name).copied()
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn constraint(&self, id: RowId) -> &Constraint {
        &self.constraints[id.0]
    }

    pub fn variable_mut(&mut self, id: VarId) -> &mut Variable {
        &mut self.variables[id.0]
    }

    pub fn constraint_mut(&mut self, id: RowId) -> &mut Constraint {
        &mut self.constraints[id.0]
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_rows(&self) -> usize {
        self.constraints.len()
    }

    pub fn binaries(&self) -> impl Iterator<Item = VarId> + '_ {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Binary)
            .map(|(i, _)| VarId(i))
    }

    pub fn stats(&self) -> ProblemStats {
        ProblemStats {
            rows: self.constraints.len(),
            columns: self.variables.len(),
            binaries: self.binaries().count(),
            nonzeros: self.constraints.iter().map(|r| r.terms.len()).sum(),
        }
    }

    pub fn coefficient_range(&self) -> Option<CoefficientRange> {
        let mut iter = self
            .constraints
            .iter()
            .flat_map(|r| r.terms.iter().map(|&(_, a)| a.abs()));
        let first = iter.next()?;
        let (min_abs, max_abs) = iter.fold((first, first), |(lo, hi), a| (lo.min(a), hi.max(a)));
        Some(CoefficientRange { min_abs, max_abs })
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.variables
            .iter()
            .zip(values)
            .map(|(v, x)| v.cost * x)
            .sum()
    }

    /// Largest bound or row violation at the given point.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let bounds = self
            .variables
            .iter()
            .zip(values)
            .map(|(v, &x)| (v.lower - x).max(x - v.upper).max(0.0));
        let rows = self.constraints.iter().map(|r| (-r.slack(values)).max(0.0));
        bounds.chain(rows).fold(0.0, f64::max)
    }
}
