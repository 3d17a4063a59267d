//! Linear programming substrate.
//!
//! The master problem talks to the solver only through [`LpModel`] and
//! [`LpSolution`]. Duals follow the usual minimisation convention: the
//! reduced cost of column `j` is `c_j - sum_i pi_i a_ij`, duals of `>=` rows
//! are non-negative, duals of `<=` rows non-positive, duals of `=` rows free.

mod export;
mod factor;
mod simplex;

pub use export::write_lp;
pub use simplex::{Basis, Simplex, VarStatus};

use serde::{Deserialize, Serialize};

pub const INF: f64 = f64::INFINITY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub relation: Relation,
    pub rhs: f64,
    pub name: Option<String>,
}

impl Row {
    pub fn new(relation: Relation, rhs: f64) -> Self {
        Row {
            relation,
            rhs,
            name: None,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub cost: f64,
    pub lo: f64,
    pub hi: f64,
    /// `(row, coefficient)` pairs, rows ascending.
    pub entries: Vec<(u32, f64)>,
    pub name: Option<String>,
}

impl Column {
    pub fn new(cost: f64, lo: f64, hi: f64, mut entries: Vec<(u32, f64)>) -> Self {
        entries.sort_by_key(|e| e.0);
        Column {
            cost,
            lo,
            hi,
            entries,
            name: None,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }
}

/// A row to append, with its coefficients given per column.
#[derive(Debug, Clone, PartialEq)]
pub struct NewRow {
    pub row: Row,
    pub entries: Vec<(u32, f64)>,
}

/// Minimisation LP in column form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpModel {
    pub rows: Vec<Row>,
    pub cols: Vec<Column>,
}

impl LpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_row(&mut self, row: Row) -> usize {
        self.rows.push(row);
        self.rows.len() - 1
    }

    pub fn add_column(&mut self, col: Column) -> usize {
        debug_assert!(col.entries.iter().all(|&(r, _)| (r as usize) < self.rows.len()));
        self.cols.push(col);
        self.cols.len() - 1
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    /// Checks dimensions and bounds.
    pub fn is_consistent(&self) -> bool {
        self.cols.iter().all(|c| {
            c.lo <= c.hi && !c.lo.is_nan() && c.entries.iter().all(|&(r, v)| (r as usize) < self.rows.len() && v.is_finite())
        })
    }

    /// Row activities `A x`.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        let mut act = vec![0.0; self.rows.len()];
        for (c, &xv) in self.cols.iter().zip(x) {
            if xv != 0.0 {
                for &(r, v) in &c.entries {
                    act[r as usize] += v * xv;
                }
            }
        }
        act
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    /// Column values.
    pub x: Vec<f64>,
    /// Row duals. When infeasible, these are the phase-one duals: a column
    /// with `sum_i pi_i a_ij > 0` would reduce the infeasibility.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// `c_j - pi . a_j` for one column of `model`.
    pub fn reduced_cost(&self, model: &LpModel, j: usize) -> f64 {
        let c = &model.cols[j];
        c.cost - c.entries.iter().map(|&(r, v)| self.duals[r as usize] * v).sum::<f64>()
    }

    /// Dual objective including the bound terms of the columns.
    pub fn dual_objective(&self, model: &LpModel) -> f64 {
        let mut obj: f64 = model
            .rows
            .iter()
            .zip(&self.duals)
            .map(|(r, &p)| r.rhs * p)
            .sum();
        for j in 0..model.cols.len() {
            let d = self.reduced_cost(model, j);
            let c = &model.cols[j];
            let term = if d > 0.0 {
                d * c.lo
            } else if d < 0.0 {
                d * c.hi
            } else {
                0.0
            };
            if term.is_finite() {
                obj += term;
            }
        }
        obj
    }
}

/// One-shot solve with an optional warm-start basis.
pub fn solve(model: &LpModel, warm_hint: Option<&Basis>) -> LpSolution {
    let mut s = Simplex::new(model.clone());
    if let Some(b) = warm_hint {
        s.set_basis(b);
    }
    s.solve()
}

#[cfg(test)]
mod tests;
