//! Small deterministic linear-programming solver.
//!
//! Problems are stated as `minimize c·v` subject to sparse equality rows,
//! sparse `≤` rows and per-variable bounds. [`solve`] runs a two-phase
//! bounded-variable primal simplex on a dense tableau.

mod simplex;

use std::fmt;

use crate::{Error, Result};

pub use simplex::solve;

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-9;
/// Reduced-cost optimality tolerance.
pub const OPT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl fmt::Display for LpStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        })
    }
}

/// A sparse linear row `Σ coeffs[i].1 · v[coeffs[i].0]` against `rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl Row {
    fn activity(&self, v: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * v[j]).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    bounds: Vec<(f64, f64)>,
    equalities: Vec<Row>,
    inequalities: Vec<Row>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable with cost `cost` and bounds `[lo, hi]`; returns its index.
    pub fn add_var(&mut self, cost: f64, lo: f64, hi: f64) -> usize {
        self.objective.push(cost);
        self.bounds.push((lo, hi));
        self.objective.len() - 1
    }

    pub fn add_eq(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        self.equalities.push(Row { coeffs, rhs });
    }

    /// `Σ a·v ≤ rhs`
    pub fn add_le(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        self.inequalities.push(Row { coeffs, rhs });
    }

    /// `Σ a·v ≥ rhs`, stored as its negated `≤` form.
    pub fn add_ge(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        let coeffs = coeffs.into_iter().map(|(j, a)| (j, -a)).collect();
        self.inequalities.push(Row { coeffs, rhs: -rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn equalities(&self) -> &[Row] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[Row] {
        &self.inequalities
    }

    pub fn objective_value(&self, v: &[f64]) -> f64 {
        self.objective.iter().zip(v).map(|(c, x)| c * x).sum()
    }

    /// Largest violation of any constraint or bound at `v`.
    pub fn max_violation(&self, v: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (x, &(lo, hi)) in v.iter().zip(&self.bounds) {
            worst = worst.max(lo - x).max(x - hi);
        }
        for row in &self.equalities {
            worst = worst.max((row.activity(v) - row.rhs).abs());
        }
        for row in &self.inequalities {
            worst = worst.max(row.activity(v) - row.rhs);
        }
        worst
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan()
                || hi.is_nan()
                || lo > hi
                || lo == f64::INFINITY
                || hi == f64::NEG_INFINITY
            {
                return Err(Error::MalformedLp(format!(
                    "variable {j} has bounds [{lo}, {hi}]"
                )));
            }
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(Error::MalformedLp(format!(
                "cost of variable {j} is not finite"
            )));
        }
        for row in self.equalities.iter().chain(&self.inequalities) {
            if !row.rhs.is_finite() {
                return Err(Error::MalformedLp("non-finite right-hand side".into()));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(Error::MalformedLp(format!(
                        "row references variable {j} but only {n} exist"
                    )));
                }
                if !a.is_finite() {
                    return Err(Error::MalformedLp("non-finite coefficient".into()));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Optimal objective; `NaN` unless `status` is optimal.
    pub value: f64,
    /// Variable values; empty unless `status` is optimal.
    pub assignment: Vec<f64>,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Converts infeasible/unbounded outcomes into errors.
    pub fn into_optimal(self) -> Result<LpSolution> {
        match self.status {
            LpStatus::Optimal => Ok(self),
            other => Err(Error::LpStatus(other)),
        }
    }
}
