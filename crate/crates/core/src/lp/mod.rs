//! LP relaxation solver exposing the optimal basis.
//!
//! [`solve_lp`] relaxes integrality of a [`MilpInstance`] (optionally with cuts
//! appended as extra rows) and returns primal values, duals, reduced costs,
//! basis statuses and enough of the final basis to read tableau rows for
//! Gomory cuts.

mod simplex;

use serde::{Deserialize, Serialize};

use crate::milp::{MilpInstance, Row, RowSense};
use crate::separators::Cut;
use crate::{Error, Result};
use simplex::{Engine, Outcome, VarPos};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisStatus {
    Lower,
    Basic,
    Upper,
    Zero,
}

/// Final basis kept for tableau access. Working columns are the structural
/// variables followed by one slack per row.
#[derive(Debug, Clone)]
struct BasisData {
    n: usize,
    m: usize,
    head: Vec<usize>,
    binv: Vec<f64>,
    cols: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpBasisSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub obj: f64,
    /// One multiplier per row (original rows first, then extra rows).
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub basis_status: Vec<BasisStatus>,
    /// Status of each row's slack variable.
    pub row_status: Vec<BasisStatus>,
    pub row_activity: Vec<f64>,
    pub slack: Vec<f64>,
    pub iterations: usize,
    basis: Option<BasisData>,
}

impl LpBasisSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn num_rows(&self) -> usize {
        self.duals.len()
    }

    /// Index of the working column of row `i`'s slack.
    pub fn slack_index(&self, i: usize) -> usize {
        self.x.len() + i
    }

    pub fn is_basic(&self, working_var: usize) -> bool {
        self.basis
            .as_ref()
            .is_some_and(|b| b.head.contains(&working_var))
    }

    /// Basic working variables in basis order.
    pub fn basic_vars(&self) -> Vec<usize> {
        self.basis
            .as_ref()
            .map(|b| b.head.iter().copied().filter(|&j| j < b.n + b.m).collect())
            .unwrap_or_default()
    }

    /// Whether every integer variable takes an integral value within `tol`.
    pub fn is_integral(&self, inst: &MilpInstance, tol: f64) -> bool {
        (0..inst.num_vars())
            .all(|j| !inst.is_integer(j) || (self.x[j] - self.x[j].round()).abs() <= tol)
    }
}

/// One row of `B⁻¹ [A | I | b]`: `x_basic + Σ coefs[k] · w_k = rhs` over working
/// columns `w` (structural then slack).
#[derive(Debug, Clone, PartialEq)]
pub struct TableauRow {
    pub basic_var: usize,
    pub coefs: Vec<f64>,
    pub rhs: f64,
}

/// Relaxation of an instance plus appended rows, solvable under varying bounds.
#[derive(Debug, Clone)]
pub struct LpModel {
    n: usize,
    obj: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    cols: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    senses: Vec<RowSense>,
}

impl LpModel {
    pub fn new(inst: &MilpInstance, extra_rows: &[Cut]) -> Result<Self> {
        inst.check_shape()?;
        let n = inst.num_vars();
        let mut rows: Vec<Row> = inst.rows.clone();
        for (k, cut) in extra_rows.iter().enumerate() {
            if cut.max_index().is_some_and(|j| j >= n) {
                return Err(Error::Dimension(format!(
                    "extra row {k} references a variable beyond {n}"
                )));
            }
            rows.push(cut.as_row());
        }
        Ok(Self::from_parts(n, &inst.obj, &inst.lb, &inst.ub, &rows))
    }

    pub fn from_parts(n: usize, obj: &[f64], lb: &[f64], ub: &[f64], rows: &[Row]) -> Self {
        let mut cols = vec![Vec::new(); n];
        for (i, r) in rows.iter().enumerate() {
            for &(j, a) in &r.coefs {
                cols[j].push((i, a));
            }
        }
        LpModel {
            n,
            obj: obj.to_vec(),
            lb: lb.to_vec(),
            ub: ub.to_vec(),
            cols,
            rhs: rows.iter().map(|r| r.rhs).collect(),
            senses: rows.iter().map(|r| r.sense).collect(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.lb
    }

    pub fn upper_bounds(&self) -> &[f64] {
        &self.ub
    }

    pub fn solve(&self) -> LpBasisSolution {
        self.solve_with(&self.obj, &self.lb, &self.ub)
    }

    pub fn solve_with_bounds(&self, lb: &[f64], ub: &[f64]) -> LpBasisSolution {
        self.solve_with(&self.obj, lb, ub)
    }

    pub fn solve_with(&self, obj: &[f64], lb: &[f64], ub: &[f64]) -> LpBasisSolution {
        let n = self.n;
        let m = self.rhs.len();
        if (0..n).any(|j| lb[j] > ub[j]) {
            return self.failed(LpStatus::Infeasible, 0);
        }
        let mut cols = self.cols.clone();
        let mut lo = lb.to_vec();
        let mut hi = ub.to_vec();
        for i in 0..m {
            cols.push(vec![(i, 1.0)]);
            lo.push(0.0);
            hi.push(match self.senses[i] {
                RowSense::Le => f64::INFINITY,
                RowSense::Eq => 0.0,
            });
        }
        let mut engine = Engine::new(n, cols, lo, hi, self.rhs.clone());
        let max_iter = 20_000 + 200 * (n + m);
        let status = match engine.solve(obj, max_iter) {
            Outcome::Optimal => LpStatus::Optimal,
            Outcome::Infeasible => return self.failed(LpStatus::Infeasible, engine.iterations),
            Outcome::Unbounded => LpStatus::Unbounded,
            Outcome::IterationLimit => LpStatus::IterationLimit,
        };
        let mut x = engine.x[..n].to_vec();
        for j in 0..n {
            // snap values within roundoff of a bound onto the bound
            if lb[j].is_finite() && (x[j] - lb[j]).abs() < 1e-12 {
                x[j] = lb[j];
            }
            if ub[j].is_finite() && (x[j] - ub[j]).abs() < 1e-12 {
                x[j] = ub[j];
            }
        }
        let obj_val = obj.iter().zip(&x).map(|(c, v)| c * v).sum();
        let status_of = |j: usize| match engine.pos[j] {
            VarPos::Basic(_) => BasisStatus::Basic,
            VarPos::AtLower => BasisStatus::Lower,
            VarPos::AtUpper => BasisStatus::Upper,
            VarPos::Free => BasisStatus::Zero,
        };
        let reduced_costs = (0..n)
            .map(|j| {
                if matches!(engine.pos[j], VarPos::Basic(_)) {
                    0.0
                } else {
                    engine.reduced_cost(j)
                }
            })
            .collect();
        let mut row_activity = vec![0.0; m];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, a) in col {
                row_activity[i] += a * x[j];
            }
        }
        let slack = (0..m).map(|i| self.rhs[i] - row_activity[i]).collect();
        LpBasisSolution {
            status,
            obj: obj_val,
            duals: engine.duals.clone(),
            reduced_costs,
            basis_status: (0..n).map(status_of).collect(),
            row_status: (0..m).map(|i| status_of(n + i)).collect(),
            row_activity,
            slack,
            iterations: engine.iterations,
            basis: Some(BasisData {
                n,
                m,
                head: engine.head.clone(),
                binv: engine.binv.clone(),
                cols: engine.cols[..n + m].to_vec(),
                rhs: self.rhs.clone(),
            }),
            x,
        }
    }

    fn failed(&self, status: LpStatus, iterations: usize) -> LpBasisSolution {
        let n = self.n;
        let m = self.rhs.len();
        LpBasisSolution {
            status,
            x: vec![0.0; n],
            obj: f64::NAN,
            duals: vec![0.0; m],
            reduced_costs: vec![0.0; n],
            basis_status: vec![BasisStatus::Lower; n],
            row_status: vec![BasisStatus::Basic; m],
            row_activity: vec![0.0; m],
            slack: vec![0.0; m],
            iterations,
            basis: None,
        }
    }
}

/// Solves the LP relaxation of `inst` with `extra_rows` appended.
pub fn solve_lp(inst: &MilpInstance, extra_rows: &[Cut]) -> Result<LpBasisSolution> {
    Ok(LpModel::new(inst, extra_rows)?.solve())
}

/// Tableau row of the basic working variable `basic_var`.
pub fn tableau_row(sol: &LpBasisSolution, basic_var: usize) -> Result<TableauRow> {
    let b = sol
        .basis
        .as_ref()
        .ok_or_else(|| Error::NoBasis(format!("{:?}", sol.status)))?;
    if basic_var >= b.n + b.m {
        return Err(Error::Dimension(format!(
            "working variable {basic_var} out of range {}",
            b.n + b.m
        )));
    }
    let p = b
        .head
        .iter()
        .position(|&j| j == basic_var)
        .ok_or(Error::NotBasic(basic_var))?;
    let m = b.m;
    let brow = &b.binv[p * m..(p + 1) * m];
    let coefs = b
        .cols
        .iter()
        .map(|col| col.iter().map(|&(i, a)| brow[i] * a).sum())
        .collect();
    let rhs = brow.iter().zip(&b.rhs).map(|(a, r)| a * r).sum();
    Ok(TableauRow {
        basic_var,
        coefs,
        rhs,
    })
}
