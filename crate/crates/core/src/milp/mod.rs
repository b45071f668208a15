//! MILP representation in the canonical `min { c'x : Ax <= b, 0 <= x <= ub }` form.
//!
//! Generator output goes through [`normalize`] which flips `>=` rows, splits
//! equalities and turns maximization into minimization. Auxiliary models built
//! internally (the CG-MIP) reuse [`MilpInstance`] but may carry equality rows and
//! free variables; [`MilpInstance::is_canonical`] tells the two apart.

mod io;
mod normalize;
pub mod oracle;

pub use io::{read_instance, write_instance, InstanceDoc};
pub use normalize::{normalize, Normalized, RawInstance, RawRow, RawSense, RawVar, Sense};
pub use oracle::{
    check_cut_valid, check_cut_valid_mixed, enumerate_integer_points, enumerate_mixed_slices,
    IntegerHullSample, MixedHullSample,
};

use serde::{Deserialize, Serialize};

/// Absolute tolerance for relations that are exact in exact arithmetic.
pub const FEAS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Integer,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Bp,
    Pm,
    Sc,
    Ss,
    Fl,
    Other,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Bp, Family::Pm, Family::Sc, Family::Ss, Family::Fl];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Bp => "bp",
            Family::Pm => "pm",
            Family::Sc => "sc",
            Family::Ss => "ss",
            Family::Fl => "fl",
            Family::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        match s.to_ascii_lowercase().as_str() {
            "bp" => Some(Family::Bp),
            "pm" => Some(Family::Pm),
            "sc" => Some(Family::Sc),
            "ss" => Some(Family::Ss),
            "fl" => Some(Family::Fl),
            "other" => Some(Family::Other),
            _ => None,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Row sense. Canonical instances only hold `Le`; `Eq` appears in auxiliary models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    Le,
    Eq,
}

/// Sparse row `coefs · x (sense) rhs`, coefficients sorted by column with no explicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coefs: Vec<(usize, f64)>,
    pub rhs: f64,
    pub sense: RowSense,
}

impl Row {
    pub fn le(coefs: Vec<(usize, f64)>, rhs: f64) -> Self {
        Row::new(coefs, rhs, RowSense::Le)
    }

    pub fn eq(coefs: Vec<(usize, f64)>, rhs: f64) -> Self {
        Row::new(coefs, rhs, RowSense::Eq)
    }

    /// Sorts by column, merges duplicates and drops zeros.
    pub fn new(mut coefs: Vec<(usize, f64)>, rhs: f64, sense: RowSense) -> Self {
        coefs.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coefs.len());
        for (j, v) in coefs {
            match merged.last_mut() {
                Some((lj, lv)) if *lj == j => *lv += v,
                _ => merged.push((j, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        Row {
            coefs: merged,
            rhs,
            sense,
        }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coefs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    pub fn norm(&self) -> f64 {
        self.coefs.iter().map(|&(_, a)| a * a).sum::<f64>().sqrt()
    }

    pub fn negated(&self) -> Row {
        Row {
            coefs: self.coefs.iter().map(|&(j, a)| (j, -a)).collect(),
            rhs: -self.rhs,
            sense: self.sense,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpInstance {
    pub name: String,
    pub family: Family,
    /// Minimization objective.
    pub obj: Vec<f64>,
    pub kinds: Vec<VarKind>,
    pub lb: Vec<f64>,
    /// `f64::INFINITY` encodes a missing upper bound.
    pub ub: Vec<f64>,
    pub rows: Vec<Row>,
}

impl MilpInstance {
    pub fn num_vars(&self) -> usize {
        self.obj.len()
    }

    pub fn num_cons(&self) -> usize {
        self.rows.len()
    }

    pub fn is_integer(&self, j: usize) -> bool {
        self.kinds[j] == VarKind::Integer
    }

    pub fn has_continuous(&self) -> bool {
        self.kinds.iter().any(|&k| k == VarKind::Continuous)
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.obj.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// All rows `<=`, all lower bounds zero, indices in range, no stored zeros.
    pub fn is_canonical(&self) -> bool {
        self.check_shape().is_ok()
            && self.lb.iter().all(|&l| l == 0.0)
            && self.rows.iter().all(|r| r.sense == RowSense::Le)
    }

    pub fn check_shape(&self) -> crate::Result<()> {
        let n = self.num_vars();
        if self.kinds.len() != n || self.lb.len() != n || self.ub.len() != n {
            return Err(crate::Error::Dimension(format!(
                "{}: obj has {n} entries but kinds/lb/ub have {}/{}/{}",
                self.name,
                self.kinds.len(),
                self.lb.len(),
                self.ub.len()
            )));
        }
        for (i, row) in self.rows.iter().enumerate() {
            let mut last = None;
            for &(j, a) in &row.coefs {
                if j >= n || a == 0.0 || last.is_some_and(|l| l >= j) {
                    return Err(crate::Error::Dimension(format!(
                        "{}: row {i} has an invalid entry ({j}, {a})",
                        self.name
                    )));
                }
                last = Some(j);
            }
        }
        Ok(())
    }

    /// Whether `x` satisfies rows, bounds and integrality within `tol`.
    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        for j in 0..x.len() {
            if x[j] < self.lb[j] - tol || x[j] > self.ub[j] + tol {
                return false;
            }
            if self.is_integer(j) && (x[j] - x[j].round()).abs() > tol {
                return false;
            }
        }
        self.rows.iter().all(|r| {
            let act = r.activity(x);
            match r.sense {
                RowSense::Le => act <= r.rhs + tol,
                RowSense::Eq => (act - r.rhs).abs() <= tol,
            }
        })
    }

    /// Column-major copy of the row matrix: for each variable, `(row, coef)` pairs.
    pub fn columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.num_vars()];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, a) in &row.coefs {
                cols[j].push((i, a));
            }
        }
        cols
    }
}
