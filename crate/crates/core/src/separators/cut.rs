use serde::{Deserialize, Serialize};

use crate::milp::Row;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutSource {
    Gmi,
    Cgmip,
}

/// A valid inequality `alpha · x <= alpha0`.
///
/// For CG-MIP cuts `alpha` and `alpha0` are integral and `u` holds the
/// aggregation weights over canonical rows that produced them; `v` holds the
/// weights on upper-bound rows `x_j <= ub_j` when those were offered. GMI cuts
/// carry real coefficients and empty weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub alpha: Vec<(usize, f64)>,
    pub alpha0: f64,
    pub u: Vec<(usize, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub v: Vec<(usize, f64)>,
    pub violation: f64,
    pub source: CutSource,
    pub tight: bool,
    pub round: usize,
}

impl Cut {
    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.alpha.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// `alpha · x - alpha0`; positive when `x` is cut off.
    pub fn violation_at(&self, x: &[f64]) -> f64 {
        self.lhs(x) - self.alpha0
    }

    pub fn support_size(&self) -> usize {
        self.alpha.len()
    }

    pub fn as_row(&self) -> Row {
        Row::le(self.alpha.clone(), self.alpha0)
    }

    pub fn max_index(&self) -> Option<usize> {
        self.alpha.iter().map(|&(j, _)| j).max()
    }

    /// Dense aggregation vector over `m` rows.
    pub fn dense_u(&self, m: usize) -> Vec<f64> {
        let mut u = vec![0.0; m];
        for &(i, w) in &self.u {
            if i < m {
                u[i] = w;
            }
        }
        u
    }
}
