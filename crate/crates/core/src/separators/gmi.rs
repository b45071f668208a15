//! Gomory mixed-integer cuts read from optimal tableau rows.

use super::{Cut, CutSource};
use crate::lp::{tableau_row, BasisStatus, LpBasisSolution};
use crate::milp::{MilpInstance, RowSense, VarKind};
use crate::{Error, Result};

const FRAC_TOL: f64 = 1e-6;
const COEF_TOL: f64 = 1e-11;
const MIN_VIOLATION: f64 = 1e-6;

fn frac(v: f64) -> f64 {
    v - v.floor()
}

/// A slack is an integer variable when its row only touches integer columns
/// with integer coefficients and has an integer right-hand side.
fn integer_slacks(inst: &MilpInstance) -> Vec<bool> {
    let is_int = |v: f64| (v - v.round()).abs() <= 1e-9;
    inst.rows
        .iter()
        .map(|r| {
            is_int(r.rhs)
                && r.coefs
                    .iter()
                    .all(|&(j, a)| inst.kinds[j] == VarKind::Integer && is_int(a))
        })
        .collect()
}

/// One GMI cut per fractional basic integer variable of `sol`, which must be
/// the optimal relaxation of `inst` without extra rows.
pub fn gmi_cuts(inst: &MilpInstance, sol: &LpBasisSolution) -> Result<Vec<Cut>> {
    if !sol.is_optimal() {
        return Err(Error::NoBasis(format!("{:?}", sol.status)));
    }
    let n = inst.num_vars();
    let m = inst.num_cons();
    if sol.x.len() != n || sol.num_rows() != m {
        return Err(Error::Dimension(format!(
            "solution has {} vars / {} rows, instance {n} / {m}",
            sol.x.len(),
            sol.num_rows()
        )));
    }
    let int_slack = integer_slacks(inst);
    let mut cuts = Vec::new();
    for k in 0..n {
        if !inst.is_integer(k) || sol.basis_status[k] != BasisStatus::Basic {
            continue;
        }
        let f0 = frac(sol.x[k]);
        if f0 <= FRAC_TOL || f0 >= 1.0 - FRAC_TOL {
            continue;
        }
        let row = tableau_row(sol, k)?;
        if let Some(cut) = cut_from_row(inst, sol, &row.coefs, f0, &int_slack) {
            cuts.push(cut);
        }
    }
    Ok(cuts)
}

fn cut_from_row(
    inst: &MilpInstance,
    sol: &LpBasisSolution,
    coefs: &[f64],
    f0: f64,
    int_slack: &[bool],
) -> Option<Cut> {
    let n = inst.num_vars();
    // cut in x-space as  sum dense[j] x_j >= rhs
    let mut dense = vec![0.0; n];
    let mut rhs = 1.0;
    for (w, &a) in coefs.iter().enumerate() {
        if a.abs() <= COEF_TOL {
            continue;
        }
        let (status, integer) = if w < n {
            (sol.basis_status[w], inst.is_integer(w))
        } else {
            let i = w - n;
            if inst.rows[i].sense == RowSense::Eq {
                continue;
            }
            (sol.row_status[i], int_slack[i])
        };
        let a = match status {
            BasisStatus::Basic => continue,
            BasisStatus::Lower => a,
            BasisStatus::Upper => -a,
            BasisStatus::Zero => return None,
        };
        let pi = if integer {
            let fj = frac(a);
            if fj <= f0 {
                fj / f0
            } else {
                (1.0 - fj) / (1.0 - f0)
            }
        } else if a > 0.0 {
            a / f0
        } else {
            -a / (1.0 - f0)
        };
        if pi == 0.0 {
            continue;
        }
        if w < n {
            if status == BasisStatus::Upper {
                // w = ub - x
                rhs -= pi * inst.ub[w];
                dense[w] -= pi;
            } else {
                dense[w] += pi;
            }
        } else {
            // w = b_i - a_i x
            let r = &inst.rows[w - n];
            rhs -= pi * r.rhs;
            for &(j, aij) in &r.coefs {
                dense[j] -= pi * aij;
            }
        }
    }
    // flip to <= form
    let mut alpha0 = -rhs;
    let mut alpha = Vec::new();
    let scale = dense.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for (j, &d) in dense.iter().enumerate() {
        let a = -d;
        if a.abs() <= COEF_TOL * scale {
            // dropping a tiny positive term only weakens the cut; a tiny negative
            // one needs its worst case moved to the right-hand side
            if a < 0.0 {
                if !inst.ub[j].is_finite() {
                    alpha.push((j, a));
                    continue;
                }
                alpha0 += -a * inst.ub[j];
            }
            continue;
        }
        alpha.push((j, a));
    }
    let mut cut = Cut {
        alpha,
        alpha0,
        u: Vec::new(),
        v: Vec::new(),
        violation: 0.0,
        source: CutSource::Gmi,
        tight: false,
        round: 0,
    };
    cut.violation = cut.violation_at(&sol.x);
    (cut.violation > MIN_VIOLATION).then_some(cut)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::solve_lp;
    use crate::milp::{enumerate_integer_points, check_cut_valid, Family, Row};

    #[test]
    fn integral_lp_gives_no_cuts() {
        let inst = MilpInstance {
            name: "int".into(),
            family: Family::Other,
            obj: vec![-1.0, -1.0],
            kinds: vec![VarKind::Integer; 2],
            lb: vec![0.0; 2],
            ub: vec![1.0; 2],
            rows: vec![Row::le(vec![(0, 1.0), (1, 1.0)], 1.0)],
        };
        let sol = solve_lp(&inst, &[]).unwrap();
        assert!(gmi_cuts(&inst, &sol).unwrap().is_empty());
    }

    #[test]
    fn single_row_cut_is_valid_and_separates() {
        // x1 + 0.5 x2 <= 1.25, x1 in [0,2] integer, x2 binary; maximize x1
        let inst = MilpInstance {
            name: "g".into(),
            family: Family::Other,
            obj: vec![-1.0, 0.0],
            kinds: vec![VarKind::Integer; 2],
            lb: vec![0.0; 2],
            ub: vec![2.0, 1.0],
            rows: vec![Row::le(vec![(0, 1.0), (1, 0.5)], 1.25)],
        };
        let sol = solve_lp(&inst, &[]).unwrap();
        assert!((sol.x[0] - 1.25).abs() < 1e-9);
        let cuts = gmi_cuts(&inst, &sol).unwrap();
        assert_eq!(cuts.len(), 1);
        let hull = enumerate_integer_points(&inst, 64).unwrap();
        assert!(check_cut_valid(&inst, &cuts[0], &hull).unwrap());
        assert!(cuts[0].violation > 1e-6);
    }

    #[test]
    fn two_row_cuts_are_valid() {
        let inst = MilpInstance {
            name: "t".into(),
            family: Family::Other,
            obj: vec![-1.0, -1.0],
            kinds: vec![VarKind::Integer; 2],
            lb: vec![0.0; 2],
            ub: vec![1.0; 2],
            rows: vec![
                Row::le(vec![(0, 2.0), (1, 1.0)], 2.0),
                Row::le(vec![(0, 1.0), (1, 2.0)], 2.0),
            ],
        };
        let sol = solve_lp(&inst, &[]).unwrap();
        let cuts = gmi_cuts(&inst, &sol).unwrap();
        assert_eq!(cuts.len(), 2);
        let hull = enumerate_integer_points(&inst, 64).unwrap();
        for c in &cuts {
            assert!(check_cut_valid(&inst, c, &hull).unwrap());
            assert!(c.violation_at(&sol.x) > 1e-6);
        }
    }
}
