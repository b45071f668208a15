//! Brute-force integer-hull oracles for desk-sized instances.

use super::{MilpInstance, RowSense, VarKind, FEAS_TOL};
use crate::lp::LpModel;
use crate::separators::Cut;
use crate::{Error, Result};

/// Exhaustive list of integer-feasible points in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegerHullSample {
    pub points: Vec<Vec<i64>>,
    /// `None` when no integer point exists.
    pub z_ip: Option<f64>,
}

/// Integer assignments of a mixed instance whose continuous slice is nonempty.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedHullSample {
    pub int_vars: Vec<usize>,
    pub slices: Vec<Vec<i64>>,
    /// Best objective over all slices.
    pub z_ip: Option<f64>,
}

fn ranges(inst: &MilpInstance, vars: &[usize], cap: u64) -> Result<Vec<(i64, i64)>> {
    let mut size = 1.0f64;
    let mut out = Vec::with_capacity(vars.len());
    for &j in vars {
        let (lo, hi) = (inst.lb[j], inst.ub[j]);
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::OracleUnsupported(format!(
                "variable {j} has an infinite bound"
            )));
        }
        let (lo, hi) = (lo.ceil() as i64, hi.floor() as i64);
        size *= (hi - lo + 1).max(0) as f64;
        out.push((lo, hi));
    }
    if size > cap as f64 {
        return Err(Error::OracleTooLarge { size, cap });
    }
    Ok(out)
}

/// Odometer over the box, last variable fastest.
fn for_each_point(ranges: &[(i64, i64)], mut f: impl FnMut(&[i64])) {
    if ranges.iter().any(|&(lo, hi)| hi < lo) {
        return;
    }
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    loop {
        f(&cur);
        let mut k = cur.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if cur[k] < ranges[k].1 {
                cur[k] += 1;
                for (c, r) in cur[k + 1..].iter_mut().zip(&ranges[k + 1..]) {
                    *c = r.0;
                }
                break;
            }
        }
    }
}

pub fn enumerate_integer_points(inst: &MilpInstance, cap: u64) -> Result<IntegerHullSample> {
    if let Some(j) = inst.kinds.iter().position(|&k| k == VarKind::Continuous) {
        return Err(Error::OracleUnsupported(format!(
            "variable {j} is continuous"
        )));
    }
    let vars: Vec<usize> = (0..inst.num_vars()).collect();
    let ranges = ranges(inst, &vars, cap)?;
    let mut points = Vec::new();
    let mut z_ip: Option<f64> = None;
    let mut xf = vec![0.0; vars.len()];
    for_each_point(&ranges, |p| {
        for (x, &v) in xf.iter_mut().zip(p) {
            *x = v as f64;
        }
        let ok = inst.rows.iter().all(|r| {
            let act = r.activity(&xf);
            match r.sense {
                RowSense::Le => act <= r.rhs + 1e-9,
                RowSense::Eq => (act - r.rhs).abs() <= 1e-9,
            }
        });
        if ok {
            let z = inst.objective(&xf);
            z_ip = Some(z_ip.map_or(z, |b| b.min(z)));
            points.push(p.to_vec());
        }
    });
    Ok(IntegerHullSample { points, z_ip })
}

fn slice_model(inst: &MilpInstance, int_vars: &[usize], point: &[i64]) -> (Vec<f64>, Vec<f64>) {
    let mut lb = inst.lb.clone();
    let mut ub = inst.ub.clone();
    for (&j, &v) in int_vars.iter().zip(point) {
        lb[j] = v as f64;
        ub[j] = v as f64;
    }
    (lb, ub)
}

/// Enumerates integer assignments and keeps those whose continuous slice is feasible.
pub fn enumerate_mixed_slices(inst: &MilpInstance, cap: u64) -> Result<MixedHullSample> {
    let int_vars: Vec<usize> = (0..inst.num_vars()).filter(|&j| inst.is_integer(j)).collect();
    let ranges = ranges(inst, &int_vars, cap)?;
    let lp = LpModel::new(inst, &[])?;
    let mut slices = Vec::new();
    let mut z_ip: Option<f64> = None;
    for_each_point(&ranges, |p| {
        let (lb, ub) = slice_model(inst, &int_vars, p);
        let sol = lp.solve_with_bounds(&lb, &ub);
        if sol.is_optimal() {
            z_ip = Some(z_ip.map_or(sol.obj, |b| b.min(sol.obj)));
            slices.push(p.to_vec());
        }
    });
    Ok(MixedHullSample {
        int_vars,
        slices,
        z_ip,
    })
}

fn check_dims(inst: &MilpInstance, cut: &Cut) -> Result<()> {
    if cut.max_index().is_some_and(|j| j >= inst.num_vars()) {
        return Err(Error::Dimension(format!(
            "cut references variable {:?} but instance has {}",
            cut.max_index(),
            inst.num_vars()
        )));
    }
    Ok(())
}

/// True iff no hull point violates the cut by more than [`FEAS_TOL`].
pub fn check_cut_valid(inst: &MilpInstance, cut: &Cut, hull: &IntegerHullSample) -> Result<bool> {
    check_dims(inst, cut)?;
    for p in &hull.points {
        if p.len() != inst.num_vars() {
            return Err(Error::Dimension("hull point length".into()));
        }
        let lhs: f64 = cut.alpha.iter().map(|&(j, a)| a * p[j] as f64).sum();
        if lhs > cut.alpha0 + FEAS_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Mixed-integer validity: for each feasible integer assignment, the maximum of
/// the cut's left-hand side over the continuous slice stays within tolerance.
pub fn check_cut_valid_mixed(inst: &MilpInstance, cut: &Cut, hull: &MixedHullSample) -> Result<bool> {
    check_dims(inst, cut)?;
    let lp = LpModel::new(inst, &[])?;
    let mut neg_alpha = vec![0.0; inst.num_vars()];
    for &(j, a) in &cut.alpha {
        neg_alpha[j] = -a;
    }
    for p in &hull.slices {
        let (lb, ub) = slice_model(inst, &hull.int_vars, p);
        let sol = lp.solve_with(&neg_alpha, &lb, &ub);
        match sol.status {
            crate::lp::LpStatus::Optimal => {
                if -sol.obj > cut.alpha0 + FEAS_TOL {
                    return Ok(false);
                }
            }
            crate::lp::LpStatus::Unbounded => return Ok(false),
            _ => {}
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{Family, Row};
    use crate::separators::CutSource;

    fn binaries(obj: Vec<f64>, rows: Vec<Row>) -> MilpInstance {
        let n = obj.len();
        MilpInstance {
            name: "o".into(),
            family: Family::Other,
            obj,
            kinds: vec![VarKind::Integer; n],
            lb: vec![0.0; n],
            ub: vec![1.0; n],
            rows,
        }
    }

    fn two_row() -> MilpInstance {
        binaries(
            vec![-1.0, -1.0],
            vec![
                Row::le(vec![(0, 2.0), (1, 1.0)], 2.0),
                Row::le(vec![(0, 1.0), (1, 2.0)], 2.0),
            ],
        )
    }

    fn cut(alpha: Vec<(usize, f64)>, alpha0: f64) -> Cut {
        Cut {
            alpha,
            alpha0,
            u: vec![],
            v: Vec::new(),
            violation: 0.0,
            source: CutSource::Cgmip,
            tight: false,
            round: 0,
        }
    }

    #[test]
    fn single_binary_half_row() {
        let inst = binaries(vec![-1.0], vec![Row::le(vec![(0, 2.0)], 1.0)]);
        let hull = enumerate_integer_points(&inst, 16).unwrap();
        assert_eq!(hull.points, vec![vec![0]]);
        assert_eq!(hull.z_ip, Some(0.0));
    }

    #[test]
    fn two_row_hull() {
        let hull = enumerate_integer_points(&two_row(), 16).unwrap();
        assert_eq!(hull.points, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert_eq!(hull.z_ip, Some(-1.0));
    }

    #[test]
    fn cap_is_enforced() {
        let inst = binaries(vec![0.0; 30], vec![]);
        assert!(matches!(
            enumerate_integer_points(&inst, 1 << 20),
            Err(Error::OracleTooLarge { .. })
        ));
    }

    #[test]
    fn continuous_is_unsupported() {
        let mut inst = two_row();
        inst.kinds[1] = VarKind::Continuous;
        assert!(matches!(
            enumerate_integer_points(&inst, 16),
            Err(Error::OracleUnsupported(_))
        ));
    }

    #[test]
    fn validity_checks() {
        let inst = two_row();
        let hull = enumerate_integer_points(&inst, 16).unwrap();
        assert!(check_cut_valid(&inst, &cut(vec![(0, 1.0), (1, 1.0)], 1.0), &hull).unwrap());
        assert!(!check_cut_valid(&inst, &cut(vec![(0, 1.0), (1, 1.0)], 0.0), &hull).unwrap());
        assert!(check_cut_valid(&inst, &cut(vec![], 0.0), &hull).unwrap());
        assert!(matches!(
            check_cut_valid(&inst, &cut(vec![(5, 1.0)], 0.0), &hull),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn mixed_slices_and_validity() {
        // y binary, x continuous in [0,1]; x <= y; min -x + 0.5 y
        let inst = MilpInstance {
            name: "mix".into(),
            family: Family::Fl,
            obj: vec![-1.0, 0.5],
            kinds: vec![VarKind::Continuous, VarKind::Integer],
            lb: vec![0.0; 2],
            ub: vec![1.0, 1.0],
            rows: vec![Row::le(vec![(0, 1.0), (1, -1.0)], 0.0)],
        };
        let hull = enumerate_mixed_slices(&inst, 16).unwrap();
        assert_eq!(hull.slices, vec![vec![0], vec![1]]);
        assert!((hull.z_ip.unwrap() + 0.5).abs() < 1e-9);
        assert!(check_cut_valid_mixed(&inst, &cut(vec![(0, 1.0)], 1.0), &hull).unwrap());
        assert!(!check_cut_valid_mixed(&inst, &cut(vec![(0, 1.0)], 0.5), &hull).unwrap());
    }
}
