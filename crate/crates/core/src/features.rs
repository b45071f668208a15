//! Variable-constraint graph with engineered node features.
//!
//! Constraint columns (53): nine row scalars, a five-way type one-hot, degree,
//! zero-rhs flag, then for each of the variable subsets {all, x > 0, x = 0,
//! x at upper bound} the mean/median/std/min/max of the row-normalized
//! coefficients and the max/min/mean/std of coefficient-to-rhs ratios, and a
//! trailing constant column. Variable columns (18) follow the order of
//! [`var_feature_names`].

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cutloop::LabelVector;
use crate::lp::{BasisStatus, LpBasisSolution};
use crate::milp::{MilpInstance, VarKind};
use crate::{Error, Result};

pub const SHARD_SCHEMA: &str = "cgscreen.vcg/1";
pub const CONS_WIDTH: usize = 53;
pub const VAR_WIDTH: usize = 18;
const STD_FLOOR: f64 = 1e-8;
const SOL_TOL: f64 = 1e-9;
const TIGHT_TOL: f64 = 1e-6;

const SUBSETS: [&str; 4] = ["all", "nonzero", "zero", "at_ub"];

pub fn cons_feature_names() -> Vec<String> {
    let mut names: Vec<String> = [
        "obj_cos_sim",
        "bias",
        "is_tight",
        "dualsol_val",
        "row_at_lbs",
        "row_at_ubs",
        "norm_slack",
        "norm_violation",
        "euclidean_distance",
        "type_logicor",
        "type_setppc",
        "type_varbound",
        "type_knapsack",
        "type_linear",
        "constraint_degree",
        "zero_rhs",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for s in SUBSETS {
        for stat in ["mean", "median", "std", "min", "max"] {
            names.push(format!("a_{s}_{stat}"));
        }
        for stat in ["max", "min", "mean", "std"] {
            names.push(format!("a_ratio_{s}_{stat}"));
        }
    }
    names.push("constant".into());
    names
}

pub fn var_feature_names() -> Vec<String> {
    [
        "type_binary",
        "type_integer",
        "type_implint",
        "type_continuous",
        "coef",
        "has_lb",
        "has_ub",
        "lb",
        "ub",
        "sol_is_at_lb",
        "sol_is_at_ub",
        "sol_frac",
        "basis_lower",
        "basis_basic",
        "basis_upper",
        "basis_zero",
        "reduced_cost",
        "sol_val",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// Hash of the shard schema and feature layout; any change to either changes it.
pub fn feature_hash() -> String {
    let mut h = Sha256::new();
    h.update(SHARD_SCHEMA.as_bytes());
    for name in cons_feature_names().iter().chain(&var_feature_names()) {
        h.update(b"|");
        h.update(name.as_bytes());
    }
    hex::encode(h.finalize())
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub row: usize,
    pub col: usize,
    pub coef: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VcgSample {
    pub instance_id: String,
    pub round: usize,
    pub cons_feats: Matrix,
    pub var_feats: Matrix,
    pub edges: Vec<Edge>,
    pub labels: Option<LabelVector>,
}

impl VcgSample {
    pub fn num_cons(&self) -> usize {
        self.cons_feats.rows
    }

    pub fn num_vars(&self) -> usize {
        self.var_feats.rows
    }

    pub fn label_f64(&self) -> Option<Vec<f64>> {
        self.labels
            .as_ref()
            .map(|l| l.y.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
    }
}

/// LP quantities the features read, restricted to the canonical rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSnapshot {
    pub x: Vec<f64>,
    pub duals: Vec<f64>,
    pub slack: Vec<f64>,
    pub basis_status: Vec<BasisStatus>,
    pub reduced_costs: Vec<f64>,
}

impl LpSnapshot {
    pub fn from_solution(sol: &LpBasisSolution, m: usize) -> Result<Self> {
        if sol.num_rows() < m {
            return Err(Error::Feature(format!(
                "solution has {} rows, instance {m}",
                sol.num_rows()
            )));
        }
        Ok(LpSnapshot {
            x: sol.x.clone(),
            duals: sol.duals[..m].to_vec(),
            slack: sol.slack[..m].to_vec(),
            basis_status: sol.basis_status.clone(),
            reduced_costs: sol.reduced_costs.clone(),
        })
    }
}

fn norm(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|a| a * a).sum::<f64>().sqrt()
}

fn safe_div(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// mean, median, std, min, max; zeros for an empty set.
fn five_stats(v: &mut [f64]) -> [f64; 5] {
    if v.is_empty() {
        return [0.0; 5];
    }
    v.sort_by(f64::total_cmp);
    let k = v.len();
    let mean = v.iter().sum::<f64>() / k as f64;
    let median = if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    };
    let std = (v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / k as f64).sqrt();
    [mean, median, std, v[0], v[k - 1]]
}

/// max, min, mean, std; zeros for an empty set.
fn four_stats(v: &mut [f64]) -> [f64; 4] {
    let [mean, _, std, min, max] = five_stats(v);
    [max, min, mean, std]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowType {
    Logicor,
    Setppc,
    Varbound,
    Knapsack,
    Linear,
}

fn row_type(inst: &MilpInstance, coefs: &[(usize, f64)], rhs: f64) -> RowType {
    let binary = |j: usize| inst.is_integer(j) && inst.lb[j] == 0.0 && inst.ub[j] == 1.0;
    let all_bin = coefs.iter().all(|&(j, _)| binary(j));
    let is_int = |v: f64| v == v.round();
    if all_bin && !coefs.is_empty() && coefs.iter().all(|&(_, a)| a == -1.0) && rhs == -1.0 {
        RowType::Logicor
    } else if all_bin
        && !coefs.is_empty()
        && ((coefs.iter().all(|&(_, a)| a == 1.0) && rhs == 1.0)
            || (coefs.iter().all(|&(_, a)| a == -1.0) && rhs == -1.0))
    {
        RowType::Setppc
    } else if coefs.len() <= 2 {
        RowType::Varbound
    } else if coefs.iter().all(|&(j, a)| a > 0.0 && is_int(a) && inst.is_integer(j)) && rhs > 0.0 {
        RowType::Knapsack
    } else {
        RowType::Linear
    }
}

/// Builds the graph for the canonical rows of `inst` at `sol`.
pub fn build_vcg(
    inst: &MilpInstance,
    sol: &LpBasisSolution,
    round: usize,
    labels: Option<LabelVector>,
) -> Result<VcgSample> {
    let snap = LpSnapshot::from_solution(sol, inst.num_cons())?;
    build_vcg_from(inst, &snap, round, labels)
}

pub fn build_vcg_from(
    inst: &MilpInstance,
    lp: &LpSnapshot,
    round: usize,
    labels: Option<LabelVector>,
) -> Result<VcgSample> {
    let n = inst.num_vars();
    let m = inst.num_cons();
    if lp.x.len() != n
        || lp.basis_status.len() != n
        || lp.reduced_costs.len() != n
        || lp.duals.len() != m
        || lp.slack.len() != m
    {
        return Err(Error::Feature("LP snapshot does not match instance".into()));
    }
    if labels.as_ref().is_some_and(|l| l.y.len() != m) {
        return Err(Error::Feature("label length differs from row count".into()));
    }
    let x = &lp.x;
    let obj_norm = norm(inst.obj.iter().copied());
    let at_ub = |j: usize| inst.ub[j].is_finite() && (x[j] - inst.ub[j]).abs() <= SOL_TOL;

    let mut cons = Matrix::zeros(m, CONS_WIDTH);
    let mut edges = Vec::new();
    for (i, row) in inst.rows.iter().enumerate() {
        let rn = row.norm();
        let b = row.rhs;
        let f = cons.row_mut(i);
        let dot: f64 = row.coefs.iter().map(|&(j, a)| a * inst.obj[j]).sum();
        f[0] = safe_div(dot, rn * obj_norm);
        f[1] = safe_div(b, rn);
        let slack = lp.slack[i];
        f[2] = if slack.abs() <= TIGHT_TOL { 1.0 } else { 0.0 };
        f[3] = safe_div(lp.duals[i], rn);
        let act = b - slack;
        let (mut lo, mut hi) = (0.0, 0.0);
        for &(j, a) in &row.coefs {
            let (l, u) = (inst.lb[j], inst.ub[j]);
            if a > 0.0 {
                lo += a * l;
                hi += a * u;
            } else {
                lo += a * u;
                hi += a * l;
            }
        }
        f[4] = if lo.is_finite() && (act - lo).abs() <= TIGHT_TOL { 1.0 } else { 0.0 };
        f[5] = if hi.is_finite() && (act - hi).abs() <= TIGHT_TOL { 1.0 } else { 0.0 };
        let scale = b.abs().max(1.0);
        f[6] = slack / scale;
        f[7] = (-slack).max(0.0) / scale;
        f[8] = safe_div(slack.abs(), rn);
        let t = match row_type(inst, &row.coefs, b) {
            RowType::Logicor => 9,
            RowType::Setppc => 10,
            RowType::Varbound => 11,
            RowType::Knapsack => 12,
            RowType::Linear => 13,
        };
        f[t] = 1.0;
        f[14] = row.coefs.len() as f64 / n.max(1) as f64;
        f[15] = if b == 0.0 { 1.0 } else { 0.0 };
        let ratio = |a: f64| if b == 0.0 { a } else { a / b.abs() };
        let members: [Box<dyn Fn(usize) -> bool>; 4] = [
            Box::new(|_| true),
            Box::new(|j| x[j] > SOL_TOL),
            Box::new(|j| x[j] <= SOL_TOL),
            Box::new(at_ub),
        ];
        let mut col = 16;
        for keep in &members {
            let mut normed: Vec<f64> = Vec::new();
            let mut ratios: Vec<f64> = Vec::new();
            for &(j, a) in &row.coefs {
                if keep(j) {
                    normed.push(safe_div(a, rn));
                    ratios.push(ratio(a));
                }
            }
            f[col..col + 5].copy_from_slice(&five_stats(&mut normed));
            f[col + 5..col + 9].copy_from_slice(&four_stats(&mut ratios));
            col += 9;
        }
        debug_assert_eq!(col, CONS_WIDTH - 1);
        f[CONS_WIDTH - 1] = 1.0;
        for &(j, a) in &row.coefs {
            edges.push(Edge {
                row: i,
                col: j,
                coef: safe_div(a, rn),
            });
        }
    }

    let mut vars = Matrix::zeros(n, VAR_WIDTH);
    for j in 0..n {
        let f = vars.row_mut(j);
        let (lb, ub) = (inst.lb[j], inst.ub[j]);
        let binary = inst.kinds[j] == VarKind::Integer && lb == 0.0 && ub == 1.0;
        let t = match inst.kinds[j] {
            VarKind::Integer if binary => 0,
            VarKind::Integer => 1,
            VarKind::Continuous => 3,
        };
        f[t] = 1.0;
        f[4] = safe_div(inst.obj[j], obj_norm);
        f[5] = if lb.is_finite() { 1.0 } else { 0.0 };
        f[6] = if ub.is_finite() { 1.0 } else { 0.0 };
        f[7] = if lb.is_finite() { lb } else { 0.0 };
        f[8] = if ub.is_finite() { ub } else { 0.0 };
        f[9] = if lb.is_finite() && (x[j] - lb).abs() <= SOL_TOL { 1.0 } else { 0.0 };
        f[10] = if at_ub(j) { 1.0 } else { 0.0 };
        f[11] = if inst.is_integer(j) { x[j] - x[j].floor() } else { 0.0 };
        let b = match lp.basis_status[j] {
            BasisStatus::Lower => 12,
            BasisStatus::Basic => 13,
            BasisStatus::Upper => 14,
            BasisStatus::Zero => 15,
        };
        f[b] = 1.0;
        f[16] = safe_div(lp.reduced_costs[j], obj_norm);
        f[17] = if ub.is_finite() && ub > 0.0 { x[j] / ub } else { x[j] };
    }
    let sample = VcgSample {
        instance_id: inst.name.clone(),
        round,
        cons_feats: cons,
        var_feats: vars,
        edges,
        labels,
    };
    if sample.cons_feats.data.iter().chain(&sample.var_feats.data).any(|v| !v.is_finite()) {
        return Err(Error::Feature(format!("non-finite feature in {}", inst.name)));
    }
    Ok(sample)
}

/// Per-column standardization statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub cons_mean: Vec<f64>,
    pub cons_std: Vec<f64>,
    pub var_mean: Vec<f64>,
    pub var_std: Vec<f64>,
}

fn column_stats<'a>(mats: impl Iterator<Item = &'a Matrix> + Clone, width: usize) -> (Vec<f64>, Vec<f64>) {
    let mut count = 0usize;
    let mut mean = vec![0.0; width];
    for mtx in mats.clone() {
        for i in 0..mtx.rows {
            for (s, v) in mean.iter_mut().zip(mtx.row(i)) {
                *s += v;
            }
            count += 1;
        }
    }
    if count == 0 {
        return (mean, vec![1.0; width]);
    }
    for s in mean.iter_mut() {
        *s /= count as f64;
    }
    let mut var = vec![0.0; width];
    for mtx in mats {
        for i in 0..mtx.rows {
            for ((s, v), mu) in var.iter_mut().zip(mtx.row(i)).zip(&mean) {
                *s += (v - mu).powi(2);
            }
        }
    }
    let std = var
        .iter()
        .map(|v| (v / count as f64).sqrt().max(STD_FLOOR))
        .collect();
    (mean, std)
}

/// Population mean and floored standard deviation over all rows of `samples`.
pub fn feature_stats(samples: &[VcgSample]) -> Result<FeatureStats> {
    if samples.is_empty() {
        return Err(Error::Stats("no samples".into()));
    }
    let (cons_mean, cons_std) = column_stats(samples.iter().map(|s| &s.cons_feats), CONS_WIDTH);
    let (var_mean, var_std) = column_stats(samples.iter().map(|s| &s.var_feats), VAR_WIDTH);
    Ok(FeatureStats {
        cons_mean,
        cons_std,
        var_mean,
        var_std,
    })
}

pub fn standardize(sample: &mut VcgSample, stats: &FeatureStats) {
    let apply = |mtx: &mut Matrix, mean: &[f64], std: &[f64]| {
        for i in 0..mtx.rows {
            for ((v, mu), sd) in mtx.row_mut(i).iter_mut().zip(mean).zip(std) {
                *v = (*v - mu) / sd;
            }
        }
    };
    apply(&mut sample.cons_feats, &stats.cons_mean, &stats.cons_std);
    apply(&mut sample.var_feats, &stats.var_mean, &stats.var_std);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ShardHeader {
    schema: String,
    feature_hash: String,
    cons_width: usize,
    var_width: usize,
}

fn header() -> ShardHeader {
    ShardHeader {
        schema: SHARD_SCHEMA.into(),
        feature_hash: feature_hash(),
        cons_width: CONS_WIDTH,
        var_width: VAR_WIDTH,
    }
}

/// Writes a header line followed by one sample per line.
pub fn write_shard(path: &Path, samples: &[VcgSample]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(&mut w, &header())?;
    w.write_all(b"\n")?;
    for s in samples {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_shard(path: &Path) -> Result<Vec<VcgSample>> {
    let r = BufReader::new(std::fs::File::open(path)?);
    let mut lines = r.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Schema(format!("{} is empty", path.display())))??;
    let h: ShardHeader = serde_json::from_str(&first)?;
    if h != header() {
        return Err(Error::Schema(format!(
            "{}: shard header {:?} does not match this build",
            path.display(),
            h
        )));
    }
    let mut out = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutloop::LabelMode;
    use crate::lp::solve_lp;
    use crate::milp::{Family, Row};

    fn inst() -> MilpInstance {
        MilpInstance {
            name: "f".into(),
            family: Family::Other,
            obj: vec![-1.0, -1.0, 0.0],
            kinds: vec![VarKind::Integer, VarKind::Integer, VarKind::Continuous],
            lb: vec![0.0; 3],
            ub: vec![1.0, 1.0, f64::INFINITY],
            rows: vec![
                Row::le(vec![(0, -1.0), (1, -1.0)], 1.0),
                Row::le(vec![(0, 2.0), (1, 1.0)], 2.0),
                Row::le(vec![(0, 1.0), (1, 2.0), (2, 1.0)], 2.0),
            ],
        }
    }

    #[test]
    fn widths_and_names() {
        assert_eq!(cons_feature_names().len(), CONS_WIDTH);
        assert_eq!(var_feature_names().len(), VAR_WIDTH);
        let i = inst();
        let s = build_vcg(&i, &solve_lp(&i, &[]).unwrap(), 0, None).unwrap();
        assert_eq!(s.cons_feats.cols, CONS_WIDTH);
        assert_eq!(s.var_feats.cols, VAR_WIDTH);
        assert_eq!(s.edges.len(), 7);
        for r in 0..s.num_cons() {
            let onehot: f64 = (9..14).map(|c| s.cons_feats.get(r, c)).sum();
            assert_eq!(onehot, 1.0);
        }
        for r in 0..s.num_vars() {
            assert_eq!((0..4).map(|c| s.var_feats.get(r, c)).sum::<f64>(), 1.0);
            assert_eq!((12..16).map(|c| s.var_feats.get(r, c)).sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn parallel_row_and_tightness() {
        let i = MilpInstance {
            rows: vec![Row::le(vec![(0, -2.0), (1, -2.0)], 0.0), Row::le(vec![(0, 1.0)], 0.5)],
            ..inst()
        };
        let sol = solve_lp(&i, &[]).unwrap();
        let s = build_vcg(&i, &sol, 0, None).unwrap();
        // row 0 points along the objective
        assert!((s.cons_feats.get(0, 0) - 1.0).abs() < 1e-12);
        // x0 <= 0.5 binds at the optimum
        assert_eq!(s.cons_feats.get(1, 2), 1.0);
        assert_eq!(s.cons_feats.get(1, 6), 0.0);
        // x2 has zero cost and sits at its lower bound, nonbasic
        assert_eq!(s.var_feats.get(2, 9), 1.0);
        assert_eq!(s.var_feats.get(2, 12), 1.0);
    }

    #[test]
    fn stats_two_sample_toy() {
        let mk = |v: f64| {
            let mut c = Matrix::zeros(1, CONS_WIDTH);
            c.data[0] = v;
            VcgSample {
                instance_id: "x".into(),
                round: 0,
                cons_feats: c,
                var_feats: Matrix::zeros(1, VAR_WIDTH),
                edges: vec![],
                labels: None,
            }
        };
        let samples = vec![mk(0.0), mk(2.0)];
        let st = feature_stats(&samples).unwrap();
        assert_eq!(st.cons_mean[0], 1.0);
        assert_eq!(st.cons_std[0], 1.0);
        assert_eq!(st.cons_std[1], STD_FLOOR);
        let mut s = mk(2.0);
        standardize(&mut s, &st);
        assert_eq!(s.cons_feats.get(0, 0), 1.0);
        assert_eq!(s.cons_feats.get(0, 1), 0.0);
        assert!(matches!(feature_stats(&[]), Err(Error::Stats(_))));
    }

    #[test]
    fn shard_round_trip_and_schema_check() {
        let i = inst();
        let sol = solve_lp(&i, &[]).unwrap();
        let labels = LabelVector {
            y: vec![false, true, false],
            mode: LabelMode::AllCuts,
        };
        let s = build_vcg(&i, &sol, 3, Some(labels)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.jsonl");
        write_shard(&p, std::slice::from_ref(&s)).unwrap();
        assert_eq!(read_shard(&p).unwrap(), vec![s]);
        let text = std::fs::read_to_string(&p).unwrap();
        std::fs::write(&p, text.replacen(&feature_hash(), "deadbeef", 1)).unwrap();
        assert!(matches!(read_shard(&p), Err(Error::Schema(_))));
    }

    #[test]
    fn row_types() {
        let i = MilpInstance {
            obj: vec![1.0; 4],
            kinds: vec![VarKind::Integer; 4],
            lb: vec![0.0; 4],
            ub: vec![1.0; 4],
            rows: vec![],
            ..inst()
        };
        let all = |a: f64| vec![(0, a), (1, a), (2, a)];
        assert_eq!(row_type(&i, &all(-1.0), -1.0), RowType::Logicor);
        assert_eq!(row_type(&i, &all(1.0), 1.0), RowType::Setppc);
        assert_eq!(row_type(&i, &[(0, 1.0), (1, -1.0)], 0.0), RowType::Varbound);
        assert_eq!(row_type(&i, &all(7.0), 12.0), RowType::Knapsack);
        assert_eq!(row_type(&i, &all(0.5), 1.0), RowType::Linear);
    }
}
