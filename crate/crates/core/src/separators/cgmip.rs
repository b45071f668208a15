//! Exact Chvátal-Gomory separation through an auxiliary MILP.
//!
//! Variables of the auxiliary model, in order: one aggregation weight `u_i` per
//! masked row, optionally one weight `v_j` per upper-bound row `x_j <= ub_j` of
//! the support columns, integer `alpha_j` for the support set `J` followed by
//! `alpha_0`, then fractional parts `f_j` for `J` followed by `f_0`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{Cut, CutSource};
use crate::bnb::{solve_milp, MilpResult, MilpStatus, SolveLimits};
use crate::milp::{Family, MilpInstance, Row, VarKind};
use crate::{Error, Result};

/// Support threshold on `x*` for the integer columns the model carries.
const SUPPORT_TOL: f64 = 1e-6;
const SNAP_TOL: f64 = 1e-6;
const U_TOL: f64 = 1e-6;
const GROUP_TOL: f64 = 1e-9;

/// Search effort for one separation call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EffortLimit {
    WallClock { initial_s: f64, total_s: f64 },
    /// Branch-and-bound node counts, for machine-independent runs.
    Nodes { initial: u64, total: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeparatorConfig {
    pub delta: f64,
    pub min_violation: f64,
    pub sparsity_weight: f64,
    pub effort: EffortLimit,
    pub max_feasible: usize,
    pub max_incumbent: usize,
    /// Also aggregate the upper-bound rows of integer support columns. The mask
    /// and labels never cover these rows.
    pub use_bound_rows: bool,
}

impl Default for SeparatorConfig {
    fn default() -> Self {
        SeparatorConfig {
            delta: 0.01,
            min_violation: 0.01,
            sparsity_weight: 1e-4,
            effort: EffortLimit::WallClock {
                initial_s: 15.0,
                total_s: 180.0,
            },
            max_feasible: 5000,
            max_incumbent: 1000,
            use_bound_rows: true,
        }
    }
}

impl SeparatorConfig {
    /// Node-budget configuration with the same 1:12 initial-to-total ratio as
    /// the wall-clock default.
    pub fn deterministic(initial_nodes: u64) -> Self {
        SeparatorConfig {
            effort: EffortLimit::Nodes {
                initial: initial_nodes,
                total: initial_nodes * 12,
            },
            ..Self::default()
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.effort, EffortLimit::Nodes { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.delta > 0.0
            && self.delta < 1.0
            && self.min_violation > 0.0
            && self.sparsity_weight >= 0.0
            && self.max_feasible >= 1
            && self.max_incumbent >= 1;
        let effort_ok = match self.effort {
            EffortLimit::WallClock { initial_s, total_s } => initial_s >= 0.0 && total_s >= initial_s,
            EffortLimit::Nodes { initial, total } => total >= initial,
        };
        if ok && effort_ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid separator config {self:?}")))
        }
    }
}

/// Auxiliary model together with the index maps needed to read solutions back.
#[derive(Debug, Clone)]
pub struct CgMipModel {
    pub milp: MilpInstance,
    /// Canonical row of each `u` variable.
    pub rows: Vec<usize>,
    /// Integer columns `J` that carry an `alpha` variable.
    pub support: Vec<usize>,
    /// Columns whose upper-bound row carries a `v` weight.
    pub bounds: Vec<usize>,
    /// Continuous columns that received a projection row.
    pub projected: Vec<usize>,
}

impl CgMipModel {
    pub fn num_u(&self) -> usize {
        self.rows.len()
    }

    pub fn v_index(&self, k: usize) -> usize {
        self.num_u() + k
    }

    pub fn alpha_index(&self, k: usize) -> usize {
        self.num_u() + self.bounds.len() + k
    }

    pub fn alpha0_index(&self) -> usize {
        self.alpha_index(self.support.len())
    }

    pub fn f_index(&self, k: usize) -> usize {
        self.alpha0_index() + 1 + k
    }

    pub fn f0_index(&self) -> usize {
        self.f_index(self.support.len())
    }

    /// Embeds the `u` block of a model solution into full row space.
    pub fn dense_u(&self, sol: &[f64], m: usize) -> Vec<f64> {
        let mut u = vec![0.0; m];
        for (k, &i) in self.rows.iter().enumerate() {
            u[i] = sol[k];
        }
        u
    }

    /// Bound-row weights of a model solution as `(column, weight)` pairs.
    pub fn bound_weights(&self, sol: &[f64]) -> Vec<(usize, f64)> {
        self.bounds
            .iter()
            .enumerate()
            .map(|(k, &j)| (j, sol[self.v_index(k)]))
            .collect()
    }
}

pub fn build_cgmip(
    inst: &MilpInstance,
    x_star: &[f64],
    mask: &[bool],
    cfg: &SeparatorConfig,
) -> Result<CgMipModel> {
    let m = inst.num_cons();
    let n = inst.num_vars();
    if mask.len() != m || x_star.len() != n {
        return Err(Error::Dimension(format!(
            "mask {} / point {} against {m} rows / {n} vars",
            mask.len(),
            x_star.len()
        )));
    }
    let rows: Vec<usize> = (0..m).filter(|&i| mask[i]).collect();
    if rows.is_empty() {
        return Err(Error::EmptyMask);
    }
    let support: Vec<usize> = (0..n)
        .filter(|&j| inst.is_integer(j) && x_star[j] > SUPPORT_TOL)
        .collect();
    let projected: Vec<usize> = (0..n).filter(|&j| !inst.is_integer(j)).collect();
    let bounds: Vec<usize> = if cfg.use_bound_rows {
        support.iter().copied().filter(|&j| inst.ub[j].is_finite()).collect()
    } else {
        Vec::new()
    };
    let cols = inst.columns();
    let model = CgMipModel {
        milp: MilpInstance {
            name: format!("{}-cgmip", inst.name),
            family: Family::Other,
            obj: Vec::new(),
            kinds: Vec::new(),
            lb: Vec::new(),
            ub: Vec::new(),
            rows: Vec::new(),
        },
        rows,
        support,
        bounds,
        projected,
    };
    let nu = model.num_u();
    let nv = model.bounds.len();
    let ns = model.support.len();
    let nvars = nu + nv + 2 * (ns + 1);
    let hi = 1.0 - cfg.delta;
    let mut obj = vec![0.0; nvars];
    let mut kinds = vec![VarKind::Continuous; nvars];
    let mut lb = vec![0.0; nvars];
    let mut ub = vec![hi; nvars];
    for o in obj.iter_mut().take(nu + nv) {
        *o = cfg.sparsity_weight;
    }
    for k in 0..=ns {
        let a = model.alpha_index(k);
        kinds[a] = VarKind::Integer;
        lb[a] = f64::NEG_INFINITY;
        ub[a] = f64::INFINITY;
    }
    // row position of each canonical row inside the u block
    let mut upos = vec![usize::MAX; m];
    for (k, &i) in model.rows.iter().enumerate() {
        upos[i] = k;
    }
    let aggregate = |col: &[(usize, f64)]| -> Vec<(usize, f64)> {
        col.iter()
            .filter(|&&(i, _)| upos[i] != usize::MAX)
            .map(|&(i, a)| (upos[i], a))
            .collect()
    };
    let mut out_rows = Vec::with_capacity(ns + 2 + model.projected.len());
    let bound_pos = |j: usize| model.bounds.iter().position(|&b| b == j);
    for (k, &j) in model.support.iter().enumerate() {
        let mut coefs = aggregate(&cols[j]);
        if let Some(b) = bound_pos(j) {
            coefs.push((model.v_index(b), 1.0));
        }
        coefs.push((model.alpha_index(k), -1.0));
        coefs.push((model.f_index(k), -1.0));
        out_rows.push(Row::eq(coefs, 0.0));
    }
    let mut coefs: Vec<(usize, f64)> = model
        .rows
        .iter()
        .enumerate()
        .map(|(k, &i)| (k, inst.rows[i].rhs))
        .collect();
    for (b, &j) in model.bounds.iter().enumerate() {
        coefs.push((model.v_index(b), inst.ub[j]));
    }
    coefs.push((model.alpha0_index(), -1.0));
    coefs.push((model.f0_index(), -1.0));
    out_rows.push(Row::eq(coefs, 0.0));

    // violation: sum x*_j alpha_j - alpha_0 >= min_violation
    let mut viol: Vec<(usize, f64)> = model
        .support
        .iter()
        .enumerate()
        .map(|(k, &j)| (model.alpha_index(k), -x_star[j]))
        .collect();
    viol.push((model.alpha0_index(), 1.0));
    out_rows.push(Row::le(viol.clone(), -cfg.min_violation));
    for &(a, c) in &viol {
        obj[a] = c;
    }
    for &j in &model.projected {
        let coefs: Vec<(usize, f64)> = aggregate(&cols[j]).into_iter().map(|(k, a)| (k, -a)).collect();
        out_rows.push(Row::le(coefs, 0.0));
    }
    let mut model = model;
    model.milp.obj = obj;
    model.milp.kinds = kinds;
    model.milp.lb = lb;
    model.milp.ub = ub;
    model.milp.rows = out_rows;
    Ok(model)
}

/// `floor(v)`, treating values within [`SNAP_TOL`] of an integer as that integer.
pub fn snap_floor(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() <= SNAP_TOL {
        r
    } else {
        v.floor()
    }
}

/// Turns a `u` vector over canonical rows, plus optional upper-bound row
/// weights `v`, into the rank-1 CG cut it induces.
pub fn cg_cut_from_u(inst: &MilpInstance, u: &[f64], v: &[(usize, f64)], x_star: &[f64]) -> Cut {
    let n = inst.num_vars();
    let mut prod = vec![0.0; n];
    let mut rhs = 0.0;
    for &(j, w) in v {
        prod[j] += w;
        rhs += w * inst.ub[j];
    }
    for (i, row) in inst.rows.iter().enumerate() {
        if u[i] == 0.0 {
            continue;
        }
        rhs += u[i] * row.rhs;
        for &(j, a) in &row.coefs {
            prod[j] += u[i] * a;
        }
    }
    let alpha: Vec<(usize, f64)> = (0..n)
        .filter(|&j| inst.is_integer(j))
        .map(|j| (j, snap_floor(prod[j]) + 0.0))
        .filter(|&(_, a)| a != 0.0)
        .collect();
    let mut cut = Cut {
        alpha,
        alpha0: snap_floor(rhs) + 0.0,
        u: u.iter()
            .enumerate()
            .filter(|&(_, &w)| w > 0.0)
            .map(|(i, &w)| (i, w))
            .collect(),
        v: v.iter().copied().filter(|&(_, w)| w > 0.0).collect(),
        violation: 0.0,
        source: CutSource::Cgmip,
        tight: false,
        round: 0,
    };
    cut.violation = cut.violation_at(x_star);
    cut
}

/// Reads one cut per pool solution, dropping those below the violation threshold.
pub fn extract_cuts(
    pool: &MilpResult,
    model: &CgMipModel,
    inst: &MilpInstance,
    x_star: &[f64],
    cfg: &SeparatorConfig,
) -> Result<Vec<Cut>> {
    let m = inst.num_cons();
    let hi = 1.0 - cfg.delta;
    let mut cuts = Vec::new();
    for entry in &pool.pool {
        let mut u = model.dense_u(&entry.x, m);
        for (i, w) in u.iter_mut().enumerate() {
            if *w < -U_TOL || *w > hi + U_TOL {
                return Err(Error::ModelCorruption(format!("u[{i}] = {w}")));
            }
            *w = w.clamp(0.0, hi);
        }
        let mut v = model.bound_weights(&entry.x);
        for (j, w) in v.iter_mut() {
            if *w < -U_TOL || *w > hi + U_TOL {
                return Err(Error::ModelCorruption(format!("v[{j}] = {w}")));
            }
            *w = w.clamp(0.0, hi);
        }
        let cut = cg_cut_from_u(inst, &u, &v, x_star);
        if cut.violation >= cfg.min_violation - 1e-9 {
            cuts.push(cut);
        }
    }
    Ok(cuts)
}

fn support_key(c: &Cut) -> Vec<usize> {
    c.alpha.iter().map(|&(j, _)| j).collect()
}

/// Keeps, among cuts sharing a violation, only the sparsest one; output is
/// ordered by descending violation.
pub fn filter_pool(mut cuts: Vec<Cut>) -> Vec<Cut> {
    cuts.sort_by(|a, b| b.violation.total_cmp(&a.violation));
    let mut out: Vec<Cut> = Vec::new();
    let mut group: Vec<Cut> = Vec::new();
    let flush = |group: &mut Vec<Cut>, out: &mut Vec<Cut>| {
        if let Some(best) = group
            .drain(..)
            .min_by(|a, b| {
                a.support_size()
                    .cmp(&b.support_size())
                    .then_with(|| support_key(a).cmp(&support_key(b)))
            })
        {
            out.push(best);
        }
    };
    for c in cuts {
        if let Some(first) = group.first() {
            if (first.violation - c.violation).abs() > GROUP_TOL {
                flush(&mut group, &mut out);
            }
        }
        group.push(c);
    }
    flush(&mut group, &mut out);
    out
}

/// Outcome of one separation call with escalation.
#[derive(Debug, Clone)]
pub struct SeparationRun {
    pub cuts: Vec<Cut>,
    pub time_s: f64,
    pub nodes: u64,
    pub attempts: usize,
    /// The last search proved that no violated cut exists in the model.
    pub proved_empty: bool,
}

#[derive(Debug, Clone, Copy)]
enum Budget {
    Seconds(f64),
    Nodes(u64),
}

fn schedule(effort: EffortLimit) -> Vec<Budget> {
    let mut out = Vec::new();
    match effort {
        EffortLimit::WallClock { initial_s, total_s } => {
            let mut used = 0.0;
            let mut next = initial_s;
            loop {
                let b = next.min(total_s - used);
                if out.is_empty() {
                    out.push(Budget::Seconds(b.max(0.0)));
                } else if b <= 0.0 {
                    break;
                } else {
                    out.push(Budget::Seconds(b));
                }
                used += b.max(0.0);
                next = if next <= 0.0 { 1.0 } else { 2.0 * next };
                if used >= total_s {
                    break;
                }
            }
        }
        EffortLimit::Nodes { initial, total } => {
            let mut used = 0u64;
            let mut next = initial;
            loop {
                let b = next.min(total.saturating_sub(used));
                if out.is_empty() {
                    out.push(Budget::Nodes(b));
                } else if b == 0 {
                    break;
                } else {
                    out.push(Budget::Nodes(b));
                }
                used += b;
                next = if next == 0 { 1 } else { 2 * next };
                if used >= total {
                    break;
                }
            }
        }
    }
    out
}

/// Separates `x_star` over the masked rows, doubling the budget and switching to
/// first-solution mode until a cut is found or the total budget is used.
pub fn run_cgmip(
    inst: &MilpInstance,
    x_star: &[f64],
    mask: &[bool],
    cfg: &SeparatorConfig,
) -> Result<SeparationRun> {
    let model = build_cgmip(inst, x_star, mask, cfg)?;
    let start = Instant::now();
    let mut run = SeparationRun {
        cuts: Vec::new(),
        time_s: 0.0,
        nodes: 0,
        attempts: 0,
        proved_empty: false,
    };
    for (k, budget) in schedule(cfg.effort).into_iter().enumerate() {
        let mut limits = SolveLimits {
            max_feasible: cfg.max_feasible,
            max_incumbent: cfg.max_incumbent,
            feasibility_emphasis: true,
            ..SolveLimits::default()
        };
        if k > 0 {
            limits.stop_on_first_incumbent = true;
            limits.max_feasible = 1;
        }
        match budget {
            Budget::Seconds(s) => limits.time_limit_s = Some(s),
            Budget::Nodes(b) => limits.node_limit = Some(b),
        }
        let res = solve_milp(&model.milp, &limits)?;
        run.attempts += 1;
        run.nodes += res.stats.nodes;
        let cuts = extract_cuts(&res, &model, inst, x_star, cfg)?;
        if !cuts.is_empty() {
            run.cuts = filter_pool(cuts);
            break;
        }
        if matches!(res.status, MilpStatus::Optimal | MilpStatus::Infeasible) {
            run.proved_empty = res.status == MilpStatus::Infeasible;
            break;
        }
    }
    run.time_s = start.elapsed().as_secs_f64();
    Ok(run)
}
