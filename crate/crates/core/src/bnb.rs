//! LP-based branch and bound with a solution pool.
//!
//! Used for the CG-MIP auxiliary problems and for computing integer optima of
//! desk-scale instances. Limits are checked only between nodes.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::lp::{LpModel, LpStatus};
use crate::milp::{MilpInstance, FEAS_TOL};
use crate::{Error, Result};

const INT_TOL: f64 = 1e-6;
const PRUNE_TOL: f64 = 1e-9;
const DEDUP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveLimits {
    pub time_limit_s: Option<f64>,
    /// Deterministic replacement for the wall-clock limit.
    pub node_limit: Option<u64>,
    pub max_feasible: usize,
    pub max_incumbent: usize,
    pub stop_on_first_incumbent: bool,
    pub feasibility_emphasis: bool,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            time_limit_s: None,
            node_limit: None,
            max_feasible: usize::MAX,
            max_incumbent: usize::MAX,
            stop_on_first_incumbent: false,
            feasibility_emphasis: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MilpStatus {
    Optimal,
    LimitHit,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub x: Vec<f64>,
    pub obj: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MilpStats {
    pub nodes: u64,
    pub lp_iterations: u64,
    pub incumbents: usize,
    pub time_s: f64,
}

#[derive(Debug, Clone)]
pub struct MilpResult {
    pub status: MilpStatus,
    pub incumbent: Option<PoolEntry>,
    /// Dual bound (minimization).
    pub bound: f64,
    /// Distinct feasible solutions, best objective first.
    pub pool: Vec<PoolEntry>,
    pub stats: MilpStats,
}

impl MilpResult {
    /// Whether the search finished without tripping a limit.
    pub fn is_exhaustive(&self) -> bool {
        matches!(self.status, MilpStatus::Optimal | MilpStatus::Infeasible)
    }
}

#[derive(Debug, Clone)]
struct Node {
    lb: Vec<f64>,
    ub: Vec<f64>,
    bound: f64,
    id: u64,
}

/// Heap entry ordered so the smallest bound (then smallest id) pops first.
struct BestFirst(Node);

impl PartialEq for BestFirst {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for BestFirst {}
impl PartialOrd for BestFirst {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for BestFirst {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .bound
            .total_cmp(&self.0.bound)
            .then_with(|| other.0.id.cmp(&self.0.id))
    }
}

enum Frontier {
    Depth(Vec<Node>),
    Best(BinaryHeap<BestFirst>),
}

impl Frontier {
    fn push(&mut self, n: Node) {
        match self {
            Frontier::Depth(v) => v.push(n),
            Frontier::Best(h) => h.push(BestFirst(n)),
        }
    }
    fn pop(&mut self) -> Option<Node> {
        match self {
            Frontier::Depth(v) => v.pop(),
            Frontier::Best(h) => h.pop().map(|b| b.0),
        }
    }
    fn is_empty(&self) -> bool {
        match self {
            Frontier::Depth(v) => v.is_empty(),
            Frontier::Best(h) => h.is_empty(),
        }
    }
    fn min_bound(&self) -> f64 {
        match self {
            Frontier::Depth(v) => v.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min),
            Frontier::Best(h) => h.peek().map_or(f64::INFINITY, |b| b.0.bound),
        }
    }
}

struct Search<'a> {
    inst: &'a MilpInstance,
    lp: &'a LpModel,
    limits: &'a SolveLimits,
    pool: Vec<(PoolEntry, u64)>,
    incumbent: Option<PoolEntry>,
    stats: MilpStats,
    found: u64,
    stop: bool,
}

impl Search<'_> {
    fn incumbent_obj(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::INFINITY, |e| e.obj)
    }

    fn offer(&mut self, mut x: Vec<f64>) {
        for j in 0..x.len() {
            if self.inst.is_integer(j) {
                x[j] = x[j].round();
            }
        }
        if !self.inst.is_feasible(&x, FEAS_TOL) {
            // rounding the integers can leave equality rows off by roundoff;
            // re-solve the continuous part with the integers fixed
            if !self.inst.has_continuous() {
                return;
            }
            let mut lb = self.inst.lb.clone();
            let mut ub = self.inst.ub.clone();
            for j in 0..x.len() {
                if self.inst.is_integer(j) {
                    lb[j] = x[j];
                    ub[j] = x[j];
                }
            }
            let sol = self.lp.solve_with_bounds(&lb, &ub);
            self.stats.lp_iterations += sol.iterations as u64;
            if !sol.is_optimal() || !self.inst.is_feasible(&sol.x, FEAS_TOL) {
                return;
            }
            x = sol.x;
        }
        let obj = self.inst.objective(&x);
        let duplicate = self.pool.iter().any(|(e, _)| {
            e.x.iter()
                .zip(&x)
                .all(|(a, b)| (a - b).abs() <= DEDUP_TOL)
        });
        if duplicate {
            return;
        }
        let entry = PoolEntry { x, obj };
        if obj < self.incumbent_obj() - PRUNE_TOL {
            self.incumbent = Some(entry.clone());
            self.stats.incumbents += 1;
        }
        if self.pool.len() < self.limits.max_feasible {
            self.pool.push((entry, self.found));
            self.found += 1;
        }
        if self.pool.len() >= self.limits.max_feasible
            || self.stats.incumbents >= self.limits.max_incumbent
            || (self.limits.stop_on_first_incumbent && self.stats.incumbents >= 1)
        {
            self.stop = true;
        }
    }
}

fn most_fractional(inst: &MilpInstance, x: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64, f64)> = None;
    for j in 0..x.len() {
        if !inst.is_integer(j) {
            continue;
        }
        let frac = x[j] - x[j].floor();
        if frac <= INT_TOL || frac >= 1.0 - INT_TOL {
            continue;
        }
        let score = (frac - 0.5).abs();
        if best.is_none_or(|(_, _, s)| score < s) {
            best = Some((j, frac, score));
        }
    }
    best.map(|(j, f, _)| (j, f))
}

/// Branch and bound over `inst` under `limits`.
pub fn solve_milp(inst: &MilpInstance, limits: &SolveLimits) -> Result<MilpResult> {
    let start = Instant::now();
    let lp = LpModel::new(inst, &[])?;
    let mut search = Search {
        inst,
        lp: &lp,
        limits,
        pool: Vec::new(),
        incumbent: None,
        stats: MilpStats::default(),
        found: 0,
        stop: false,
    };
    let mut frontier = if limits.feasibility_emphasis {
        Frontier::Depth(Vec::new())
    } else {
        Frontier::Best(BinaryHeap::new())
    };
    let mut next_id = 0u64;
    frontier.push(Node {
        lb: inst.lb.clone(),
        ub: inst.ub.clone(),
        bound: f64::NEG_INFINITY,
        id: next_id,
    });
    next_id += 1;
    let mut unbounded = false;
    let mut limit_hit = false;

    while !frontier.is_empty() {
        let out_of_time = limits
            .time_limit_s
            .is_some_and(|t| start.elapsed().as_secs_f64() >= t);
        let out_of_nodes = limits.node_limit.is_some_and(|k| search.stats.nodes >= k);
        if search.stop || out_of_time || out_of_nodes {
            limit_hit = true;
            break;
        }
        let node = frontier.pop().expect("nonempty frontier");
        if node.bound >= search.incumbent_obj() - PRUNE_TOL {
            continue;
        }
        search.stats.nodes += 1;
        let sol = lp.solve_with_bounds(&node.lb, &node.ub);
        search.stats.lp_iterations += sol.iterations as u64;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Unbounded => {
                unbounded = true;
                break;
            }
            LpStatus::Infeasible | LpStatus::IterationLimit => continue,
        }
        if sol.obj >= search.incumbent_obj() - PRUNE_TOL {
            continue;
        }
        let Some((j, frac)) = most_fractional(inst, &sol.x) else {
            search.offer(sol.x);
            continue;
        };
        if limits.feasibility_emphasis {
            let mut lb = node.lb.clone();
            let mut ub = node.ub.clone();
            for k in 0..inst.num_vars() {
                if inst.is_integer(k) {
                    let v = sol.x[k].round().clamp(node.lb[k], node.ub[k]);
                    lb[k] = v;
                    ub[k] = v;
                }
            }
            let h = lp.solve_with_bounds(&lb, &ub);
            search.stats.lp_iterations += h.iterations as u64;
            if h.is_optimal() {
                search.offer(h.x);
            }
        }
        let v = sol.x[j];
        let mut down = node.clone();
        down.ub[j] = v.floor();
        down.bound = sol.obj;
        let mut up = node;
        up.lb[j] = v.ceil();
        up.bound = sol.obj;
        down.id = next_id;
        up.id = next_id + 1;
        next_id += 2;
        // depth-first pops the last push: dive toward the nearer integer
        if frac >= 0.5 {
            frontier.push(down);
            frontier.push(up);
        } else {
            frontier.push(up);
            frontier.push(down);
        }
    }
    if search.stop && !frontier.is_empty() {
        limit_hit = true;
    }
    if frontier.is_empty() && !unbounded {
        limit_hit = false;
    }

    search.stats.time_s = start.elapsed().as_secs_f64();
    let mut pool = search.pool;
    pool.sort_by(|a, b| a.0.obj.total_cmp(&b.0.obj).then(a.1.cmp(&b.1)));
    let pool: Vec<PoolEntry> = pool.into_iter().map(|(e, _)| e).collect();
    let inc_obj = search.incumbent.as_ref().map_or(f64::INFINITY, |e| e.obj);
    let (status, bound) = if unbounded {
        (MilpStatus::Unbounded, f64::NEG_INFINITY)
    } else if limit_hit {
        (MilpStatus::LimitHit, frontier.min_bound().min(inc_obj))
    } else if search.incumbent.is_some() {
        (MilpStatus::Optimal, inc_obj)
    } else {
        (MilpStatus::Infeasible, f64::INFINITY)
    };
    Ok(MilpResult {
        status,
        incumbent: search.incumbent,
        bound,
        pool,
        stats: search.stats,
    })
}

/// Budget for integer-optimum computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZipBudget {
    pub node_limit: Option<u64>,
    pub time_limit_s: Option<f64>,
}

impl Default for ZipBudget {
    fn default() -> Self {
        ZipBudget {
            node_limit: Some(200_000),
            time_limit_s: None,
        }
    }
}

/// Exact integer optimum, or [`Error::ZipUnavailable`] if the budget runs out.
pub fn compute_zip(inst: &MilpInstance, budget: &ZipBudget) -> Result<f64> {
    let limits = SolveLimits {
        time_limit_s: budget.time_limit_s,
        node_limit: budget.node_limit,
        ..SolveLimits::default()
    };
    let res = solve_milp(inst, &limits)?;
    match res.status {
        MilpStatus::Optimal => Ok(res.incumbent.expect("optimal has incumbent").obj),
        MilpStatus::Infeasible => Err(Error::ZipUnavailable(format!("{} is infeasible", inst.name))),
        MilpStatus::Unbounded => Err(Error::ZipUnavailable(format!("{} is unbounded", inst.name))),
        MilpStatus::LimitHit => Err(Error::ZipUnavailable(format!(
            "{}: budget exhausted after {} nodes",
            inst.name, res.stats.nodes
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{Family, Row, VarKind};

    fn two_row() -> MilpInstance {
        MilpInstance {
            name: "b".into(),
            family: Family::Other,
            obj: vec![-1.0, -1.0],
            kinds: vec![VarKind::Integer; 2],
            lb: vec![0.0; 2],
            ub: vec![1.0; 2],
            rows: vec![
                Row::le(vec![(0, 2.0), (1, 1.0)], 2.0),
                Row::le(vec![(0, 1.0), (1, 2.0)], 2.0),
            ],
        }
    }

    #[test]
    fn two_row_optimum() {
        let res = solve_milp(&two_row(), &SolveLimits::default()).unwrap();
        assert_eq!(res.status, MilpStatus::Optimal);
        assert_eq!(res.incumbent.as_ref().unwrap().obj, -1.0);
        assert!(res.bound <= res.incumbent.unwrap().obj + 1e-9);
    }

    #[test]
    fn first_incumbent_stops_search() {
        let limits = SolveLimits {
            max_incumbent: 1,
            stop_on_first_incumbent: true,
            feasibility_emphasis: true,
            ..SolveLimits::default()
        };
        let res = solve_milp(&two_row(), &limits).unwrap();
        assert_eq!(res.status, MilpStatus::LimitHit);
        assert_eq!(res.pool.len(), 1);
    }

    #[test]
    fn infeasible_binary() {
        let inst = MilpInstance {
            name: "inf".into(),
            family: Family::Other,
            obj: vec![0.0],
            kinds: vec![VarKind::Integer],
            lb: vec![0.0],
            ub: vec![1.0],
            rows: vec![Row::le(vec![(0, 1.0)], 1.0), Row::le(vec![(0, -1.0)], -2.0)],
        };
        let res = solve_milp(&inst, &SolveLimits::default()).unwrap();
        assert_eq!(res.status, MilpStatus::Infeasible);
        assert!(res.pool.is_empty());
    }

    #[test]
    fn zip_on_totally_unimodular_toy_equals_lp() {
        // assignment-like: x0 + x1 <= 1, x1 + x2 <= 1 (interval matrix)
        let inst = MilpInstance {
            name: "tu".into(),
            family: Family::Other,
            obj: vec![-2.0, -3.0, -2.0],
            kinds: vec![VarKind::Integer; 3],
            lb: vec![0.0; 3],
            ub: vec![1.0; 3],
            rows: vec![
                Row::le(vec![(0, 1.0), (1, 1.0)], 1.0),
                Row::le(vec![(1, 1.0), (2, 1.0)], 1.0),
            ],
        };
        let lp = crate::lp::solve_lp(&inst, &[]).unwrap();
        let zip = compute_zip(&inst, &ZipBudget::default()).unwrap();
        assert!((zip - lp.obj).abs() < 1e-9);
        assert_eq!(zip, -4.0);
    }

    #[test]
    fn pool_is_sorted_and_incumbent_first() {
        let limits = SolveLimits {
            feasibility_emphasis: true,
            ..SolveLimits::default()
        };
        let res = solve_milp(&two_row(), &limits).unwrap();
        assert_eq!(res.status, MilpStatus::Optimal);
        assert!(res.pool.windows(2).all(|w| w[0].obj <= w[1].obj));
        assert_eq!(res.pool[0].obj, res.incumbent.unwrap().obj);
        for e in &res.pool {
            assert!(two_row().is_feasible(&e.x, 1e-6));
        }
    }

    #[test]
    fn node_budget_zero_hits_limit() {
        let limits = SolveLimits {
            node_limit: Some(0),
            ..SolveLimits::default()
        };
        let res = solve_milp(&two_row(), &limits).unwrap();
        assert_eq!(res.status, MilpStatus::LimitHit);
        assert!(res.incumbent.is_none());
    }
}
