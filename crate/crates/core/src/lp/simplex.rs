//! Bounded-variable primal simplex on `A x + s = b` with an explicit basis inverse.
//!
//! Working columns are laid out as structural variables, then one slack per row,
//! then phase-one artificials. Pricing is Dantzig until a run of degenerate pivots
//! trips the counter, after which Bland's rule is used until termination.

use nalgebra::DMatrix;

const DJ_TOL: f64 = 1e-9;
const PIV_TOL: f64 = 1e-9;
const PHASE1_TOL: f64 = 1e-7;
const DEGENERATE_STEP: f64 = 1e-12;
const DEGENERACY_TRIGGER: usize = 50;
pub(crate) const REFACTOR_EVERY: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarPos {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Nonbasic free variable resting at zero.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

pub(crate) struct Engine {
    pub m: usize,
    pub n_struct: usize,
    pub cols: Vec<Vec<(usize, f64)>>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cost: Vec<f64>,
    pub x: Vec<f64>,
    pub pos: Vec<VarPos>,
    pub head: Vec<usize>,
    /// Row-major `m x m` basis inverse.
    pub binv: Vec<f64>,
    pub rhs: Vec<f64>,
    pub duals: Vec<f64>,
    pub iterations: usize,
    pivots_since_refactor: usize,
    degenerate_run: usize,
    bland: bool,
}

impl Engine {
    /// `cols`/`lo`/`hi`/`cost` cover structural and slack columns only; artificials
    /// are added here as needed.
    pub fn new(
        n_struct: usize,
        mut cols: Vec<Vec<(usize, f64)>>,
        mut lo: Vec<f64>,
        mut hi: Vec<f64>,
        rhs: Vec<f64>,
    ) -> Engine {
        let m = rhs.len();
        let n_work = cols.len();
        debug_assert_eq!(n_work, n_struct + m);
        let mut x = vec![0.0; n_work];
        let mut pos = vec![VarPos::AtLower; n_work];
        for j in 0..n_struct {
            if lo[j].is_finite() {
                x[j] = lo[j];
                pos[j] = VarPos::AtLower;
            } else if hi[j].is_finite() {
                x[j] = hi[j];
                pos[j] = VarPos::AtUpper;
            } else {
                x[j] = 0.0;
                pos[j] = VarPos::Free;
            }
        }
        let mut resid = rhs.clone();
        for j in 0..n_struct {
            if x[j] != 0.0 {
                for &(i, a) in &cols[j] {
                    resid[i] -= a * x[j];
                }
            }
        }
        let mut head = vec![0; m];
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            let s = n_struct + i;
            let r = resid[i];
            if r >= lo[s] - 1e-12 && r <= hi[s] + 1e-12 {
                x[s] = r.clamp(lo[s], hi[s]);
                pos[s] = VarPos::Basic(i);
                head[i] = s;
                binv[i * m + i] = 1.0;
            } else {
                let bound = if r < lo[s] { lo[s] } else { hi[s] };
                x[s] = bound;
                pos[s] = if bound == lo[s] {
                    VarPos::AtLower
                } else {
                    VarPos::AtUpper
                };
                let sign = if r - bound >= 0.0 { 1.0 } else { -1.0 };
                let a = cols.len();
                cols.push(vec![(i, sign)]);
                lo.push(0.0);
                hi.push(f64::INFINITY);
                x.push((r - bound).abs());
                pos.push(VarPos::Basic(i));
                head[i] = a;
                binv[i * m + i] = sign;
            }
        }
        let n_all = cols.len();
        Engine {
            m,
            n_struct,
            cols,
            lo,
            hi,
            cost: vec![0.0; n_all],
            x,
            pos,
            head,
            binv,
            rhs,
            duals: vec![0.0; m],
            iterations: 0,
            pivots_since_refactor: 0,
            degenerate_run: 0,
            bland: false,
        }
    }

    pub fn n_work(&self) -> usize {
        self.n_struct + self.m
    }

    fn has_artificials(&self) -> bool {
        self.cols.len() > self.n_work()
    }

    /// Runs both phases. `obj` covers structural columns only.
    pub fn solve(&mut self, obj: &[f64], max_iter: usize) -> Outcome {
        if self.has_artificials() {
            let nw = self.n_work();
            for c in self.cost.iter_mut() {
                *c = 0.0;
            }
            for a in nw..self.cols.len() {
                self.cost[a] = 1.0;
            }
            match self.iterate(max_iter) {
                Outcome::Optimal => {}
                Outcome::Unbounded => return Outcome::Infeasible,
                other => return other,
            }
            self.refactor();
            let infeas: f64 = (nw..self.cols.len()).map(|a| self.x[a].abs()).sum();
            let scale = 1.0 + self.rhs.iter().fold(0.0f64, |acc, b| acc.max(b.abs()));
            if infeas > PHASE1_TOL * scale {
                return Outcome::Infeasible;
            }
            for a in nw..self.cols.len() {
                self.hi[a] = 0.0;
                if !matches!(self.pos[a], VarPos::Basic(_)) {
                    self.x[a] = 0.0;
                    self.pos[a] = VarPos::AtLower;
                }
            }
            self.degenerate_run = 0;
        }
        for c in self.cost.iter_mut() {
            *c = 0.0;
        }
        self.cost[..self.n_struct].copy_from_slice(obj);
        let out = self.iterate(max_iter);
        self.refactor();
        self.compute_duals();
        out
    }

    pub fn compute_duals(&mut self) {
        let m = self.m;
        let mut y = vec![0.0; m];
        for p in 0..m {
            let cb = self.cost[self.head[p]];
            if cb != 0.0 {
                let row = &self.binv[p * m..(p + 1) * m];
                for i in 0..m {
                    y[i] += cb * row[i];
                }
            }
        }
        self.duals = y;
    }

    pub fn reduced_cost(&self, j: usize) -> f64 {
        let mut d = self.cost[j];
        for &(i, a) in &self.cols[j] {
            d -= self.duals[i] * a;
        }
        d
    }

    fn column_ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut out = vec![0.0; m];
        for &(i, a) in &self.cols[j] {
            for p in 0..m {
                out[p] += self.binv[p * m + i] * a;
            }
        }
        out
    }

    fn iterate(&mut self, max_iter: usize) -> Outcome {
        loop {
            if self.iterations >= max_iter {
                return Outcome::IterationLimit;
            }
            self.compute_duals();
            let Some((q, dir)) = self.price() else {
                return Outcome::Optimal;
            };
            let alpha = self.column_ftran(q);

            let mut limits: Vec<(usize, f64, f64)> = Vec::new();
            for p in 0..self.m {
                let rate = -dir * alpha[p];
                if rate.abs() <= PIV_TOL {
                    continue;
                }
                let b = self.head[p];
                let lim = if rate < 0.0 {
                    if !self.lo[b].is_finite() {
                        continue;
                    }
                    (self.x[b] - self.lo[b]) / -rate
                } else {
                    if !self.hi[b].is_finite() {
                        continue;
                    }
                    (self.hi[b] - self.x[b]) / rate
                };
                limits.push((p, rate, lim.max(0.0)));
            }
            let theta = limits
                .iter()
                .fold(f64::INFINITY, |acc, &(_, _, l)| acc.min(l));
            let mut best: Option<(usize, f64)> = None;
            for &(p, rate, lim) in &limits {
                if lim > theta + 1e-12 {
                    continue;
                }
                let take = match best {
                    None => true,
                    Some((bp, _)) if self.bland => self.head[p] < self.head[bp],
                    Some((bp, _)) => alpha[p].abs() > alpha[bp].abs(),
                };
                if take {
                    best = Some((p, rate));
                }
            }
            let flip = self.hi[q] - self.lo[q];
            self.iterations += 1;
            if flip.is_finite() && flip <= theta {
                let step = dir * flip;
                self.x[q] += step;
                for p in 0..self.m {
                    self.x[self.head[p]] -= step * alpha[p];
                }
                self.pos[q] = if dir > 0.0 {
                    VarPos::AtUpper
                } else {
                    VarPos::AtLower
                };
                self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                self.note_step(flip);
                continue;
            }
            let Some((p, rate)) = best else {
                return Outcome::Unbounded;
            };
            let step = dir * theta;
            self.x[q] += step;
            for r in 0..self.m {
                self.x[self.head[r]] -= step * alpha[r];
            }
            let leaving = self.head[p];
            if rate < 0.0 {
                self.x[leaving] = self.lo[leaving];
                self.pos[leaving] = VarPos::AtLower;
            } else {
                self.x[leaving] = self.hi[leaving];
                self.pos[leaving] = VarPos::AtUpper;
            }
            self.pivot(p, q, &alpha);
            self.note_step(theta);
            self.pivots_since_refactor += 1;
            if self.pivots_since_refactor >= REFACTOR_EVERY {
                self.refactor();
            }
        }
    }

    fn note_step(&mut self, theta: f64) {
        if theta <= DEGENERATE_STEP {
            self.degenerate_run += 1;
            if self.degenerate_run >= DEGENERACY_TRIGGER {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
        }
    }

    fn price(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.cols.len() {
            let dir = match self.pos[j] {
                VarPos::Basic(_) => continue,
                _ if self.lo[j] == self.hi[j] => continue,
                VarPos::AtLower => {
                    let d = self.reduced_cost(j);
                    if d < -DJ_TOL {
                        (1.0, -d)
                    } else {
                        continue;
                    }
                }
                VarPos::AtUpper => {
                    let d = self.reduced_cost(j);
                    if d > DJ_TOL {
                        (-1.0, d)
                    } else {
                        continue;
                    }
                }
                VarPos::Free => {
                    let d = self.reduced_cost(j);
                    if d.abs() > DJ_TOL {
                        (-d.signum(), d.abs())
                    } else {
                        continue;
                    }
                }
            };
            if self.bland {
                return Some((j, dir.0));
            }
            if best.is_none_or(|(_, _, s)| dir.1 > s) {
                best = Some((j, dir.0, dir.1));
            }
        }
        best.map(|(j, d, _)| (j, d))
    }

    fn pivot(&mut self, p: usize, q: usize, alpha: &[f64]) {
        let m = self.m;
        let piv = alpha[p];
        for i in 0..m {
            self.binv[p * m + i] /= piv;
        }
        let prow: Vec<f64> = self.binv[p * m..(p + 1) * m].to_vec();
        for r in 0..m {
            if r == p || alpha[r] == 0.0 {
                continue;
            }
            let f = alpha[r];
            let row = &mut self.binv[r * m..(r + 1) * m];
            for i in 0..m {
                row[i] -= f * prow[i];
            }
        }
        let leaving = self.head[p];
        debug_assert!(!matches!(self.pos[leaving], VarPos::Basic(_)));
        self.head[p] = q;
        self.pos[q] = VarPos::Basic(p);
    }

    /// Recomputes the basis inverse from scratch and the basic values from the
    /// nonbasic ones.
    pub fn refactor(&mut self) {
        self.pivots_since_refactor = 0;
        let m = self.m;
        if m == 0 {
            return;
        }
        let mut b = DMatrix::<f64>::zeros(m, m);
        for (p, &j) in self.head.iter().enumerate() {
            for &(i, a) in &self.cols[j] {
                b[(i, p)] = a;
            }
        }
        if let Some(inv) = b.try_inverse() {
            for p in 0..m {
                for i in 0..m {
                    self.binv[p * m + i] = inv[(p, i)];
                }
            }
        }
        let mut resid = self.rhs.clone();
        for j in 0..self.cols.len() {
            if matches!(self.pos[j], VarPos::Basic(_)) || self.x[j] == 0.0 {
                continue;
            }
            for &(i, a) in &self.cols[j] {
                resid[i] -= a * self.x[j];
            }
        }
        for p in 0..m {
            let row = &self.binv[p * m..(p + 1) * m];
            let v: f64 = row.iter().zip(&resid).map(|(a, b)| a * b).sum();
            self.x[self.head[p]] = v;
        }
    }
}
