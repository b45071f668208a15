//! Seeded random generators for the five benchmark families.
//!
//! | family | `n` | `m` | other |
//! |---|---|---|---|
//! | bp | items | knapsack rows | |
//! | pm | customers (= candidate medians) | | `p` medians |
//! | sc | sets (columns) | elements (rows) | `density` |
//! | ss | nodes | | `edge_prob` |
//! | fl | customers | facilities | |

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::milp::{normalize, Family, MilpInstance, RawInstance, RawRow, RawSense, RawVar, Sense, VarKind};
use crate::{Error, Result};

const MAX_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub family: Family,
    pub n: usize,
    #[serde(default)]
    pub m: usize,
    #[serde(default)]
    pub p: usize,
    #[serde(default = "default_density")]
    pub density: f64,
    #[serde(default = "default_edge_prob")]
    pub edge_prob: f64,
    pub seed: u64,
}

fn default_density() -> f64 {
    0.2
}

fn default_edge_prob() -> f64 {
    0.25
}

impl GenSpec {
    fn base(family: Family, n: usize, m: usize, seed: u64) -> Self {
        GenSpec {
            family,
            n,
            m,
            p: 0,
            density: default_density(),
            edge_prob: default_edge_prob(),
            seed,
        }
    }

    pub fn bp(n: usize, m: usize, seed: u64) -> Self {
        Self::base(Family::Bp, n, m, seed)
    }

    pub fn pm(customers: usize, p: usize, seed: u64) -> Self {
        GenSpec {
            p,
            ..Self::base(Family::Pm, customers, 0, seed)
        }
    }

    pub fn sc(elements: usize, sets: usize, density: f64, seed: u64) -> Self {
        GenSpec {
            density,
            ..Self::base(Family::Sc, sets, elements, seed)
        }
    }

    pub fn ss(nodes: usize, edge_prob: f64, seed: u64) -> Self {
        GenSpec {
            edge_prob,
            ..Self::base(Family::Ss, nodes, 0, seed)
        }
    }

    pub fn fl(customers: usize, facilities: usize, seed: u64) -> Self {
        Self::base(Family::Fl, customers, facilities, seed)
    }

    /// Sizes small enough for the enumeration oracles (at most 12 integer variables).
    pub fn tiny(family: Family, seed: u64) -> Self {
        match family {
            Family::Bp | Family::Other => Self::bp(10, 5, seed),
            Family::Pm => Self::pm(3, 2, seed),
            Family::Sc => Self::sc(8, 10, 0.3, seed),
            Family::Ss => Self::ss(10, 0.3, seed),
            Family::Fl => Self::fl(4, 4, seed),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::GenSpec(format!("{msg}: {self:?}")));
        if self.n == 0 {
            return bad("n must be at least 1");
        }
        match self.family {
            Family::Bp | Family::Sc | Family::Fl if self.m == 0 => bad("m must be at least 1"),
            Family::Pm if self.p == 0 || self.p > self.n => bad("p must lie in 1..=n"),
            Family::Sc if !(self.density > 0.0 && self.density <= 1.0) => bad("density outside (0,1]"),
            Family::Ss if !(self.edge_prob > 0.0 && self.edge_prob <= 1.0) => bad("edge_prob outside (0,1]"),
            Family::Other => bad("no generator for family other"),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> String {
        match self.family {
            Family::Pm => format!("pm-n{}-p{}-s{}", self.n, self.p, self.seed),
            Family::Ss => format!("ss-n{}-s{}", self.n, self.seed),
            f => format!("{f}-n{}-m{}-s{}", self.n, self.m, self.seed),
        }
    }
}

/// Generator output before canonicalization.
pub fn gen_raw(spec: &GenSpec) -> Result<RawInstance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (sense, vars, rows) = match spec.family {
        Family::Bp => binary_packing(spec, &mut rng),
        Family::Pm => p_median(spec, &mut rng)?,
        Family::Sc => set_cover(spec, &mut rng),
        Family::Ss => stable_set(spec, &mut rng),
        Family::Fl => facility_location(spec, &mut rng),
        Family::Other => unreachable!("rejected by validate"),
    };
    Ok(RawInstance {
        name: spec.name(),
        family: spec.family,
        sense,
        vars,
        rows,
    })
}

pub fn gen_instance(spec: &GenSpec) -> Result<MilpInstance> {
    Ok(normalize(&gen_raw(spec)?)?.instance)
}

type Parts = (Sense, Vec<RawVar>, Vec<RawRow>);

fn binary_packing(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Parts {
    let n = spec.n;
    let vars = (0..n).map(|_| RawVar::binary(rng.gen_range(1..=10) as f64)).collect();
    let nn = n as i64;
    let rows = (0..spec.m)
        .map(|_| {
            let coefs = (0..n).map(|j| (j, rng.gen_range(5..=30) as f64)).collect();
            let b = rng.gen_range(10 * nn..=20 * nn) as f64;
            RawRow::new(coefs, RawSense::Le, b)
        })
        .collect();
    (Sense::Maximize, vars, rows)
}

fn points(rng: &mut ChaCha8Rng, k: usize) -> Vec<(f64, f64)> {
    (0..k).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect()
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

fn p_median(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Result<Parts> {
    let (n, p) = (spec.n, spec.p);
    for _ in 0..MAX_RESAMPLES {
        let d: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=10)).collect();
        let total: i64 = d.iter().sum();
        let mean = total as f64 / n as f64;
        let lo = (3 * n).div_ceil(p) as i64;
        let hi = ((6 * n) / p).max(lo as usize) as i64;
        let cap: Vec<f64> = (0..n).map(|_| (rng.gen_range(lo..=hi) as f64 * mean).floor()).collect();
        let pts = points(rng, n);
        // any p open facilities admit a greedy assignment when each capacity
        // exceeds total/p by the largest demand
        let dmax = *d.iter().max().expect("n >= 1") as f64;
        let cmin = cap.iter().cloned().fold(f64::INFINITY, f64::min);
        if (cmin - dmax) * (p as f64) < total as f64 {
            continue;
        }
        // x_ij at i*n + j, y_j at n*n + j
        let x = |i: usize, j: usize| i * n + j;
        let y = |j: usize| n * n + j;
        let mut vars = Vec::with_capacity(n * n + n);
        for i in 0..n {
            for j in 0..n {
                vars.push(RawVar::binary(dist(pts[i], pts[j])));
            }
        }
        vars.extend((0..n).map(|_| RawVar::binary(0.0)));
        let mut rows = Vec::new();
        for i in 0..n {
            rows.push(RawRow::new((0..n).map(|j| (x(i, j), 1.0)).collect(), RawSense::Eq, 1.0));
        }
        rows.push(RawRow::new((0..n).map(|j| (y(j), 1.0)).collect(), RawSense::Eq, p as f64));
        for j in 0..n {
            let mut coefs: Vec<(usize, f64)> = (0..n).map(|i| (x(i, j), d[i] as f64)).collect();
            coefs.push((y(j), -cap[j]));
            rows.push(RawRow::new(coefs, RawSense::Le, 0.0));
        }
        return Ok((Sense::Minimize, vars, rows));
    }
    Err(Error::GenSpec(format!(
        "no feasible capacity draw after {MAX_RESAMPLES} attempts: {spec:?}"
    )))
}

fn set_cover(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Parts {
    let (sets, elems) = (spec.n, spec.m);
    let mut member = vec![vec![false; sets]; elems];
    for j in 0..sets {
        // a set covering nothing is redrawn
        loop {
            for row in member.iter_mut() {
                row[j] = rng.gen_bool(spec.density);
            }
            if member.iter().any(|row| row[j]) {
                break;
            }
        }
    }
    for row in member.iter_mut() {
        if !row.iter().any(|&b| b) {
            let j = rng.gen_range(0..sets);
            row[j] = true;
        }
    }
    let vars = (0..sets).map(|_| RawVar::binary(1.0)).collect();
    let rows = member
        .iter()
        .map(|row| {
            let coefs = (0..sets).filter(|&j| row[j]).map(|j| (j, 1.0)).collect();
            RawRow::new(coefs, RawSense::Ge, 1.0)
        })
        .collect();
    (Sense::Minimize, vars, rows)
}

fn stable_set(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Parts {
    let n = spec.n;
    let vars = (0..n).map(|_| RawVar::binary(rng.gen_range(1..=10) as f64)).collect();
    let mut rows = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(spec.edge_prob) {
                rows.push(RawRow::new(vec![(u, 1.0), (v, 1.0)], RawSense::Le, 1.0));
            }
        }
    }
    (Sense::Maximize, vars, rows)
}

fn facility_location(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Parts {
    let (nc, nf) = (spec.n, spec.m);
    let cust = points(rng, nc);
    let fac = points(rng, nf);
    let demand: Vec<f64> = (0..nc).map(|_| rng.gen_range(5..=35) as f64).collect();
    let raw_cap: Vec<f64> = (0..nf).map(|_| rng.gen_range(10..=160) as f64).collect();
    let fixed: Vec<f64> = raw_cap
        .iter()
        .map(|c| rng.gen_range(100..=110) as f64 * c.sqrt() + rng.gen_range(0..=90) as f64)
        .collect();
    let total_d: f64 = demand.iter().sum();
    let total_c: f64 = raw_cap.iter().sum();
    let cap: Vec<f64> = raw_cap.iter().map(|c| (c * 5.0 * total_d / total_c).floor()).collect();
    // x_ij at i*nf + j, y_j at nc*nf + j
    let x = |i: usize, j: usize| i * nf + j;
    let y = |j: usize| nc * nf + j;
    let mut vars = Vec::with_capacity(nc * nf + nf);
    for i in 0..nc {
        for j in 0..nf {
            let t = dist(cust[i], fac[j]) * 10.0 * demand[i];
            vars.push(RawVar::continuous(0.0, 1.0, t));
        }
    }
    vars.extend(fixed.iter().map(|&f| RawVar::binary(f)));
    let mut rows = Vec::new();
    for i in 0..nc {
        rows.push(RawRow::new((0..nf).map(|j| (x(i, j), 1.0)).collect(), RawSense::Eq, 1.0));
    }
    for j in 0..nf {
        let mut coefs: Vec<(usize, f64)> = (0..nc).map(|i| (x(i, j), demand[i])).collect();
        coefs.push((y(j), -cap[j]));
        rows.push(RawRow::new(coefs, RawSense::Le, 0.0));
    }
    rows.push(RawRow::new((0..nf).map(|j| (y(j), cap[j])).collect(), RawSense::Ge, total_d));
    for i in 0..nc {
        for j in 0..nf {
            rows.push(RawRow::new(vec![(x(i, j), 1.0), (y(j), -1.0)], RawSense::Le, 0.0));
        }
    }
    (Sense::Minimize, vars, rows)
}

/// Deterministically shuffled copy of `items`, used for splits.
pub fn shuffled<T: Clone>(items: &[T], seed: u64) -> Vec<T> {
    let mut out = items.to_vec();
    out.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    out
}

/// Whether a generated instance carries continuous columns.
pub fn is_mixed(inst: &MilpInstance) -> bool {
    inst.kinds.contains(&VarKind::Continuous)
}
