//! Pure cutting-plane loop: a GMI warm-start round followed by repeated CG
//! separation, with gap-closure tracking, tight-cut detection and labels.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bnb::{compute_zip, ZipBudget};
use crate::lp::{solve_lp, LpBasisSolution};
use crate::milp::MilpInstance;
use crate::separators::{gmi_cuts, run_cgmip, Cut, SeparatorConfig};
use crate::{Error, Result};

pub const REPORT_SCHEMA: &str = "cgscreen.run/1";
const INT_TOL: f64 = 1e-6;
const TIGHT_TOL: f64 = 1e-6;
const U_SUPPORT: f64 = 1e-9;

/// Integrality gap closed, in percent and unclamped.
pub fn igc(z0: f64, zt: f64, zip: f64) -> Result<f64> {
    let gap = zip - z0;
    if gap.abs() <= 1e-9 * zip.abs().max(1.0) {
        return Err(Error::GapZero);
    }
    Ok(100.0 * (zt - z0) / gap)
}

pub fn clamp_igc(v: f64) -> f64 {
    v.clamp(0.0, 100.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopConfig {
    pub max_rounds: usize,
    pub stagnation_rounds: usize,
    pub stagnation_eps: f64,
    pub gmi_warm_start: bool,
    pub zip_budget: ZipBudget,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            max_rounds: 100,
            stagnation_rounds: 7,
            stagnation_eps: 0.001,
            gmi_warm_start: true,
            zip_budget: ZipBudget::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Integral,
    MaxRounds,
    Stagnation,
    SeparationFailed,
    GapZero,
    ZipUnavailable,
    LpFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    /// Clamped to `[0, 100]`.
    pub igc: f64,
    pub igc_raw: f64,
    pub cgmip_time_s: f64,
    pub cgmip_nodes: u64,
    pub n_cuts_added: usize,
    pub n_constraints_masked: usize,
    pub tight_cut_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub instance: String,
    pub separator: String,
    pub termination: Termination,
    pub num_rows: usize,
    pub z0: f64,
    pub zip: Option<f64>,
    /// Raw gap closure after round 0 and after every separation round.
    pub igc_history: Vec<f64>,
    pub rounds: Vec<RoundRecord>,
    pub final_igc: f64,
    pub total_cgmip_time_s: f64,
    pub total_cgmip_nodes: u64,
    pub total_lp_time_s: f64,
    pub n_cuts: usize,
}

impl RunReport {
    /// Separation rounds performed, not counting the warm start.
    /// Report of a run skipped because the integer optimum is unknown.
    pub fn unavailable(inst: &MilpInstance, separator: &str) -> Self {
        report(inst, separator, Termination::ZipUnavailable)
    }

    pub fn num_rounds(&self) -> usize {
        self.rounds.iter().filter(|r| r.round > 0).count()
    }

    /// Mean share of rows excluded from the separator, in percent.
    pub fn size_reduction_pct(&self) -> f64 {
        let sep: Vec<&RoundRecord> = self.rounds.iter().filter(|r| r.round > 0).collect();
        if sep.is_empty() || self.num_rows == 0 {
            return 0.0;
        }
        let total: f64 = sep
            .iter()
            .map(|r| 100.0 * r.n_constraints_masked as f64 / self.num_rows as f64)
            .sum();
        total / sep.len() as f64
    }
}

/// One separation call's result.
#[derive(Debug, Clone, Default)]
pub struct SeparationOutcome {
    pub cuts: Vec<Cut>,
    pub time_s: f64,
    pub nodes: u64,
    /// Rows offered to the separator.
    pub mask: Vec<bool>,
}

pub trait Separator {
    fn name(&self) -> &str;

    /// `sol` is the relaxation with all cuts so far; its first `inst.num_cons()`
    /// rows are the canonical rows.
    fn separate(&mut self, inst: &MilpInstance, sol: &LpBasisSolution, round: usize) -> Result<SeparationOutcome>;
}

/// Chooses the rows the CG-MIP may aggregate.
pub trait MaskPolicy {
    fn name(&self) -> &str;
    fn mask(&mut self, inst: &MilpInstance, sol: &LpBasisSolution) -> Result<Vec<bool>>;

    /// Row scores behind the last mask, used to rank rows when the mask is empty.
    fn scores(&self) -> Option<&[f64]> {
        None
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AllRows;

impl MaskPolicy for AllRows {
    fn name(&self) -> &str {
        "full"
    }

    fn mask(&mut self, inst: &MilpInstance, _sol: &LpBasisSolution) -> Result<Vec<bool>> {
        Ok(vec![true; inst.num_cons()])
    }
}

/// Fixed mask, e.g. ground-truth labels.
#[derive(Debug, Clone)]
pub struct FixedMask(pub Vec<bool>);

impl MaskPolicy for FixedMask {
    fn name(&self) -> &str {
        "fixed"
    }

    fn mask(&mut self, _inst: &MilpInstance, _sol: &LpBasisSolution) -> Result<Vec<bool>> {
        Ok(self.0.clone())
    }
}

/// CG-MIP separator over the rows a [`MaskPolicy`] selects.
#[derive(Debug, Clone)]
pub struct CgSeparator<P> {
    pub policy: P,
    pub cfg: SeparatorConfig,
}

impl CgSeparator<AllRows> {
    pub fn full(cfg: SeparatorConfig) -> Self {
        CgSeparator { policy: AllRows, cfg }
    }
}

impl<P: MaskPolicy> Separator for CgSeparator<P> {
    fn name(&self) -> &str {
        self.policy.name()
    }

    fn separate(&mut self, inst: &MilpInstance, sol: &LpBasisSolution, _round: usize) -> Result<SeparationOutcome> {
        let mut mask = self.policy.mask(inst, sol)?;
        if !mask.iter().any(|&b| b) {
            if let Some(scores) = self.policy.scores() {
                mask = top_k_mask(scores);
            }
        }
        let run = run_cgmip(inst, &sol.x, &mask, &self.cfg)?;
        Ok(SeparationOutcome {
            cuts: run.cuts,
            time_s: run.time_s,
            nodes: run.nodes,
            mask,
        })
    }
}

/// Round `k = max(1, ceil(0.05 m))` highest-scoring rows, ties by index.
pub fn top_k_mask(scores: &[f64]) -> Vec<bool> {
    let m = scores.len();
    let k = ((0.05 * m as f64).ceil() as usize).max(1).min(m);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut mask = vec![false; m];
    for &i in order.iter().take(k) {
        mask[i] = true;
    }
    mask
}

pub fn detect_tight_cuts(cuts: &[Cut], x_next: &[f64]) -> Vec<bool> {
    cuts.iter()
        .map(|c| (c.lhs(x_next) - c.alpha0).abs() <= TIGHT_TOL)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMode {
    AllCuts,
    TightCuts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelVector {
    pub y: Vec<bool>,
    pub mode: LabelMode,
}

impl LabelVector {
    pub fn num_positive(&self) -> usize {
        self.y.iter().filter(|&&b| b).count()
    }
}

/// `y_i = 1` iff some (tight, in tight mode) cut aggregates row `i`.
pub fn make_labels(cuts: &[Cut], tight: &[bool], mode: LabelMode, m: usize) -> LabelVector {
    let mut y = vec![false; m];
    for (k, cut) in cuts.iter().enumerate() {
        if mode == LabelMode::TightCuts && !tight.get(k).copied().unwrap_or(false) {
            continue;
        }
        for &(i, w) in &cut.u {
            if w > U_SUPPORT && i < m {
                y[i] = true;
            }
        }
    }
    LabelVector { y, mode }
}

/// Passed to the round observer after each separation round.
pub struct RoundEvent<'a> {
    pub round: usize,
    pub inst: &'a MilpInstance,
    /// Relaxation that was separated.
    pub sol: &'a LpBasisSolution,
    /// Cuts added this round, tight flags set against the next relaxation.
    pub cuts: &'a [Cut],
    pub mask: &'a [bool],
}

fn report(inst: &MilpInstance, sep: &str, termination: Termination) -> RunReport {
    RunReport {
        schema: REPORT_SCHEMA.into(),
        instance: inst.name.clone(),
        separator: sep.into(),
        termination,
        num_rows: inst.num_cons(),
        z0: 0.0,
        zip: None,
        igc_history: Vec::new(),
        rounds: Vec::new(),
        final_igc: 0.0,
        total_cgmip_time_s: 0.0,
        total_cgmip_nodes: 0,
        total_lp_time_s: 0.0,
        n_cuts: 0,
    }
}

/// Runs the loop with `zip` computed here under `cfg.zip_budget`.
pub fn run_cutting_plane(
    inst: &MilpInstance,
    sep: &mut dyn Separator,
    cfg: &LoopConfig,
    on_round: Option<&mut dyn FnMut(&RoundEvent)>,
) -> Result<RunReport> {
    match compute_zip(inst, &cfg.zip_budget) {
        Ok(zip) => run_cutting_plane_with_zip(inst, zip, sep, cfg, on_round),
        Err(Error::ZipUnavailable(reason)) => {
            log::warn!("{}: {reason}", inst.name);
            Ok(report(inst, sep.name(), Termination::ZipUnavailable))
        }
        Err(e) => Err(e),
    }
}

/// Runs the loop against a known integer optimum.
pub fn run_cutting_plane_with_zip(
    inst: &MilpInstance,
    zip: f64,
    sep: &mut dyn Separator,
    cfg: &LoopConfig,
    mut on_round: Option<&mut dyn FnMut(&RoundEvent)>,
) -> Result<RunReport> {
    let mut rep = report(inst, sep.name(), Termination::MaxRounds);
    rep.zip = Some(zip);
    let lp_clock = Instant::now();
    let mut sol = solve_lp(inst, &[])?;
    let mut lp_time = lp_clock.elapsed().as_secs_f64();
    if !sol.is_optimal() {
        rep.termination = Termination::LpFailure;
        return Ok(rep);
    }
    let z0 = sol.obj;
    rep.z0 = z0;
    let integral = |s: &LpBasisSolution| s.is_integral(inst, INT_TOL);
    if integral(&sol) || igc(z0, z0, zip).is_err() {
        rep.termination = if integral(&sol) {
            Termination::Integral
        } else {
            Termination::GapZero
        };
        rep.igc_history = vec![100.0];
        rep.final_igc = 100.0;
        rep.rounds.push(RoundRecord {
            round: 0,
            igc: 100.0,
            igc_raw: 100.0,
            cgmip_time_s: 0.0,
            cgmip_nodes: 0,
            n_cuts_added: 0,
            n_constraints_masked: 0,
            tight_cut_indices: Vec::new(),
        });
        return Ok(rep);
    }
    let gap = |z: f64| igc(z0, z, zip).expect("nonzero gap checked above");

    let mut cuts: Vec<Cut> = Vec::new();
    let mut n_warm = 0;
    if cfg.gmi_warm_start {
        cuts = gmi_cuts(inst, &sol)?;
        n_warm = cuts.len();
        if !cuts.is_empty() {
            let t = Instant::now();
            sol = solve_lp(inst, &cuts)?;
            lp_time += t.elapsed().as_secs_f64();
            if !sol.is_optimal() {
                rep.termination = Termination::LpFailure;
                rep.total_lp_time_s = lp_time;
                return Ok(rep);
            }
        }
    }
    let g0 = gap(sol.obj);
    rep.igc_history.push(g0);
    rep.rounds.push(RoundRecord {
        round: 0,
        igc: clamp_igc(g0),
        igc_raw: g0,
        cgmip_time_s: 0.0,
        cgmip_nodes: 0,
        n_cuts_added: n_warm,
        n_constraints_masked: 0,
        tight_cut_indices: Vec::new(),
    });

    let mut termination = Termination::MaxRounds;
    for t in 1..=cfg.max_rounds {
        if integral(&sol) {
            termination = Termination::Integral;
            break;
        }
        let out = sep.separate(inst, &sol, t)?;
        rep.total_cgmip_time_s += out.time_s;
        rep.total_cgmip_nodes += out.nodes;
        if out.cuts.is_empty() {
            termination = Termination::SeparationFailed;
            break;
        }
        let mut new_cuts = out.cuts;
        for c in new_cuts.iter_mut() {
            c.round = t;
        }
        let mut all = cuts.clone();
        all.extend(new_cuts.iter().cloned());
        let clock = Instant::now();
        let next = solve_lp(inst, &all)?;
        lp_time += clock.elapsed().as_secs_f64();
        if !next.is_optimal() {
            termination = Termination::LpFailure;
            break;
        }
        let tight = detect_tight_cuts(&new_cuts, &next.x);
        for (c, &f) in new_cuts.iter_mut().zip(&tight) {
            c.tight = f;
        }
        let g = gap(next.obj);
        rep.igc_history.push(g);
        rep.rounds.push(RoundRecord {
            round: t,
            igc: clamp_igc(g),
            igc_raw: g,
            cgmip_time_s: out.time_s,
            cgmip_nodes: out.nodes,
            n_cuts_added: new_cuts.len(),
            n_constraints_masked: out.mask.iter().filter(|&&b| !b).count(),
            tight_cut_indices: (0..tight.len()).filter(|&k| tight[k]).collect(),
        });
        if let Some(cb) = on_round.as_mut() {
            cb(&RoundEvent {
                round: t,
                inst,
                sol: &sol,
                cuts: &new_cuts,
                mask: &out.mask,
            });
        }
        cuts.extend(new_cuts);
        sol = next;
        let w = cfg.stagnation_rounds;
        if w > 0 && t >= w {
            let h = &rep.igc_history;
            let before = h[..=t - w].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if h[t] - before < cfg.stagnation_eps {
                termination = Termination::Stagnation;
                break;
            }
        }
    }
    if termination == Termination::MaxRounds && integral(&sol) {
        termination = Termination::Integral;
    }
    let last = *rep.igc_history.last().expect("round 0 recorded");
    rep.final_igc = if termination == Termination::Integral && (last - 100.0).abs() <= 1e-6 {
        100.0
    } else {
        clamp_igc(last)
    };
    rep.termination = termination;
    rep.total_lp_time_s = lp_time;
    rep.n_cuts = cuts.len();
    Ok(rep)
}
