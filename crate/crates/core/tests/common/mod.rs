#![allow(dead_code)]

use cgscreen::cutloop::{run_cutting_plane, CgSeparator, LoopConfig, RoundEvent, RunReport};
use cgscreen::lp::solve_lp;
use cgscreen::milp::{
    check_cut_valid, check_cut_valid_mixed, enumerate_integer_points, enumerate_mixed_slices, MilpInstance,
};
use cgscreen::separators::{gmi_cuts, Cut, SeparatorConfig};

pub const HULL_CAP: u64 = 1 << 14;

/// Validity oracle over the enumerated integer points (or mixed slices).
pub struct Hull<'a> {
    inst: &'a MilpInstance,
    pure: Option<cgscreen::milp::oracle::IntegerHullSample>,
    mixed: Option<cgscreen::milp::oracle::MixedHullSample>,
}

impl<'a> Hull<'a> {
    pub fn new(inst: &'a MilpInstance) -> Self {
        let mixed_model = (0..inst.num_vars()).any(|j| !inst.is_integer(j));
        if mixed_model {
            Hull {
                inst,
                pure: None,
                mixed: Some(enumerate_mixed_slices(inst, HULL_CAP).unwrap()),
            }
        } else {
            Hull {
                inst,
                pure: Some(enumerate_integer_points(inst, HULL_CAP).unwrap()),
                mixed: None,
            }
        }
    }

    pub fn valid(&self, c: &Cut) -> bool {
        match (&self.pure, &self.mixed) {
            (Some(h), _) => check_cut_valid(self.inst, c, h).unwrap(),
            (_, Some(h)) => check_cut_valid_mixed(self.inst, c, h).unwrap(),
            _ => unreachable!(),
        }
    }

    pub fn z_ip(&self) -> Option<f64> {
        self.pure.as_ref().map(|h| h.z_ip).unwrap_or_else(|| self.mixed.as_ref().unwrap().z_ip)
    }
}

/// One separation round as seen by the loop.
pub struct TracedRound {
    pub round: usize,
    pub x: Vec<f64>,
    pub cuts: Vec<Cut>,
}

pub struct Trace {
    pub report: RunReport,
    pub gmi: Vec<Cut>,
    pub rounds: Vec<TracedRound>,
}

/// Full-separator run recording every cut and the point it was separated from.
pub fn trace_full(inst: &MilpInstance, cfg: &SeparatorConfig) -> Trace {
    let root = solve_lp(inst, &[]).unwrap();
    let gmi = gmi_cuts(inst, &root).unwrap();
    let mut rounds = Vec::new();
    let mut cb = |ev: &RoundEvent| {
        rounds.push(TracedRound {
            round: ev.round,
            x: ev.sol.x.clone(),
            cuts: ev.cuts.to_vec(),
        })
    };
    let mut sep = CgSeparator::full(cfg.clone());
    let report = run_cutting_plane(inst, &mut sep, &LoopConfig::default(), Some(&mut cb)).unwrap();
    Trace { report, gmi, rounds }
}
