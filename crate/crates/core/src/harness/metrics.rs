//! Shifted geometric means, win/loss tallies and the paired evaluation summary.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cutloop::{RunReport, Termination};
use crate::{Error, Result};

pub const METRICS_SCHEMA: &str = "cgscreen.metrics/1";
pub const IGC_SHIFT: f64 = 0.5;
pub const TIME_SHIFT: f64 = 5.0;

/// `(prod (v_i + shift))^(1/n) - shift`, computed in the log domain.
pub fn sgm(values: &[f64], shift: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Metrics("shifted geometric mean of an empty list".into()));
    }
    let mut acc = 0.0;
    for &v in values {
        let s = v + shift;
        if !(s > 0.0) {
            return Err(Error::Metrics(format!("value {v} with shift {shift} is not positive")));
        }
        acc += s.ln();
    }
    Ok((acc / values.len() as f64).exp() - shift)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Win,
    Loss,
    Tie,
}

/// Time win at 10% faster, loss at 10% slower.
pub fn time_outcome(reduced: f64, full: f64) -> Outcome {
    if reduced <= 0.9 * full {
        Outcome::Win
    } else if reduced >= 1.1 * full {
        Outcome::Loss
    } else {
        Outcome::Tie
    }
}

/// IGC win or loss by at least one point.
pub fn igc_outcome(reduced: f64, full: f64) -> Outcome {
    if reduced >= full + 1.0 {
        Outcome::Win
    } else if reduced <= full - 1.0 {
        Outcome::Loss
    } else {
        Outcome::Tie
    }
}

/// Absolute win: faster without losing IGC. Absolute loss: slower and worse.
pub fn absolute_outcome(time: Outcome, igc: Outcome) -> Option<Outcome> {
    match (time, igc) {
        (Outcome::Win, Outcome::Win | Outcome::Tie) => Some(Outcome::Win),
        (Outcome::Loss, Outcome::Loss) => Some(Outcome::Loss),
        _ => None,
    }
}

/// Cost and quality of one run of one separator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunScore {
    pub cost: f64,
    pub igc: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
}

impl Tally {
    fn add(&mut self, o: Outcome) {
        match o {
            Outcome::Win => self.wins += 1,
            Outcome::Loss => self.losses += 1,
            Outcome::Tie => self.ties += 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinLoss {
    pub time: Tally,
    pub igc: Tally,
    pub absolute_wins: usize,
    pub absolute_losses: usize,
}

/// Tallies over instances present in both maps; an unpaired instance is an error.
pub fn winloss(reduced: &BTreeMap<String, RunScore>, full: &BTreeMap<String, RunScore>) -> Result<WinLoss> {
    if let Some(k) = reduced.keys().find(|k| !full.contains_key(*k)).or(full.keys().find(|k| !reduced.contains_key(*k)))
    {
        return Err(Error::Metrics(format!("instance {k} is not paired")));
    }
    let mut w = WinLoss::default();
    for (k, r) in reduced {
        let f = &full[k];
        let t = time_outcome(r.cost, f.cost);
        let g = igc_outcome(r.igc, f.igc);
        w.time.add(t);
        w.igc.add(g);
        match absolute_outcome(t, g) {
            Some(Outcome::Win) => w.absolute_wins += 1,
            Some(Outcome::Loss) => w.absolute_losses += 1,
            _ => {}
        }
    }
    Ok(w)
}

/// What the time columns measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostUnit {
    /// Cumulative CG-MIP seconds.
    Seconds,
    /// Cumulative CG-MIP branch-and-bound nodes, for reproducible runs.
    Nodes,
}

impl CostUnit {
    pub fn of(self, r: &RunReport) -> f64 {
        match self {
            CostUnit::Seconds => r.total_cgmip_time_s,
            CostUnit::Nodes => r.total_cgmip_nodes as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMetrics {
    pub instance: String,
    pub final_igc_reduced: f64,
    pub final_igc_full: f64,
    pub time_reduced: f64,
    pub time_full: f64,
    pub rounds_reduced: usize,
    pub rounds_full: usize,
    pub size_reduction_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub sgm_igc_reduced: f64,
    pub sgm_igc_full: f64,
    pub sgm_time_reduced: f64,
    pub sgm_time_full: f64,
    /// `None` when the full separator's mean is zero.
    pub igc_ratio: Option<f64>,
    pub time_ratio: Option<f64>,
    pub mean_size_reduction_pct: f64,
    pub winloss: WinLoss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub schema: String,
    pub separator: String,
    pub cost_unit: CostUnit,
    pub instances: Vec<InstanceMetrics>,
    /// Instances left out because one of the runs has no defined IGC.
    pub excluded: Vec<String>,
    pub aggregate: Aggregate,
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    if b != 0.0 {
        Some(a / b)
    } else if a == 0.0 {
        Some(1.0)
    } else {
        None
    }
}

fn scored(r: &RunReport) -> bool {
    !matches!(r.termination, Termination::ZipUnavailable | Termination::GapZero | Termination::LpFailure)
}

/// Pairs runs by instance name and summarizes them.
pub fn compute_metrics(reduced: &[RunReport], full: &[RunReport], unit: CostUnit) -> Result<EvalMetrics> {
    let by_name = |runs: &[RunReport]| -> Result<BTreeMap<String, RunReport>> {
        let mut map = BTreeMap::new();
        for r in runs {
            if map.insert(r.instance.clone(), r.clone()).is_some() {
                return Err(Error::Metrics(format!("instance {} appears twice", r.instance)));
            }
        }
        Ok(map)
    };
    let red = by_name(reduced)?;
    let ful = by_name(full)?;
    if let Some(k) = red.keys().find(|k| !ful.contains_key(*k)).or(ful.keys().find(|k| !red.contains_key(*k))) {
        return Err(Error::Metrics(format!("instance {k} is not paired")));
    }
    let mut instances = Vec::new();
    let mut excluded = Vec::new();
    let mut red_scores = BTreeMap::new();
    let mut full_scores = BTreeMap::new();
    for (name, r) in &red {
        let f = &ful[name];
        if !scored(r) || !scored(f) {
            excluded.push(name.clone());
            continue;
        }
        red_scores.insert(name.clone(), RunScore { cost: unit.of(r), igc: r.final_igc });
        full_scores.insert(name.clone(), RunScore { cost: unit.of(f), igc: f.final_igc });
        instances.push(InstanceMetrics {
            instance: name.clone(),
            final_igc_reduced: r.final_igc,
            final_igc_full: f.final_igc,
            time_reduced: unit.of(r),
            time_full: unit.of(f),
            rounds_reduced: r.num_rounds(),
            rounds_full: f.num_rounds(),
            size_reduction_pct: r.size_reduction_pct(),
        });
    }
    if instances.is_empty() {
        return Err(Error::Metrics("no instance with a defined IGC on both sides".into()));
    }
    let col = |f: fn(&InstanceMetrics) -> f64| instances.iter().map(f).collect::<Vec<f64>>();
    let sgm_igc_reduced = sgm(&col(|i| i.final_igc_reduced), IGC_SHIFT)?;
    let sgm_igc_full = sgm(&col(|i| i.final_igc_full), IGC_SHIFT)?;
    let sgm_time_reduced = sgm(&col(|i| i.time_reduced), TIME_SHIFT)?;
    let sgm_time_full = sgm(&col(|i| i.time_full), TIME_SHIFT)?;
    let sizes = col(|i| i.size_reduction_pct);
    let aggregate = Aggregate {
        sgm_igc_reduced,
        sgm_igc_full,
        sgm_time_reduced,
        sgm_time_full,
        igc_ratio: ratio(sgm_igc_reduced, sgm_igc_full),
        time_ratio: ratio(sgm_time_reduced, sgm_time_full),
        mean_size_reduction_pct: sizes.iter().sum::<f64>() / sizes.len() as f64,
        winloss: winloss(&red_scores, &full_scores)?,
    };
    Ok(EvalMetrics {
        schema: METRICS_SCHEMA.into(),
        separator: reduced.first().map(|r| r.separator.clone()).unwrap_or_default(),
        cost_unit: unit,
        instances,
        excluded,
        aggregate,
    })
}

/// Per-round mean and population std of IGC; finished runs carry their last value.
pub fn igc_by_round(runs: &[RunReport]) -> Vec<(usize, f64, f64)> {
    let hist: Vec<&Vec<f64>> = runs.iter().map(|r| &r.igc_history).filter(|h| !h.is_empty()).collect();
    let len = hist.iter().map(|h| h.len()).max().unwrap_or(0);
    (0..len)
        .map(|t| {
            let vals: Vec<f64> = hist.iter().map(|h| h[t.min(h.len() - 1)]).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
            (t, mean, var.sqrt())
        })
        .collect()
}

/// Sorted final IGC values against their percentile rank.
pub fn igc_percentiles(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter().enumerate().map(|(k, &x)| (100.0 * (k + 1) as f64 / n, x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sgm_fixtures() {
        assert!((sgm(&[5.0, 5.0, 5.0], 5.0).unwrap() - 5.0).abs() < 1e-12);
        assert!((sgm(&[1.0, 2.0], 0.5).unwrap() - (3.75f64.sqrt() - 0.5)).abs() < 1e-12);
        assert!(matches!(sgm(&[], 1.0), Err(Error::Metrics(_))));
        assert!(matches!(sgm(&[-1.0], 0.5), Err(Error::Metrics(_))));
    }

    #[test]
    fn outcome_fixtures() {
        assert_eq!(time_outcome(8.0, 10.0), Outcome::Win);
        assert_eq!(igc_outcome(51.0, 50.0), Outcome::Win);
        assert_eq!(absolute_outcome(Outcome::Win, Outcome::Win), Some(Outcome::Win));
        assert_eq!(time_outcome(10.0, 10.0), Outcome::Tie);
        assert_eq!(igc_outcome(50.0, 50.0), Outcome::Tie);
        assert_eq!(absolute_outcome(Outcome::Tie, Outcome::Tie), None);
        assert_eq!(time_outcome(12.0, 10.0), Outcome::Loss);
        assert_eq!(igc_outcome(48.0, 50.0), Outcome::Loss);
        assert_eq!(absolute_outcome(Outcome::Loss, Outcome::Loss), Some(Outcome::Loss));
    }

    #[test]
    fn unpaired_is_error() {
        let mut a = BTreeMap::new();
        a.insert("x".to_string(), RunScore { cost: 1.0, igc: 1.0 });
        assert!(matches!(winloss(&a, &BTreeMap::new()), Err(Error::Metrics(_))));
    }

    #[test]
    fn percentiles_sorted() {
        let p = igc_percentiles(&[30.0, 10.0, 20.0, 40.0]);
        assert_eq!(p, vec![(25.0, 10.0), (50.0, 20.0), (75.0, 30.0), (100.0, 40.0)]);
    }
}
