use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{forward, loss_and_grad, loss_wbce, BlockSpec, Dropout, GnnParams, GnnShape};
use crate::features::{feature_hash, feature_stats, standardize, FeatureStats, VcgSample, CONS_WIDTH, VAR_WIDTH};
use crate::{Error, Result};

pub const CHECKPOINT_SCHEMA: &str = "cgscreen.gnn/1";

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const IMPROVE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub dropout_rate: f64,
    pub h: usize,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub plateau_patience: usize,
    pub plateau_factor: f64,
    pub early_stop_patience: usize,
    /// `(w0, w1)`; inverse class frequency over the training labels when unset.
    pub class_weights: Option<(f64, f64)>,
    pub cons_only: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            weight_decay: 1e-5,
            dropout_rate: 0.0,
            h: 16,
            batch_size: 16,
            max_epochs: 700,
            plateau_patience: 20,
            plateau_factor: 0.5,
            early_stop_patience: 60,
            class_weights: None,
            cons_only: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| (1e-5..=1e-1).contains(&v);
        let ok = in_unit(self.learning_rate)
            && in_unit(self.weight_decay)
            && (0.0..=0.5).contains(&self.dropout_rate)
            && (4..=64).contains(&self.h)
            && (16..=128).contains(&self.batch_size)
            && self.max_epochs >= 1
            && self.plateau_factor > 0.0
            && self.plateau_factor < 1.0
            && self.class_weights.is_none_or(|(a, b)| a > 0.0 && b > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("training config out of range: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub learning_rate: f64,
}

/// Trained classifier with everything needed to score raw samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema: String,
    pub feature_hash: String,
    pub config: TrainConfig,
    pub layout: Vec<BlockSpec>,
    pub stats: FeatureStats,
    pub w0: f64,
    pub w1: f64,
    pub tau: f64,
    pub val_f1: f64,
    pub best_epoch: usize,
    pub params: GnnParams,
    pub log: Vec<EpochLog>,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let ck: Checkpoint = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if ck.schema != CHECKPOINT_SCHEMA || ck.feature_hash != feature_hash() {
            return Err(Error::Schema(format!(
                "{}: checkpoint {} / {} does not match this build",
                path.display(),
                ck.schema,
                ck.feature_hash
            )));
        }
        if ck.layout != ck.params.shape.blocks() || ck.params.theta.len() != ck.params.shape.num_params() {
            return Err(Error::Schema(format!("{}: parameter layout mismatch", path.display())));
        }
        Ok(ck)
    }

    /// Probabilities for an unstandardized sample.
    pub fn predict(&self, sample: &VcgSample) -> Result<Vec<f64>> {
        let mut s = sample.clone();
        standardize(&mut s, &self.stats);
        forward(&self.params, &s)
    }

    /// Row mask `yhat >= tau` and the raw probabilities.
    pub fn predict_mask(&self, sample: &VcgSample) -> Result<(Vec<bool>, Vec<f64>)> {
        predict_mask(&self.params, self.tau, sample_standardized(sample, &self.stats))
    }
}

fn sample_standardized(sample: &VcgSample, stats: &FeatureStats) -> VcgSample {
    let mut s = sample.clone();
    standardize(&mut s, stats);
    s
}

/// `tau` must lie in `[0, 1)`; zero keeps every row.
pub fn predict_mask(params: &GnnParams, tau: f64, sample: VcgSample) -> Result<(Vec<bool>, Vec<f64>)> {
    if !(0.0..1.0).contains(&tau) {
        return Err(Error::Threshold(format!("tau {tau} outside [0, 1)")));
    }
    let yhat = forward(params, &sample)?;
    Ok((yhat.iter().map(|&p| p >= tau).collect(), yhat))
}

/// F1 of the positive class; zero when there are no true or predicted positives.
pub fn f1_score(pred: &[bool], truth: &[bool]) -> f64 {
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut fneg = 0usize;
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            _ => {}
        }
    }
    let den = 2 * tp + fp + fneg;
    if den == 0 {
        0.0
    } else {
        2.0 * tp as f64 / den as f64
    }
}

fn labels_of(s: &VcgSample) -> Result<Vec<bool>> {
    s.labels
        .as_ref()
        .map(|l| l.y.clone())
        .filter(|y| y.len() == s.num_cons())
        .ok_or_else(|| Error::Shape(format!("sample {} round {} has no usable labels", s.instance_id, s.round)))
}

/// Picks `tau` from `{0.01, ..., 0.99}` maximizing micro F1 over already
/// standardized samples; ties go to the smallest value.
pub fn tune_threshold(params: &GnnParams, val: &[VcgSample]) -> Result<(f64, f64)> {
    let mut scores = Vec::new();
    let mut truth = Vec::new();
    for s in val {
        scores.extend(forward(params, s)?);
        truth.extend(labels_of(s)?);
    }
    if scores.is_empty() {
        return Err(Error::Threshold("empty validation set".into()));
    }
    Ok(best_threshold(&scores, &truth))
}

pub fn best_threshold(scores: &[f64], truth: &[bool]) -> (f64, f64) {
    let mut best = (0.01, -1.0);
    for k in 1..=99 {
        let tau = k as f64 / 100.0;
        let pred: Vec<bool> = scores.iter().map(|&p| p >= tau).collect();
        let f = f1_score(&pred, truth);
        if f > best.1 {
            best = (tau, f);
        }
    }
    best
}

/// Inverse-frequency weights `w0 = 1`, `w1 = #zeros / #ones`.
pub fn class_weights(samples: &[VcgSample]) -> Result<(f64, f64)> {
    let mut ones = 0usize;
    let mut zeros = 0usize;
    for s in samples {
        for b in labels_of(s)? {
            if b {
                ones += 1
            } else {
                zeros += 1
            }
        }
    }
    if ones == 0 || zeros == 0 {
        return Err(Error::DegenerateLabels(format!("{ones} positive / {zeros} negative rows")));
    }
    Ok((1.0, zeros as f64 / ones as f64))
}

fn mean_loss(p: &GnnParams, samples: &[(VcgSample, Vec<f64>)], w0: f64, w1: f64) -> Result<f64> {
    let mut total = 0.0;
    for (s, y) in samples {
        total += loss_wbce(&forward(p, s)?, y, w0, w1)?;
    }
    Ok(total / samples.len().max(1) as f64)
}

fn prepare(samples: &[VcgSample], stats: &FeatureStats) -> Result<Vec<(VcgSample, Vec<f64>)>> {
    samples
        .iter()
        .map(|s| {
            let y = labels_of(s)?.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
            Ok((sample_standardized(s, stats), y))
        })
        .collect()
}

/// Mini-batch Adam with L2 weight decay, plateau learning-rate decay and early
/// stopping on validation loss. The returned parameters are the best seen.
pub fn train(train_set: &[VcgSample], val_set: &[VcgSample], cfg: &TrainConfig) -> Result<Checkpoint> {
    cfg.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::Shape(format!(
            "{} training / {} validation samples",
            train_set.len(),
            val_set.len()
        )));
    }
    for s in train_set.iter().chain(val_set) {
        if s.cons_feats.cols != CONS_WIDTH || s.var_feats.cols != VAR_WIDTH {
            return Err(Error::Schema(format!("sample {} has foreign feature widths", s.instance_id)));
        }
    }
    let (w0, w1) = match cfg.class_weights {
        Some(w) => {
            class_weights(train_set)?;
            w
        }
        None => class_weights(train_set)?,
    };
    let stats = feature_stats(train_set)?;
    let train_data = prepare(train_set, &stats)?;
    let val_data = prepare(val_set, &stats)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let shape = GnnShape {
        cons_only: cfg.cons_only,
        ..GnnShape::new(CONS_WIDTH, VAR_WIDTH, cfg.h)
    };
    let mut params = GnnParams::init(shape, &mut rng);
    let np = params.theta.len();
    let mut m1 = vec![0.0; np];
    let mut m2 = vec![0.0; np];
    let mut step = 0i32;
    let mut lr = cfg.learning_rate;
    let mut best_val = mean_loss(&params, &val_data, w0, w1)?;
    let mut best_params = params.clone();
    let mut best_epoch = 0;
    let mut since_best = 0;
    let mut plateau = 0;
    let mut log = Vec::new();
    let mut order: Vec<usize> = (0..train_data.len()).collect();
    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut grad = vec![0.0; np];
            for &k in batch {
                let (s, y) = &train_data[k];
                let drop = (cfg.dropout_rate > 0.0).then(|| Dropout {
                    rate: cfg.dropout_rate,
                    rng: &mut rng,
                });
                epoch_loss += loss_and_grad(&params, s, y, w0, w1, drop, &mut grad)?;
            }
            step += 1;
            let scale = 1.0 / batch.len() as f64;
            let c1 = 1.0 - BETA1.powi(step);
            let c2 = 1.0 - BETA2.powi(step);
            for t in 0..np {
                let g = grad[t] * scale + cfg.weight_decay * params.theta[t];
                m1[t] = BETA1 * m1[t] + (1.0 - BETA1) * g;
                m2[t] = BETA2 * m2[t] + (1.0 - BETA2) * g * g;
                params.theta[t] -= lr * (m1[t] / c1) / ((m2[t] / c2).sqrt() + ADAM_EPS);
            }
        }
        let val_loss = mean_loss(&params, &val_data, w0, w1)?;
        log.push(EpochLog {
            epoch,
            train_loss: epoch_loss / train_data.len() as f64,
            val_loss,
            learning_rate: lr,
        });
        if !params.theta.iter().all(|v| v.is_finite()) {
            return Err(Error::Shape(format!("parameters diverged at epoch {epoch}")));
        }
        if val_loss < best_val - IMPROVE_TOL {
            best_val = val_loss;
            best_params = params.clone();
            best_epoch = epoch;
            since_best = 0;
            plateau = 0;
        } else {
            since_best += 1;
            plateau += 1;
            if plateau >= cfg.plateau_patience {
                lr *= cfg.plateau_factor;
                plateau = 0;
            }
            if since_best >= cfg.early_stop_patience {
                break;
            }
        }
    }
    let val_std: Vec<VcgSample> = val_data.into_iter().map(|(s, _)| s).collect();
    let (tau, val_f1) = tune_threshold(&best_params, &val_std)?;
    Ok(Checkpoint {
        schema: CHECKPOINT_SCHEMA.into(),
        feature_hash: feature_hash(),
        config: cfg.clone(),
        layout: best_params.shape.blocks(),
        stats,
        w0,
        w1,
        tau,
        val_f1,
        best_epoch,
        params: best_params,
        log,
    })
}

/// Micro F1 of a checkpoint over raw labelled samples at its own threshold.
pub fn evaluate_f1(ck: &Checkpoint, samples: &[VcgSample]) -> Result<f64> {
    let mut pred = Vec::new();
    let mut truth = Vec::new();
    for s in samples {
        pred.extend(ck.predict_mask(s)?.0);
        truth.extend(labels_of(s)?);
    }
    Ok(f1_score(&pred, &truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutloop::{LabelMode, LabelVector};
    use crate::features::Matrix;
    use rand::Rng;

    /// Constraint feature 0 equals the label; everything else is noise.
    pub(crate) fn toy(n_samples: usize, seed: u64) -> Vec<VcgSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n_samples)
            .map(|k| {
                let m = 6;
                let n = 4;
                let y: Vec<bool> = (0..m).map(|i| i % 3 == 0 || rng.gen_bool(0.2)).collect();
                let mut c = Matrix::zeros(m, CONS_WIDTH);
                for i in 0..m {
                    for j in 1..CONS_WIDTH {
                        *c.row_mut(i).get_mut(j).unwrap() = rng.gen_range(-1.0..1.0);
                    }
                    c.row_mut(i)[0] = if y[i] { 1.0 } else { 0.0 };
                }
                let mut v = Matrix::zeros(n, VAR_WIDTH);
                v.data.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
                let edges = (0..m)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| (i + j) % 2 == 0)
                    .map(|(row, col)| crate::features::Edge { row, col, coef: 0.5 })
                    .collect();
                VcgSample {
                    instance_id: format!("toy{k}"),
                    round: 1,
                    cons_feats: c,
                    var_feats: v,
                    edges,
                    labels: Some(LabelVector { y, mode: LabelMode::AllCuts }),
                }
            })
            .collect()
    }

    #[test]
    fn perfect_scores_pick_smallest_separating_tau() {
        let (tau, f) = best_threshold(&[0.9, 0.1, 0.9, 0.1], &[true, false, true, false]);
        assert_eq!(tau, 0.11);
        assert_eq!(f, 1.0);
        let (tau, f) = best_threshold(&[0.0, 0.0], &[true, false]);
        assert_eq!(f, 0.0);
        assert_eq!(tau, 0.01);
    }

    #[test]
    fn degenerate_labels_rejected() {
        let mut t = toy(3, 1);
        for s in &mut t {
            s.labels.as_mut().unwrap().y.iter_mut().for_each(|b| *b = true);
        }
        assert!(matches!(train(&t, &t, &TrainConfig::default()), Err(Error::DegenerateLabels(_))));
    }

    #[test]
    fn separable_toy_reaches_perfect_f1_and_is_deterministic() {
        let tr = toy(160, 2);
        let va = toy(40, 3);
        let cfg = TrainConfig {
            learning_rate: 1e-2,
            ..TrainConfig::default()
        };
        let a = train(&tr, &va, &cfg).unwrap();
        assert_eq!(evaluate_f1(&a, &va).unwrap(), 1.0);
        let b = train(&tr, &va, &cfg).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert!(a.log[0].train_loss > a.log[a.log.len() - 1].train_loss);
    }

    #[test]
    fn early_stop_when_validation_cannot_improve() {
        let tr = toy(16, 4);
        // validation labels are the complement of the signal the model learns
        let mut va = toy(6, 5);
        for s in &mut va {
            let c = s.cons_feats.clone();
            for (i, y) in s.labels.as_mut().unwrap().y.iter_mut().enumerate() {
                *y = c.get(i, 0) == 0.0;
            }
        }
        let cfg = TrainConfig {
            learning_rate: 1e-2,
            ..TrainConfig::default()
        };
        let ck = train(&tr, &va, &cfg).unwrap();
        assert!(ck.log.len() < cfg.max_epochs);
        assert_eq!(ck.log.len(), ck.best_epoch + cfg.early_stop_patience);
    }

    #[test]
    fn tau_bounds() {
        let p = GnnParams::zeros(GnnShape::new(CONS_WIDTH, VAR_WIDTH, 4));
        let s = toy(1, 6).remove(0);
        assert!(predict_mask(&p, 1.0, s.clone()).is_err());
        let (mask, _) = predict_mask(&p, 0.0, s).unwrap();
        assert!(mask.iter().all(|&b| b));
    }

    #[test]
    fn checkpoint_roundtrip_and_schema_check() {
        let tr = toy(8, 7);
        let cfg = TrainConfig {
            max_epochs: 3,
            h: 4,
            ..TrainConfig::default()
        };
        let ck = train(&tr, &tr, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.json");
        ck.save(&path).unwrap();
        assert_eq!(Checkpoint::load(&path).unwrap(), ck);
        let mut bad = ck.clone();
        bad.feature_hash = "x".into();
        bad.save(&path).unwrap();
        assert!(matches!(Checkpoint::load(&path), Err(Error::Schema(_))));
    }
}
