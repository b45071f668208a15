//! Constraint classifier on the variable-constraint graph and its training.

mod model;
mod train;

pub use model::{forward, gradients, logits, loss_and_grad, loss_wbce, BlockSpec, Dropout, GnnParams, GnnShape};
pub use train::{
    best_threshold, class_weights, evaluate_f1, f1_score, predict_mask, train, tune_threshold, Checkpoint, EpochLog,
    TrainConfig, CHECKPOINT_SCHEMA,
};

use crate::cutloop::MaskPolicy;
use crate::features::build_vcg;
use crate::lp::LpBasisSolution;
use crate::milp::MilpInstance;
use crate::{Error, Result};

/// Masks rows with a trained classifier. Scores of the last call are kept for
/// the empty-mask fallback.
#[derive(Debug, Clone)]
pub struct GnnPolicy {
    pub checkpoint: Checkpoint,
    /// Overrides the checkpoint threshold when set.
    pub tau: Option<f64>,
    last_scores: Vec<f64>,
}

impl GnnPolicy {
    pub fn new(checkpoint: Checkpoint) -> Self {
        GnnPolicy {
            checkpoint,
            tau: None,
            last_scores: Vec::new(),
        }
    }

    pub fn with_tau(checkpoint: Checkpoint, tau: f64) -> Self {
        GnnPolicy {
            tau: Some(tau),
            ..Self::new(checkpoint)
        }
    }
}

impl MaskPolicy for GnnPolicy {
    fn name(&self) -> &str {
        "gnn"
    }

    fn mask(&mut self, inst: &MilpInstance, sol: &LpBasisSolution) -> Result<Vec<bool>> {
        let sample = build_vcg(inst, sol, 0, None)?;
        let yhat = self.checkpoint.predict(&sample)?;
        let tau = self.tau.unwrap_or(self.checkpoint.tau);
        if !(0.0..1.0).contains(&tau) {
            return Err(Error::Threshold(format!("tau {tau} outside [0, 1)")));
        }
        let mask = yhat.iter().map(|&p| p >= tau).collect();
        self.last_scores = yhat;
        Ok(mask)
    }

    fn scores(&self) -> Option<&[f64]> {
        Some(&self.last_scores)
    }
}
