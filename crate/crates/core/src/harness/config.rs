//! Experiment configuration read from a sectioned `key = value` file.
//!
//! ```text
//! [gen]
//! family = "bp"
//! n = 10
//! m = 5
//! count = 40
//!
//! [separator]
//! effort = { kind = "nodes", initial = 200, total = 2400 }
//!
//! [train]
//! learning_rate = 0.01
//! ```
//!
//! Every key is optional; unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cutloop::{LabelMode, LoopConfig};
use crate::gnn::TrainConfig;
use crate::instgen::GenSpec;
use crate::milp::Family;
use crate::separators::SeparatorConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenSection {
    pub family: Family,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub density: f64,
    pub edge_prob: f64,
    pub count: usize,
}

impl Default for GenSection {
    fn default() -> Self {
        let t = GenSpec::tiny(Family::Bp, 0);
        GenSection {
            family: Family::Bp,
            n: t.n,
            m: t.m,
            p: t.p,
            density: t.density,
            edge_prob: t.edge_prob,
            count: 40,
        }
    }
}

impl GenSection {
    /// Spec of the `k`-th instance under a base seed.
    pub fn spec(&self, base_seed: u64, k: usize) -> GenSpec {
        GenSpec {
            family: self.family,
            n: self.n,
            m: self.m,
            p: self.p,
            density: self.density,
            edge_prob: self.edge_prob,
            seed: base_seed.wrapping_mul(1_000_003).wrapping_add(k as u64),
        }
    }
}

/// Relative train/validation/test proportions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSection {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection {
            train: 100,
            val: 50,
            test: 50,
        }
    }
}

impl SplitSection {
    /// Instance counts for `total` instances, rounding in favour of training.
    pub fn counts(&self, total: usize) -> (usize, usize, usize) {
        let sum = (self.train + self.val + self.test).max(1);
        let val = total * self.val / sum;
        let test = total * self.test / sum;
        (total - val - test, val, test)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollectSection {
    pub label_mode: LabelMode,
}

impl Default for CollectSection {
    fn default() -> Self {
        CollectSection {
            label_mode: LabelMode::AllCuts,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub gen: GenSection,
    pub split: SplitSection,
    pub separator: SeparatorConfig,
    #[serde(rename = "loop")]
    pub cutloop: LoopConfig,
    pub collect: CollectSection,
    pub train: TrainConfig,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.separator.validate()?;
        cfg.train.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Whether every budget is a node count, making runs machine-independent.
    pub fn is_deterministic(&self) -> bool {
        self.separator.is_deterministic() && self.cutloop.zip_budget.time_limit_s.is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::separators::EffortLimit;

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = Config::parse(
            "[gen]\nfamily = \"sc\"\ncount = 8\n[separator]\neffort = { kind = \"nodes\", initial = 5, total = 60 }\n[collect]\nlabel_mode = \"tight_cuts\"\n",
        )
        .unwrap();
        assert_eq!(cfg.gen.family, Family::Sc);
        assert_eq!(cfg.gen.count, 8);
        assert_eq!(cfg.separator.effort, EffortLimit::Nodes { initial: 5, total: 60 });
        assert_eq!(cfg.separator.delta, 0.01);
        assert_eq!(cfg.collect.label_mode, LabelMode::TightCuts);
        assert!(cfg.is_deterministic());
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(matches!(Config::parse("[train]\nlr = 1\n"), Err(Error::Config(_))));
    }

    #[test]
    fn roundtrip() {
        let cfg = Config::default();
        assert_eq!(Config::parse(&cfg.to_text().unwrap()).unwrap(), cfg);
    }

    #[test]
    fn split_counts() {
        assert_eq!(SplitSection::default().counts(200), (100, 50, 50));
        assert_eq!(SplitSection::default().counts(7), (5, 1, 1));
    }
}
