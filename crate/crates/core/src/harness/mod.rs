//! Experiment pipeline, metrics and the command-line interface.

pub mod cli;
pub mod config;
pub mod metrics;
pub mod pipeline;

pub use config::Config;
pub use metrics::{compute_metrics, sgm, winloss, EvalMetrics};
pub use pipeline::{collect, collect_instance, compute_zips, evaluate, generate, train_model, Layout, Manifest, Split};
