//! Collect labelled rounds from full-separator runs and train the classifier.
use cgscreen::cutloop::LabelMode;
use cgscreen::features::VcgSample;
use cgscreen::gnn::{evaluate_f1, f1_score, train, TrainConfig};
use cgscreen::harness::{collect_instance, Config};
use cgscreen::instgen::{gen_instance, GenSpec};
use cgscreen::separators::SeparatorConfig;

fn samples(seeds: std::ops::Range<u64>, cfg: &Config) -> cgscreen::Result<Vec<VcgSample>> {
    let mut out = Vec::new();
    for seed in seeds {
        let inst = gen_instance(&GenSpec::bp(10, 5, seed))?;
        let c = collect_instance(&inst, None, cfg)?;
        out.extend(c.rounds.iter().map(|r| r.labelled(LabelMode::AllCuts)));
    }
    Ok(out)
}

fn main() -> cgscreen::Result<()> {
    let cfg = Config {
        separator: SeparatorConfig::deterministic(200),
        ..Config::default()
    };
    let tr = samples(0..40, &cfg)?;
    let va = samples(40..60, &cfg)?;
    println!("{} training and {} validation samples", tr.len(), va.len());
    let ck = train(&tr, &va, &TrainConfig {
        learning_rate: 1e-2,
        ..TrainConfig::default()
    })?;
    println!("stopped after {} epochs, best {}, tau {}", ck.log.len(), ck.best_epoch, ck.tau);
    let truth: Vec<bool> = va.iter().flat_map(|s| s.labels.as_ref().unwrap().y.clone()).collect();
    let baseline = f1_score(&vec![true; truth.len()], &truth);
    println!("validation F1 {:.4} against always-positive {:.4}", evaluate_f1(&ck, &va)?, baseline);
    Ok(())
}
