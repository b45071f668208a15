//! The file-based gen -> zip -> collect -> train -> eval pipeline in a temp dir.
use cgscreen::harness::pipeline::report;
use cgscreen::harness::{collect, compute_zips, evaluate, generate, train_model, Config, Layout};

fn main() -> cgscreen::Result<()> {
    let cfg = Config::parse(
        r#"
[gen]
family = "bp"
count = 40

[split]
train = 2
val = 1
test = 1

[separator]
effort = { kind = "nodes", initial = 200, total = 2400 }

[train]
learning_rate = 0.01
"#,
    )?;
    let dir = tempfile::tempdir()?;
    let layout = Layout::new(dir.path());
    let manifest = generate(&layout, &cfg, 3)?;
    compute_zips(&layout, &manifest, &cfg)?;
    let summary = collect(&layout, &manifest, &cfg)?;
    println!("collected {:?}", summary.samples);
    let ck = train_model(&layout, &cfg)?;
    println!("tau {}, validation F1 {:.3}", ck.tau, ck.val_f1);
    let tuned = evaluate(&layout, &manifest, &ck, None, &cfg)?;
    println!("{}", serde_json::to_string_pretty(&tuned.aggregate)?);
    std::fs::rename(layout.metrics_json(), dir.path().join("tuned.json"))?;
    evaluate(&layout, &manifest, &ck, Some(0.0), &cfg)?;
    std::fs::rename(layout.metrics_json(), dir.path().join("identity.json"))?;
    print!("{}", report(&[dir.path().join("tuned.json"), dir.path().join("identity.json")])?);
    Ok(())
}
