//! Command-line front end. Exit status 0 on success, 1 on usage errors and 2
//! when a stage fails on its data.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use super::config::Config;
use super::pipeline::{collect, compute_zips, evaluate, generate, report, train_model, Layout, Manifest};
use crate::cutloop::LabelMode;
use crate::gnn::Checkpoint;
use crate::milp::Family;
use crate::Result;

#[derive(Debug, Parser)]
#[command(name = "cgscreen", about = "CG cut separation with learned constraint screening")]
pub struct Cli {
    /// Base seed for generation and training.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Configuration file with [gen], [split], [separator], [loop], [collect] and [train] sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for instance-level parallelism.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FamilyArg {
    Bp,
    Pm,
    Sc,
    Ss,
    Fl,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Bp => Family::Bp,
            FamilyArg::Pm => Family::Pm,
            FamilyArg::Sc => Family::Sc,
            FamilyArg::Ss => Family::Ss,
            FamilyArg::Fl => Family::Fl,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LabelArg {
    All,
    Tight,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate instances and a manifest with train/val/test splits.
    Gen {
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        density: Option<f64>,
        #[arg(long)]
        edge_prob: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
    },
    /// Compute integer optima for every manifest instance.
    Zip,
    /// Run the full separator and write feature shards and baseline reports.
    Collect {
        #[arg(long, value_enum)]
        labels: Option<LabelArg>,
    },
    /// Train the classifier on the collected shards.
    Train,
    /// Evaluate a checkpoint against the full separator on the test split.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Override the tuned threshold.
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Merge metrics files into one comparison CSV.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = cli.seed {
        cfg.train.seed = s;
    }
    let layout = Layout::new(&cli.out);
    std::fs::create_dir_all(&layout.root)?;
    let manifest = || Manifest::load(&layout.manifest());
    match cli.command {
        Command::Gen {
            family,
            n,
            m,
            p,
            density,
            edge_prob,
            count,
        } => {
            let g = &mut cfg.gen;
            if let Some(f) = family {
                g.family = f.into();
            }
            g.n = n.unwrap_or(g.n);
            g.m = m.unwrap_or(g.m);
            g.p = p.unwrap_or(g.p);
            g.density = density.unwrap_or(g.density);
            g.edge_prob = edge_prob.unwrap_or(g.edge_prob);
            g.count = count.unwrap_or(g.count);
            let man = generate(&layout, &cfg, cli.seed.unwrap_or(0))?;
            println!("{} instances in {}", man.entries.len(), layout.root.display());
        }
        Command::Zip => {
            let t = compute_zips(&layout, &manifest()?, &cfg)?;
            let missing = t.values.values().filter(|z| z.value.is_none()).count();
            println!("{} optima, {missing} unavailable", t.values.len() - missing);
        }
        Command::Collect { labels } => {
            if let Some(l) = labels {
                cfg.collect.label_mode = match l {
                    LabelArg::All => LabelMode::AllCuts,
                    LabelArg::Tight => LabelMode::TightCuts,
                };
            }
            let s = collect(&layout, &manifest()?, &cfg)?;
            println!("samples {:?}, skipped {}", s.samples, s.skipped.len());
        }
        Command::Train => {
            let ck = train_model(&layout, &cfg)?;
            println!(
                "best epoch {} of {}, tau {}, validation F1 {:.4}",
                ck.best_epoch,
                ck.log.len(),
                ck.tau,
                ck.val_f1
            );
        }
        Command::Eval { checkpoint, tau } => {
            let ck = Checkpoint::load(&checkpoint)?;
            let m = evaluate(&layout, &manifest()?, &ck, tau, &cfg)?;
            let a = &m.aggregate;
            println!(
                "{} instances, igc ratio {:?}, time ratio {:?}, size reduction {:.1}%",
                m.instances.len(),
                a.igc_ratio,
                a.time_ratio,
                a.mean_size_reduction_pct
            );
        }
        Command::Report { inputs } => {
            let path = layout.root.join("comparison.csv");
            std::fs::write(&path, report(&inputs)?)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

/// Parses `argv` and runs the requested stage, returning the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let jobs = cli.jobs.unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
