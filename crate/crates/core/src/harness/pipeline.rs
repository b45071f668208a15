//! File-based experiment stages. Every stage reads and writes under one output
//! directory laid out by [`Layout`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::Config;
use super::metrics::{compute_metrics, igc_by_round, igc_percentiles, CostUnit, EvalMetrics};
use crate::bnb::compute_zip;
use crate::cutloop::{
    make_labels, run_cutting_plane, run_cutting_plane_with_zip, CgSeparator, LabelMode, LabelVector, RoundEvent,
    RunReport, Separator, Termination,
};
use crate::features::{build_vcg, read_shard, write_shard, VcgSample};
use crate::gnn::{train, Checkpoint, GnnPolicy};
use crate::instgen::{gen_instance, shuffled, GenSpec};
use crate::milp::{read_instance, write_instance, MilpInstance};
use crate::{Error, Result};

pub const MANIFEST_SCHEMA: &str = "cgscreen.manifest/1";
pub const ZIP_SCHEMA: &str = "cgscreen.zip/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub split: Split,
    /// Relative to the output directory.
    pub path: String,
    pub spec: GenSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub seed: u64,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let m: Manifest = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if m.schema != MANIFEST_SCHEMA {
            return Err(Error::Schema(format!("{}: manifest schema {}", path.display(), m.schema)));
        }
        Ok(m)
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }
}

/// Paths of every artifact under the output directory.
#[derive(Debug, Clone)]
pub struct Layout {
    pub root: PathBuf,
}

impl Layout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Layout { root: root.into() }
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn zip_table(&self) -> PathBuf {
        self.root.join("zip.json")
    }

    pub fn shard(&self, split: Split) -> PathBuf {
        self.root.join("shards").join(format!("{}.jsonl", split.as_str()))
    }

    pub fn run(&self, separator: &str, name: &str) -> PathBuf {
        self.root.join("runs").join(separator).join(format!("{name}.json"))
    }

    pub fn checkpoint(&self) -> PathBuf {
        self.root.join("checkpoint.json")
    }

    pub fn metrics_json(&self) -> PathBuf {
        self.root.join("metrics.json")
    }

    pub fn metrics_csv(&self) -> PathBuf {
        self.root.join("metrics.csv")
    }

    pub fn plot_rounds(&self) -> PathBuf {
        self.root.join("plot_igc_round.tsv")
    }

    pub fn plot_percentiles(&self) -> PathBuf {
        self.root.join("plot_igc_percentile.tsv")
    }

    fn ensure_parent(path: &Path) -> Result<()> {
        if let Some(p) = path.parent() {
            std::fs::create_dir_all(p)?;
        }
        Ok(())
    }

    pub fn load_instance(&self, e: &ManifestEntry) -> Result<MilpInstance> {
        read_instance(&self.root.join(&e.path))
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    Layout::ensure_parent(path)?;
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Generates `cfg.gen.count` instances and assigns them to splits at random.
pub fn generate(layout: &Layout, cfg: &Config, seed: u64) -> Result<Manifest> {
    let count = cfg.gen.count;
    let specs: Vec<GenSpec> = (0..count).map(|k| cfg.gen.spec(seed, k)).collect();
    let (n_train, n_val, _) = cfg.split.counts(count);
    let order = shuffled(&(0..count).collect::<Vec<_>>(), seed);
    let mut split = vec![Split::Test; count];
    for (rank, &k) in order.iter().enumerate() {
        split[k] = if rank < n_train {
            Split::Train
        } else if rank < n_train + n_val {
            Split::Val
        } else {
            Split::Test
        };
    }
    let entries: Vec<ManifestEntry> = specs
        .par_iter()
        .zip(split.par_iter())
        .map(|(spec, &split)| {
            let inst = gen_instance(spec)?;
            let path = format!("instances/{}.json", inst.name);
            let full = layout.root.join(&path);
            Layout::ensure_parent(&full)?;
            write_instance(&inst, &full)?;
            Ok(ManifestEntry {
                name: inst.name,
                split,
                path,
                spec: spec.clone(),
            })
        })
        .collect::<Result<_>>()?;
    let mut entries = entries;
    entries.sort_by(|a, b| a.name.cmp(&b.name));
    let manifest = Manifest {
        schema: MANIFEST_SCHEMA.into(),
        seed,
        entries,
    };
    write_json(&layout.manifest(), &manifest)?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZipEntry {
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZipTable {
    pub schema: String,
    pub values: BTreeMap<String, ZipEntry>,
}

/// Integer optimum of every manifest instance under the configured budget.
pub fn compute_zips(layout: &Layout, manifest: &Manifest, cfg: &Config) -> Result<ZipTable> {
    let rows: Vec<(String, ZipEntry)> = manifest
        .entries
        .par_iter()
        .map(|e| {
            let inst = layout.load_instance(e)?;
            let entry = match compute_zip(&inst, &cfg.cutloop.zip_budget) {
                Ok(v) => ZipEntry { value: Some(v), reason: None },
                Err(Error::ZipUnavailable(r)) => ZipEntry { value: None, reason: Some(r) },
                Err(err) => return Err(err),
            };
            Ok((e.name.clone(), entry))
        })
        .collect::<Result<_>>()?;
    let table = ZipTable {
        schema: ZIP_SCHEMA.into(),
        values: rows.into_iter().collect(),
    };
    write_json(&layout.zip_table(), &table)?;
    Ok(table)
}

fn load_zips(layout: &Layout) -> Result<Option<ZipTable>> {
    let path = layout.zip_table();
    if !path.exists() {
        return Ok(None);
    }
    let t: ZipTable = read_json(&path)?;
    if t.schema != ZIP_SCHEMA {
        return Err(Error::Schema(format!("{}: zip schema {}", path.display(), t.schema)));
    }
    Ok(Some(t))
}

/// One separation round of a full-separator run.
#[derive(Debug, Clone)]
pub struct CollectedRound {
    /// Features of the relaxation that was separated, without labels.
    pub sample: VcgSample,
    pub all: LabelVector,
    pub tight: LabelVector,
}

impl CollectedRound {
    pub fn labelled(&self, mode: LabelMode) -> VcgSample {
        let mut s = self.sample.clone();
        s.labels = Some(match mode {
            LabelMode::AllCuts => self.all.clone(),
            LabelMode::TightCuts => self.tight.clone(),
        });
        s
    }
}

#[derive(Debug, Clone)]
pub struct Collected {
    pub report: RunReport,
    pub rounds: Vec<CollectedRound>,
}

fn run_loop(inst: &MilpInstance, zip: Option<f64>, sep: &mut dyn Separator, cfg: &Config, cb: Option<&mut dyn FnMut(&RoundEvent)>) -> Result<RunReport> {
    match zip {
        Some(z) => run_cutting_plane_with_zip(inst, z, sep, &cfg.cutloop, cb),
        None => run_cutting_plane(inst, sep, &cfg.cutloop, cb),
    }
}

/// Runs the full separator on `inst` and records features and both label kinds
/// for every separation round.
pub fn collect_instance(inst: &MilpInstance, zip: Option<f64>, cfg: &Config) -> Result<Collected> {
    let mut sep = CgSeparator::full(cfg.separator.clone());
    let mut rounds = Vec::new();
    let mut failure = None;
    let mut cb = |ev: &RoundEvent| {
        if failure.is_some() {
            return;
        }
        let m = ev.inst.num_cons();
        let tight: Vec<bool> = ev.cuts.iter().map(|c| c.tight).collect();
        let all = make_labels(ev.cuts, &tight, LabelMode::AllCuts, m);
        let tight = make_labels(ev.cuts, &tight, LabelMode::TightCuts, m);
        match build_vcg(ev.inst, ev.sol, ev.round, None) {
            Ok(sample) => rounds.push(CollectedRound { sample, all, tight }),
            Err(e) => failure = Some(e),
        }
    };
    let report = run_loop(inst, zip, &mut sep, cfg, Some(&mut cb))?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Collected { report, rounds })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CollectSummary {
    pub samples: BTreeMap<String, usize>,
    pub skipped: Vec<String>,
}

/// Runs the full separator over every instance, writes one shard per split
/// and keeps each run report as the evaluation baseline.
pub fn collect(layout: &Layout, manifest: &Manifest, cfg: &Config) -> Result<CollectSummary> {
    let zips = load_zips(layout)?;
    let results: Vec<(ManifestEntry, Collected)> = manifest
        .entries
        .par_iter()
        .map(|e| {
            let inst = layout.load_instance(e)?;
            let known = zips.as_ref().and_then(|t| t.values.get(&e.name)).map(|z| z.value);
            let c = match known {
                Some(None) => Collected {
                    report: RunReport::unavailable(&inst, "full"),
                    rounds: Vec::new(),
                },
                Some(zip) => collect_instance(&inst, zip, cfg)?,
                None => collect_instance(&inst, None, cfg)?,
            };
            write_json(&layout.run("full", &e.name), &c.report)?;
            Ok((e.clone(), c))
        })
        .collect::<Result<_>>()?;
    let mut summary = CollectSummary::default();
    for split in Split::ALL {
        let mut samples = Vec::new();
        for (e, c) in results.iter().filter(|(e, _)| e.split == split) {
            if c.report.termination == Termination::ZipUnavailable {
                log::warn!("{}: skipped, integer optimum unavailable", e.name);
                summary.skipped.push(e.name.clone());
                continue;
            }
            samples.extend(c.rounds.iter().map(|r| r.labelled(cfg.collect.label_mode)));
        }
        let path = layout.shard(split);
        Layout::ensure_parent(&path)?;
        write_shard(&path, &samples)?;
        summary.samples.insert(split.as_str().into(), samples.len());
    }
    Ok(summary)
}

/// Trains on the train shard, tunes the threshold on the validation shard and
/// saves the checkpoint.
pub fn train_model(layout: &Layout, cfg: &Config) -> Result<Checkpoint> {
    let tr = read_shard(&layout.shard(Split::Train))?;
    let va = read_shard(&layout.shard(Split::Val))?;
    let ck = train(&tr, &va, &cfg.train)?;
    ck.save(&layout.checkpoint())?;
    Ok(ck)
}

/// Runs the classifier-screened separator on the test split against the full
/// baseline and writes metrics, per-run reports and plot data.
pub fn evaluate(layout: &Layout, manifest: &Manifest, ck: &Checkpoint, tau: Option<f64>, cfg: &Config) -> Result<EvalMetrics> {
    let zips = load_zips(layout)?;
    let entries: Vec<&ManifestEntry> = manifest.split(Split::Test).collect();
    if entries.is_empty() {
        return Err(Error::Metrics("test split is empty".into()));
    }
    let pairs: Vec<(RunReport, RunReport)> = entries
        .par_iter()
        .map(|e| {
            let inst = layout.load_instance(e)?;
            let base_path = layout.run("full", &e.name);
            let full = if base_path.exists() {
                read_json::<RunReport>(&base_path)?
            } else {
                let zip = zips.as_ref().and_then(|t| t.values.get(&e.name)).and_then(|z| z.value);
                let r = collect_instance(&inst, zip, cfg)?.report;
                write_json(&base_path, &r)?;
                r
            };
            let policy = match tau {
                Some(t) => GnnPolicy::with_tau(ck.clone(), t),
                None => GnnPolicy::new(ck.clone()),
            };
            let mut sep = CgSeparator {
                policy,
                cfg: cfg.separator.clone(),
            };
            let reduced = match full.zip {
                Some(z) => run_cutting_plane_with_zip(&inst, z, &mut sep, &cfg.cutloop, None)?,
                None => RunReport::unavailable(&inst, "gnn"),
            };
            write_json(&layout.run("gnn", &e.name), &reduced)?;
            Ok((reduced, full))
        })
        .collect::<Result<_>>()?;
    let (reduced, full): (Vec<RunReport>, Vec<RunReport>) = pairs.into_iter().unzip();
    let unit = if cfg.is_deterministic() {
        CostUnit::Nodes
    } else {
        CostUnit::Seconds
    };
    let metrics = compute_metrics(&reduced, &full, unit)?;
    write_json(&layout.metrics_json(), &metrics)?;
    std::fs::write(layout.metrics_csv(), metrics_csv(&metrics))?;
    std::fs::write(layout.plot_rounds(), plot_rounds(&[("gnn", &reduced), ("full", &full)]))?;
    let finals = |runs: &[RunReport]| -> Vec<f64> {
        runs.iter()
            .filter(|r| metrics.instances.iter().any(|i| i.instance == r.instance))
            .map(|r| r.final_igc)
            .collect()
    };
    std::fs::write(
        layout.plot_percentiles(),
        plot_percentiles(&[("gnn", finals(&reduced)), ("full", finals(&full))]),
    )?;
    Ok(metrics)
}

pub fn metrics_csv(m: &EvalMetrics) -> String {
    let mut s = String::from(
        "instance,final_igc_reduced,final_igc_full,time_reduced,time_full,rounds_reduced,rounds_full,size_reduction_pct\n",
    );
    for i in &m.instances {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            i.instance,
            i.final_igc_reduced,
            i.final_igc_full,
            i.time_reduced,
            i.time_full,
            i.rounds_reduced,
            i.rounds_full,
            i.size_reduction_pct
        );
    }
    s
}

pub fn plot_rounds(series: &[(&str, &[RunReport])]) -> String {
    let mut s = String::from("separator\tround\tmean_igc\tstd_igc\n");
    for (name, runs) in series {
        for (t, mean, sd) in igc_by_round(runs) {
            let _ = writeln!(s, "{name}\t{t}\t{mean}\t{sd}");
        }
    }
    s
}

pub fn plot_percentiles(series: &[(&str, Vec<f64>)]) -> String {
    let mut s = String::from("separator\tpercentile\tigc\n");
    for (name, vals) in series {
        for (p, v) in igc_percentiles(vals) {
            let _ = writeln!(s, "{name}\t{p}\t{v}");
        }
    }
    s
}

/// Side-by-side aggregates of several metrics files, one column per file.
pub fn report(inputs: &[PathBuf]) -> Result<String> {
    let metrics: Vec<EvalMetrics> = inputs.iter().map(|p| read_json(p)).collect::<Result<_>>()?;
    for (p, m) in inputs.iter().zip(&metrics) {
        if m.schema != super::metrics::METRICS_SCHEMA {
            return Err(Error::Schema(format!("{}: metrics schema {}", p.display(), m.schema)));
        }
    }
    let mut s = String::from("metric");
    for p in inputs {
        let stem = p.file_stem().and_then(|x| x.to_str()).unwrap_or("metrics");
        let _ = write!(s, ",{stem}");
    }
    s.push('\n');
    let rows: [(&str, fn(&EvalMetrics) -> String); 13] = [
        ("instances", |m| m.instances.len().to_string()),
        ("sgm_igc_reduced", |m| m.aggregate.sgm_igc_reduced.to_string()),
        ("sgm_igc_full", |m| m.aggregate.sgm_igc_full.to_string()),
        ("sgm_time_reduced", |m| m.aggregate.sgm_time_reduced.to_string()),
        ("sgm_time_full", |m| m.aggregate.sgm_time_full.to_string()),
        ("igc_ratio", |m| m.aggregate.igc_ratio.map(|x| x.to_string()).unwrap_or_default()),
        ("time_ratio", |m| m.aggregate.time_ratio.map(|x| x.to_string()).unwrap_or_default()),
        ("mean_size_reduction_pct", |m| m.aggregate.mean_size_reduction_pct.to_string()),
        ("time_wins", |m| m.aggregate.winloss.time.wins.to_string()),
        ("time_losses", |m| m.aggregate.winloss.time.losses.to_string()),
        ("igc_wins", |m| m.aggregate.winloss.igc.wins.to_string()),
        ("igc_losses", |m| m.aggregate.winloss.igc.losses.to_string()),
        ("absolute_wins_losses", |m| {
            format!("{}/{}", m.aggregate.winloss.absolute_wins, m.aggregate.winloss.absolute_losses)
        }),
    ];
    for (name, f) in rows {
        s.push_str(name);
        for m in &metrics {
            let _ = write!(s, ",{}", f(m));
        }
        s.push('\n');
    }
    Ok(s)
}
