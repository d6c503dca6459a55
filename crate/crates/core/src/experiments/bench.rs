use std::path::PathBuf;

use rayon::prelude::*;

use crate::classify::{make_splits_sized, train_head, HeadKind, SplitMode, SplitSizes, SplitSpec, TrainSpec};
use crate::error::{IgtError, Result};
use crate::graph::normalize_adjacency;
use crate::igt::IsometryOptimizer;
use crate::numerics::{FeatureMatrix, SparseOperator};
use crate::report::{format_float, CsvTable};
use crate::rng;

use super::dataset::known_stats;
use super::{
    igt_features, load_dataset, mean_std, parse_optimizer, pct, runs_table, sort_rows, summary_table, timed,
    CommandOutput, DatasetBundle, IgtSettings, Output, RunConfig, RunRow,
};

/// Keys shared by the dataset commands.
const COMMON_KEYS: [&str; 13] = [
    "dataset", "seeds", "epochs", "isometry_optimizer", "hidden", "max_epochs", "patience", "train_per_class",
    "val_size", "test_size", "timing", "rank", "l2",
];

struct Common {
    datasets: Vec<PathBuf>,
    seeds: u64,
    epochs: usize,
    optimizer: IsometryOptimizer,
    spec: TrainSpec,
    sizes: SplitSizes,
    timing: bool,
}

impl Common {
    fn parse(config: &RunConfig, epochs: usize) -> Result<Self> {
        let seeds = config.get("seeds", 5)?;
        if seeds == 0 {
            return Err(IgtError::Config("seeds must be positive".into()));
        }
        let spec = TrainSpec {
            hidden_width: config.get("hidden", 128)?,
            max_epochs: config.get("max_epochs", 200)?,
            patience: config.get("patience", 30)?,
            ..TrainSpec::default()
        };
        spec.validate()?;
        let d = SplitSizes::default();
        Ok(Self {
            datasets: config.require_paths("dataset")?,
            seeds,
            epochs: config.get("epochs", epochs)?,
            optimizer: parse_optimizer(config)?,
            spec,
            sizes: SplitSizes {
                train_per_class: config.get("train_per_class", d.train_per_class)?,
                val: config.get("val_size", d.val)?,
                test: config.get("test_size", d.test)?,
            },
            timing: config.get("timing", false)?,
        })
    }

    fn settings(&self, order: usize, scale: u32, rank: usize) -> IgtSettings {
        IgtSettings {
            order,
            scale,
            rank,
            epochs: self.epochs,
            optimizer: self.optimizer,
            random: false,
        }
    }
}

/// Hidden-layer dropout selected per dataset by validation.
fn preset_dropout(name: &str) -> f64 {
    match known_stats(name).map(|s| s.name) {
        Some("citeseer" | "pubmed") => 0.2,
        Some("wikics") => 0.8,
        _ => 0.0,
    }
}

fn is_wikics(name: &str) -> bool {
    known_stats(name).is_some_and(|s| s.name == "wikics")
}

/// Representation and regularization for one head on one split mode.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Plan {
    head: HeadKind,
    order: usize,
    scale: u32,
    rank: usize,
    dropout: f64,
    l2: f64,
}

fn plan(config: &RunConfig, dataset: &str, mode: SplitMode, head: HeadKind) -> Result<Plan> {
    // WikiCS uses its own validated capacity; the citation graphs share N=2,
    // k=10, J=4 on sparse-label splits and J=1 on the full split
    let (order, rank, scale) = match (is_wikics(dataset), head) {
        (true, HeadKind::Linear) => (1, 150, 1),
        (true, HeadKind::Mlp) => (1, 35, 2),
        (false, _) => {
            let j = match mode {
                SplitMode::Full => config.get("scale_full", 1)?,
                SplitMode::Random => config.get("scale_random", 4)?,
                SplitMode::Predefined => config.get("scale_predefined", 4)?,
            };
            (2, 10, j)
        }
    };
    Ok(Plan {
        head,
        order: config.get("order", order)?,
        rank: config.get("rank", rank)?,
        scale: config.get("scale", scale)?,
        dropout: if head == HeadKind::Mlp { config.get("dropout", preset_dropout(dataset))? } else { 0.0 },
        l2: if head == HeadKind::Linear { config.get("l2", 0.005)? } else { 0.0 },
    })
}

fn parse_heads(config: &RunConfig, default: &[&str]) -> Result<Vec<HeadKind>> {
    let names: Vec<String> = config.get_list("heads", &default.iter().map(|s| s.to_string()).collect::<Vec<_>>())?;
    names
        .iter()
        .map(|h| match h.as_str() {
            "linear" => Ok(HeadKind::Linear),
            "mlp" => Ok(HeadKind::Mlp),
            other => Err(IgtError::Config(format!("unknown head `{other}` (expected linear or mlp)"))),
        })
        .collect()
}

/// Splits of one mode with their run seeds. Predefined splits are reused
/// across `seeds` model seeds, or taken one per run when the dataset ships
/// several; sampled splits use one split per run.
fn splits_for(bundle: &DatasetBundle, mode: SplitMode, c: &Common, seed: u64) -> Result<Vec<(u64, SplitSpec)>> {
    match mode {
        SplitMode::Predefined => match bundle.splits.len() {
            0 => Err(IgtError::Config(format!("{} has no predefined split files", bundle.name))),
            1 => Ok((0..c.seeds).map(|s| (s, bundle.splits[0].clone())).collect()),
            _ => Ok(bundle.splits.iter().cloned().enumerate().map(|(i, s)| (i as u64, s)).collect()),
        },
        _ => (0..c.seeds)
            .map(|s| {
                let run_seed = rng::derive(seed, s);
                Ok((s, make_splits_sized(bundle.n(), &bundle.labels, mode, c.sizes, rng::derive(run_seed, 2))?))
            })
            .collect(),
    }
}

struct Job<'a> {
    a: &'a SparseOperator,
    bundle: &'a DatasetBundle,
    mode: SplitMode,
    seed: u64,
    split: SplitSpec,
}

/// Features are cached per representation within a job, so heads sharing
/// `(N, J, k)` reuse one trained cascade.
fn run_job(job: &Job, plans: &[Plan], c: &Common, base_seed: u64, random: bool) -> Result<Vec<RunRow>> {
    let run_seed = rng::derive(base_seed, job.seed);
    let mut cache: Vec<((usize, u32, usize), FeatureMatrix)> = Vec::new();
    let mut rows = Vec::with_capacity(plans.len());
    for p in plans {
        let key = (p.order, p.scale, p.rank);
        let ((metrics, _), wall) = timed(|| {
            let features = match cache.iter().find(|(k, _)| *k == key) {
                Some((_, f)) => f.clone(),
                None => {
                    let settings = IgtSettings { random, ..c.settings(p.order, p.scale, p.rank) };
                    let f = igt_features(job.a, &job.bundle.features, &settings, rng::derive(run_seed, 3))?;
                    cache.push((key, f.clone()));
                    f
                }
            };
            let spec = TrainSpec {
                dropout: p.dropout,
                l2: p.l2,
                seed: rng::derive(run_seed, 4),
                ..c.spec.clone()
            };
            let (model, metrics) = train_head(&features, &job.bundle.labels, &job.split, &spec, p.head)?;
            Ok((metrics, model))
        })?;
        rows.push(RunRow {
            dataset: job.bundle.name.clone(),
            split_mode: job.mode.name().into(),
            head: p.head.name().into(),
            order: p.order,
            scale: p.scale,
            rank: p.rank,
            dropout: p.dropout,
            l2: p.l2,
            seed: job.seed,
            val_acc: metrics.val_acc,
            test_acc: metrics.test_acc,
            epochs_ran: metrics.epochs_ran,
            wall_seconds: wall,
        });
    }
    Ok(rows)
}

fn run_jobs(jobs: &[(Job, Vec<Plan>)], c: &Common, seed: u64, random: bool) -> Result<Vec<RunRow>> {
    let rows: Vec<Vec<RunRow>> = jobs.par_iter().map(|(j, plans)| run_job(j, plans, c, seed, random)).collect::<Result<_>>()?;
    let mut rows: Vec<RunRow> = rows.into_iter().flatten().collect();
    sort_rows(&mut rows);
    Ok(rows)
}

fn load_all(c: &Common) -> Result<Vec<(DatasetBundle, SparseOperator)>> {
    c.datasets
        .iter()
        .map(|d| {
            let b = load_dataset(d)?;
            let a = normalize_adjacency(&b.graph);
            Ok((b, a))
        })
        .collect()
}

fn describe(summary: &CsvTable) -> String {
    summary
        .rows()
        .iter()
        .map(|r| format!("{}/{}/{} {}±{}", r[0], r[1], r[2], r[9], r[10]))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Trains IGT features and linear / MLP heads on every requested split mode.
pub fn cmd_bench(config: &RunConfig) -> Result<CommandOutput> {
    let mut keys = COMMON_KEYS.to_vec();
    keys.extend(["splits", "heads", "order", "scale", "scale_predefined", "scale_random", "scale_full", "dropout"]);
    config.ensure_known(&keys)?;
    let c = Common::parse(config, 50)?;
    let heads = parse_heads(config, &["linear", "mlp"])?;
    let data = load_all(&c)?;
    let mut out = Output::create(config)?;
    let mut jobs = Vec::new();
    for (bundle, a) in &data {
        let default: &[&str] =
            if bundle.splits.is_empty() { &["random", "full"] } else { &["predefined", "random", "full"] };
        let modes: Vec<String> = config.get_list("splits", &default.iter().map(|s| s.to_string()).collect::<Vec<_>>())?;
        for m in &modes {
            let mode = SplitMode::parse(m)?;
            let plans = heads.iter().map(|&h| plan(config, &bundle.name, mode, h)).collect::<Result<Vec<_>>>()?;
            for (seed, split) in splits_for(bundle, mode, &c, config.seed)? {
                jobs.push((Job { a, bundle, mode, seed, split }, plans.clone()));
            }
        }
    }
    let rows = run_jobs(&jobs, &c, config.seed, false)?;
    out.write_table("bench_runs.csv", &runs_table(&rows, c.timing))?;
    let summary = summary_table(&rows);
    out.write_table("bench_summary.csv", &summary)?;
    let line = format!("bench: {} runs; test accuracy {}", rows.len(), describe(&summary));
    Ok(out.finish(line, true))
}

/// Validation accuracy of a linear head over an `N × J` grid on the
/// predefined split.
pub fn cmd_ablate(config: &RunConfig) -> Result<CommandOutput> {
    let mut keys = COMMON_KEYS.to_vec();
    keys.extend(["orders", "scales"]);
    config.ensure_known(&keys)?;
    let c = Common::parse(config, 40)?;
    let orders: Vec<usize> = config.get_list("orders", &[0, 1, 2, 3])?;
    let scales: Vec<u32> = config.get_list("scales", &[1, 2, 3, 4])?;
    let rank = config.get("rank", 10)?;
    let l2 = config.get("l2", 0.005)?;
    let data = load_all(&c)?;
    let mut out = Output::create(config)?;
    let mut jobs = Vec::new();
    for (bundle, a) in &data {
        if bundle.splits.is_empty() {
            return Err(IgtError::Config(format!("ablate needs the predefined split of {}", bundle.name)));
        }
        for (seed, split) in splits_for(bundle, SplitMode::Predefined, &c, config.seed)? {
            for &order in &orders {
                for &scale in &scales {
                    let p = Plan { head: HeadKind::Linear, order, scale, rank, dropout: 0.0, l2 };
                    jobs.push((Job { a, bundle, mode: SplitMode::Predefined, seed, split: split.clone() }, vec![p]));
                }
            }
        }
    }
    let rows = run_jobs(&jobs, &c, config.seed, false)?;
    out.write_table("ablate_runs.csv", &runs_table(&rows, c.timing))?;

    let mut header = vec!["dataset".to_string(), "N".to_string()];
    header.extend(scales.iter().map(|j| format!("J={j}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut grid = CsvTable::new(&header_refs);
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for (bundle, _) in &data {
        for &order in &orders {
            let mut row = vec![bundle.name.clone(), order.to_string()];
            for &scale in &scales {
                let vals: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.dataset == bundle.name && r.order == order && r.scale == scale)
                    .map(|r| r.val_acc)
                    .collect();
                let m = mean_std(&vals).0;
                if m > best.0 {
                    best = (m, order, scale);
                }
                row.push(pct(m));
            }
            grid.push(row);
        }
    }
    out.write_table("ablate_grid.csv", &grid)?;
    let line = format!(
        "ablate: {} runs; best validation accuracy {}% at N={}, J={}",
        rows.len(),
        format_float(100.0 * best.0),
        best.1,
        best.2
    );
    Ok(out.finish(line, true))
}

/// Accuracy with trained isometries against the same pipeline with the
/// random starting isometries, on the full split by default.
pub fn cmd_random_w(config: &RunConfig) -> Result<CommandOutput> {
    let mut keys = COMMON_KEYS.to_vec();
    keys.extend(["split", "heads", "order", "scale", "scale_predefined", "scale_random", "scale_full", "dropout"]);
    config.ensure_known(&keys)?;
    let c = Common::parse(config, 50)?;
    let mode = SplitMode::parse(config.raw("split").unwrap_or("full"))?;
    let heads = parse_heads(config, &["mlp"])?;
    let data = load_all(&c)?;
    let mut out = Output::create(config)?;
    let mut jobs = Vec::new();
    for (bundle, a) in &data {
        let plans = heads.iter().map(|&h| plan(config, &bundle.name, mode, h)).collect::<Result<Vec<_>>>()?;
        for (seed, split) in splits_for(bundle, mode, &c, config.seed)? {
            jobs.push((Job { a, bundle, mode, seed, split }, plans.clone()));
        }
    }
    let trained = run_jobs(&jobs, &c, config.seed, false)?;
    let random = run_jobs(&jobs, &c, config.seed, true)?;

    let mut table = CsvTable::new(&[
        "dataset", "split_mode", "head", "N", "J", "k", "seed", "trained_test_acc", "random_test_acc", "drop",
    ]);
    for (t, r) in trained.iter().zip(&random) {
        table.push(vec![
            t.dataset.clone(),
            t.split_mode.clone(),
            t.head.clone(),
            t.order.to_string(),
            t.scale.to_string(),
            t.rank.to_string(),
            t.seed.to_string(),
            pct(t.test_acc),
            pct(r.test_acc),
            pct(t.test_acc - r.test_acc),
        ]);
    }
    out.write_table("random_w_runs.csv", &table)?;

    let mut summary = CsvTable::new(&[
        "dataset", "split_mode", "head", "runs", "trained_mean", "trained_std", "random_mean", "random_std", "drop_mean",
        "drop_std",
    ]);
    let pairs: Vec<(&RunRow, &RunRow)> = trained.iter().zip(&random).collect();
    let mut notes = Vec::new();
    for group in pairs.chunk_by(|a, b| (&a.0.dataset, &a.0.head) == (&b.0.dataset, &b.0.head)) {
        let col = |f: &dyn Fn(&(&RunRow, &RunRow)) -> f64| mean_std(&group.iter().map(f).collect::<Vec<_>>());
        let (tm, ts) = col(&|p| p.0.test_acc);
        let (rm, rs) = col(&|p| p.1.test_acc);
        let (dm, ds) = col(&|p| p.0.test_acc - p.1.test_acc);
        let first = group[0].0;
        summary.push(vec![
            first.dataset.clone(),
            first.split_mode.clone(),
            first.head.clone(),
            group.len().to_string(),
            pct(tm),
            pct(ts),
            pct(rm),
            pct(rs),
            pct(dm),
            pct(ds),
        ]);
        notes.push(format!("{}/{} drop {} points", first.dataset, first.head, pct(dm)));
    }
    out.write_table("random_w_summary.csv", &summary)?;
    let line = format!("random-w: {} paired runs; {}", pairs.len(), notes.join(", "));
    Ok(out.finish(line, true))
}
