//! Drivers behind the `igt-lab` commands: the synthetic sweep, the dataset
//! benchmark, the `(N, J)` ablation grid, the random-isometry ablation and
//! the bound-verification suite.
//!
//! Every command writes `config.txt` (the configuration as given),
//! `provenance.txt` (command, version, seed) and its CSVs into the output
//! directory. Accuracies are written in percent. Runs are executed in
//! parallel and sorted before writing, so identical configurations give
//! byte-identical CSVs; wall-clock columns are filled only with
//! `timing = true`.

mod bench;
mod config;
mod dataset;
mod plot;
mod synth;
mod verify;

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::{IgtError, Result};
use crate::igt::{igt_forward, standardize, train_isometries, IgtConfig, IgtModel, IsometryOptimizer};
use crate::numerics::{FeatureMatrix, SparseOperator};
use crate::report::{format_float, CsvTable};

pub use bench::{cmd_ablate, cmd_bench, cmd_random_w};
pub use config::RunConfig;
pub use dataset::{known_stats, load_dataset, DatasetBundle, DatasetStats, DATASET_STATS};
pub use plot::line_chart_svg;
pub use synth::cmd_synth;
pub use verify::cmd_verify;

pub const COMMANDS: [&str; 5] = ["synth", "bench", "ablate", "random-w", "verify"];

/// Version string recorded with every run, e.g. `0.1.0 (v0.1.0-3-gabc1234)`.
pub fn version() -> &'static str {
    concat!(env!("CARGO_PKG_VERSION"), " (", env!("IGT_GIT_DESCRIBE"), ")")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
    /// one-line human summary
    pub summary: String,
    /// false when the command found a failure it must report via exit code
    pub success: bool,
}

pub fn run_command(config: &RunConfig) -> Result<CommandOutput> {
    match config.command.as_str() {
        "synth" => cmd_synth(config),
        "bench" => cmd_bench(config),
        "ablate" => cmd_ablate(config),
        "random-w" => cmd_random_w(config),
        "verify" => cmd_verify(config),
        other => Err(IgtError::Config(format!(
            "unknown command `{other}` (expected one of {})",
            COMMANDS.join(", ")
        ))),
    }
}

/// Output directory with the configuration echo and provenance written.
pub(crate) struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    pub(crate) fn create(config: &RunConfig) -> Result<Self> {
        let dir = config.out_dir.clone();
        std::fs::create_dir_all(&dir)?;
        let mut out = Self { dir, files: Vec::new() };
        out.write_text("config.txt", config.echo())?;
        let provenance = format!(
            "command = {}\nversion = {}\nseed = {}\n",
            config.command,
            version(),
            config.seed
        );
        out.write_text("provenance.txt", &provenance)?;
        Ok(out)
    }

    pub(crate) fn write_text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, text)?;
        self.files.push(path);
        Ok(())
    }

    pub(crate) fn write_table(&mut self, name: &str, table: &CsvTable) -> Result<()> {
        self.write_text(name, &table.render())
    }

    pub(crate) fn finish(self, summary: String, success: bool) -> CommandOutput {
        log::info!("{summary}");
        CommandOutput {
            files: self.files,
            summary,
            success,
        }
    }

    pub(crate) fn dir(&self) -> &Path {
        &self.dir
    }
}

/// Mean and sample standard deviation (0 for a single value), ignoring NaN.
pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    let v: Vec<f64> = xs.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() == 1 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub(crate) fn pct(x: f64) -> String {
    format_float(100.0 * x)
}

/// Hyper-parameters of the unsupervised representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct IgtSettings {
    pub order: usize,
    pub scale: u32,
    pub rank: usize,
    pub epochs: usize,
    pub optimizer: IsometryOptimizer,
    /// skip training and keep the random starting isometries
    pub random: bool,
}

impl IgtSettings {
    pub(crate) fn config(&self, seed: u64) -> IgtConfig {
        IgtConfig::new(self.scale, self.order, self.rank, seed)
            .with_epochs(self.epochs)
            .with_optimizer(self.optimizer)
    }
}

pub(crate) fn parse_optimizer(config: &RunConfig) -> Result<IsometryOptimizer> {
    match config.raw("isometry_optimizer").unwrap_or("projected_ascent") {
        "projected_ascent" => Ok(IsometryOptimizer::ProjectedAscent),
        "adam" => Ok(IsometryOptimizer::Adam),
        other => Err(IgtError::Config(format!(
            "isometry_optimizer `{other}` (expected projected_ascent or adam)"
        ))),
    }
}

/// Standardized IGT features of `x` on the graph operator `a`.
pub(crate) fn igt_features(
    a: &SparseOperator,
    x: &FeatureMatrix,
    settings: &IgtSettings,
    seed: u64,
) -> Result<FeatureMatrix> {
    let config = settings.config(seed);
    let model = if settings.random {
        IgtModel::random(config, x.cols())?
    } else {
        train_isometries(x, a, &config)?
    };
    Ok(standardize(&igt_forward(&model, x, a)?).0)
}

/// One trained classifier, in the metrics schema shared by the commands.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RunRow {
    pub dataset: String,
    pub split_mode: String,
    pub head: String,
    pub order: usize,
    pub scale: u32,
    pub rank: usize,
    pub dropout: f64,
    pub l2: f64,
    pub seed: u64,
    pub val_acc: f64,
    pub test_acc: f64,
    pub epochs_ran: usize,
    pub wall_seconds: f64,
}

impl RunRow {
    fn key(&self) -> (&str, &str, &str, usize, u32, usize, u64) {
        (&self.dataset, &self.split_mode, &self.head, self.order, self.scale, self.rank, self.seed)
    }
}

pub(crate) fn sort_rows(rows: &mut [RunRow]) {
    rows.sort_by(|a, b| a.key().cmp(&b.key()));
}

pub(crate) const RUN_COLUMNS: [&str; 13] = [
    "dataset", "split_mode", "head", "N", "J", "k", "dropout", "l2", "seed", "val_acc", "test_acc", "epochs_ran",
    "wall_seconds",
];

pub(crate) fn runs_table(rows: &[RunRow], timing: bool) -> CsvTable {
    let mut t = CsvTable::new(&RUN_COLUMNS);
    for r in rows {
        t.push(vec![
            r.dataset.clone(),
            r.split_mode.clone(),
            r.head.clone(),
            r.order.to_string(),
            r.scale.to_string(),
            r.rank.to_string(),
            format_float(r.dropout),
            format_float(r.l2),
            r.seed.to_string(),
            pct(r.val_acc),
            pct(r.test_acc),
            r.epochs_ran.to_string(),
            if timing { format_float(r.wall_seconds) } else { String::new() },
        ]);
    }
    t
}

/// Mean ± std per `(dataset, split, head, N, J, k)` over seeds.
pub(crate) fn summary_table(rows: &[RunRow]) -> CsvTable {
    let mut t = CsvTable::new(&[
        "dataset", "split_mode", "head", "N", "J", "k", "runs", "val_acc_mean", "val_acc_std", "test_acc_mean",
        "test_acc_std",
    ]);
    let mut start = 0;
    while start < rows.len() {
        let k = &rows[start].key();
        let same = |r: &RunRow| {
            let o = r.key();
            (o.0, o.1, o.2, o.3, o.4, o.5) == (k.0, k.1, k.2, k.3, k.4, k.5)
        };
        let end = start + rows[start..].iter().take_while(|r| same(r)).count();
        let group = &rows[start..end];
        let (vm, vs) = mean_std(&group.iter().map(|r| r.val_acc).collect::<Vec<_>>());
        let (tm, ts) = mean_std(&group.iter().map(|r| r.test_acc).collect::<Vec<_>>());
        let r = &rows[start];
        t.push(vec![
            r.dataset.clone(),
            r.split_mode.clone(),
            r.head.clone(),
            r.order.to_string(),
            r.scale.to_string(),
            r.rank.to_string(),
            group.len().to_string(),
            pct(vm),
            pct(vs),
            pct(tm),
            pct(ts),
        ]);
        start = end;
    }
    t
}

pub(crate) fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let t0 = Instant::now();
    let v = f()?;
    Ok((v, t0.elapsed().as_secs_f64()))
}
