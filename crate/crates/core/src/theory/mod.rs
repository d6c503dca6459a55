//! Empirical verification of the representation's stability and
//! concentration bounds: each check evaluates both sides of an inequality on
//! concrete instances and returns a [`BoundReport`].
//!
//! Expectations are replaced by Monte-Carlo estimates; a bound holds when
//! `lhs ≤ rhs + tolerance`, the tolerance being three combined standard
//! errors plus `1e-9` (or a relative round-off allowance for exact
//! identities).

mod bounds;
mod concentration;
mod suite;

use serde::Serialize;

use crate::report::{format_float, CsvTable};

pub use bounds::{
    check_bounded_cascade, check_corollary_scaling, check_energy_split, check_lipschitz_pairs,
    check_tree_bound, check_variance_bound, lipschitz_ratio, ErgodicSetup, SbmFamily, VarianceBound,
};
pub use concentration::{
    check_deviation_trend, check_sbm_concentration, check_subgaussian_tail, ConcentrationGrid,
    ConcentrationPoint, ConcentrationReport, DeviationPoint, DeviationTrend, TailFit,
};
pub use suite::{run_suite, SuiteConfig};

/// Statistical slack added to every Monte-Carlo comparison.
pub const SE_MULTIPLIER: f64 = 3.0;
pub const ABS_SLACK: f64 = 1e-9;

/// Parameters of the instance a report was computed on.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct TrialMeta {
    pub n: usize,
    pub p: f64,
    pub tau: f64,
    /// cascade order `N`
    pub order: usize,
    /// smoothing scale `J`
    pub scale: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub meta: TrialMeta,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub satisfied: bool,
    /// `rhs − lhs`
    pub margin: f64,
}

impl BoundReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            meta: TrialMeta::default(),
            lhs,
            rhs,
            tolerance,
            satisfied: lhs <= rhs + tolerance,
            margin: rhs - lhs,
        }
    }

    /// Statistical comparison: tolerance `3·se + 1e-9`.
    pub fn statistical(name: impl Into<String>, lhs: f64, rhs: f64, se: f64) -> Self {
        Self::new(name, lhs, rhs, SE_MULTIPLIER * se + ABS_SLACK)
    }

    pub fn with_meta(mut self, meta: TrialMeta) -> Self {
        self.meta = meta;
        self
    }

    /// One-line human-readable summary.
    pub fn describe(&self) -> String {
        let m = &self.meta;
        format!(
            "{} [{}] n={} p={} tau={} N={} J={} seed={}: lhs={} rhs={} tol={}",
            self.name,
            if self.satisfied { "ok" } else { "VIOLATED" },
            m.n,
            format_float(m.p),
            format_float(m.tau),
            m.order,
            m.scale,
            m.seed,
            format_float(self.lhs),
            format_float(self.rhs),
            format_float(self.tolerance),
        )
    }
}

/// Orders reports by `(name, seed)`, stable otherwise.
pub fn sort_reports(reports: &mut [BoundReport]) {
    reports.sort_by(|a, b| a.name.cmp(&b.name).then(a.meta.seed.cmp(&b.meta.seed)));
}

pub fn reports_table(reports: &[BoundReport]) -> CsvTable {
    let mut t = CsvTable::new(&["name", "n", "p", "tau", "N", "J", "seed", "lhs", "rhs", "margin", "satisfied"]);
    for r in reports {
        t.push(vec![
            r.name.clone(),
            r.meta.n.to_string(),
            format_float(r.meta.p),
            format_float(r.meta.tau),
            r.meta.order.to_string(),
            r.meta.scale.to_string(),
            r.meta.seed.to_string(),
            format_float(r.lhs),
            format_float(r.rhs),
            format_float(r.margin),
            r.satisfied.to_string(),
        ]);
    }
    t
}

/// Sample mean and standard error of the mean.
pub(crate) fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
