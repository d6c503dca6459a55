use crate::error::{IgtError, Result};
use crate::theory::{reports_table, run_suite, SuiteConfig};

use super::{CommandOutput, Output, RunConfig};

/// Runs the bound-verification suite; `success` is false when any bound
/// is violated.
pub fn cmd_verify(config: &RunConfig) -> Result<CommandOutput> {
    config.ensure_known(&["trials", "inject_fault"])?;
    let trials: usize = config.get("trials", SuiteConfig::default().trials)?;
    if trials == 0 {
        return Err(IgtError::Config("trials must be positive".into()));
    }
    let fault_scale = match config.raw("inject_fault") {
        None => None,
        Some(_) => Some(config.get("inject_fault", 1.0)?),
    };
    let mut out = Output::create(config)?;
    let reports = run_suite(&SuiteConfig {
        trials,
        seed: config.seed,
        fault_scale,
    })?;
    out.write_table("verify.csv", &reports_table(&reports))?;
    let failed: Vec<_> = reports.iter().filter(|r| !r.satisfied).collect();
    for r in &failed {
        log::error!("{}", r.describe());
    }
    let line = format!(
        "verify: {}/{} bounds satisfied, {} violated",
        reports.len() - failed.len(),
        reports.len(),
        failed.len()
    );
    Ok(out.finish(line, failed.is_empty()))
}
