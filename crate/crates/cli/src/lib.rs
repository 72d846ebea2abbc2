//! Config-driven experiment runner for the `markovlen` library.
//!
//! Each subcommand reads one TOML config, checks it against the enumeration
//! budget, runs to completion and renders a single CSV. Nothing is written
//! unless the whole run succeeds.

pub mod config;
pub mod error;
pub mod model;
pub mod output;
pub mod runners;

use std::path::PathBuf;

use markovlen::Budget;

pub use config::{ExperimentConfig, ExperimentKind, LoadedConfig};
pub use error::CliError;
pub use output::Table;

/// Default `--budget-bits`.
pub const DEFAULT_BUDGET_BITS: u32 = 26;

#[derive(Debug, Clone)]
pub struct RunResult {
    pub kind: ExperimentKind,
    pub table: Table,
    pub csv: String,
    /// Where the CSV goes; `None` means stdout.
    pub destination: Option<PathBuf>,
    /// Failed rows of a `stabilizer-check`.
    pub failures: usize,
}

/// Runs one experiment. `out` and `budget_bits` override the config file.
pub fn run(
    kind: ExperimentKind,
    cfg: &LoadedConfig,
    out: Option<PathBuf>,
    budget_bits: Option<u32>,
) -> Result<RunResult, CliError> {
    if let Some(declared) = cfg.config.experiment {
        if declared != kind {
            return Err(CliError::Config(format!(
                "config declares experiment `{}` but `{}` was requested",
                declared.name(),
                kind.name()
            )));
        }
    }
    let bits = budget_bits
        .or(cfg.config.budget.bits)
        .unwrap_or(DEFAULT_BUDGET_BITS);
    let budget = Budget(bits);
    let c = &cfg.config;
    let table = match kind {
        ExperimentKind::Thresholds => runners::run_thresholds(c)?,
        _ => {
            let m = model::build_model(cfg)?;
            match kind {
                ExperimentKind::CmiSweep => runners::run_cmi_sweep(c, &m, budget)?,
                ExperimentKind::Expansion => runners::run_expansion_report(c, &m, budget)?,
                ExperimentKind::Recover => runners::run_recovery(c, &m, budget)?,
                ExperimentKind::StabilizerCheck => runners::run_stabilizer_check(c, &m, budget)?,
                ExperimentKind::Thresholds => unreachable!(),
            }
        }
    };
    let failures = match (kind, table.column("status")) {
        (ExperimentKind::StabilizerCheck, Some(k)) => {
            table.rows.iter().filter(|r| r[k] != "PASS").count()
        }
        _ => 0,
    };
    let header = output::Header {
        kind,
        config: &cfg.raw,
        budget_bits: bits,
    };
    let csv = output::render(&header, &table);
    let destination = out.or_else(|| c.output.path.as_ref().map(|p| cfg.resolve(p)));
    Ok(RunResult {
        kind,
        table,
        csv,
        destination,
        failures,
    })
}
