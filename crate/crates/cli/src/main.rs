use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use markovlen_cli::{run, CliError, ExperimentKind, LoadedConfig, RunResult};

#[derive(Debug, Parser)]
#[command(
    name = "markovlen",
    version,
    about = "Exact Markov-length experiments on noisy Gibbs states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (TOML). Optional for `thresholds`.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write the CSV here instead of stdout (overrides `output.path`).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads for the library's parallel loops.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Largest log2 size of any enumerated state space [default: 26].
    #[arg(long, global = true, value_name = "N")]
    budget_bits: Option<u32>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// CMI of the noisy state over an annulus family, with a fitted Markov length per ε.
    CmiSweep,
    /// Truncated cluster expansion of the pinned model against exact enumeration.
    Expansion,
    /// Critical pinning and critical noise strength over a parameter grid.
    Thresholds,
    /// Local patch recovery error against the unrecovered noisy state.
    Recover,
    /// Label-distribution, reconstruction, mixing and CMI checks for a Pauli model.
    StabilizerCheck,
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::CmiSweep => ExperimentKind::CmiSweep,
            Command::Expansion => ExperimentKind::Expansion,
            Command::Thresholds => ExperimentKind::Thresholds,
            Command::Recover => ExperimentKind::Recover,
            Command::StabilizerCheck => ExperimentKind::StabilizerCheck,
        }
    }
}

fn execute(cli: &Cli) -> Result<RunResult, CliError> {
    let kind = cli.command.kind();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start thread pool: {e}")))?;
    }
    let cfg = match (&cli.config, kind) {
        (Some(path), _) => LoadedConfig::load(path)?,
        (None, ExperimentKind::Thresholds) => LoadedConfig::parse("", Path::new("."))?,
        (None, _) => return Err(CliError::Config(format!("{} needs --config", kind.name()))),
    };
    let result = run(kind, &cfg, cli.out.clone(), cli.budget_bits)?;
    match &result.destination {
        Some(path) => std::fs::write(path, &result.csv).map_err(|e| CliError::io(path, e))?,
        None => std::io::stdout()
            .write_all(result.csv.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e))?,
    }
    Ok(result)
}

fn fail(e: &CliError) -> ExitCode {
    let report = serde_json::to_string(&e.report()).expect("error report serializes");
    eprintln!("{report}");
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(result) => {
            if result.kind == ExperimentKind::StabilizerCheck && result.destination.is_some() {
                let t = &result.table;
                for row in &t.rows {
                    println!(
                        "{} {} [{}] value {} (tolerance {})",
                        row[4], row[0], row[1], row[2], row[3]
                    );
                }
            }
            if result.failures > 0 {
                return fail(&CliError::Verification(format!(
                    "{} check(s) failed",
                    result.failures
                )));
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
