use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use chidt::eval::EvalMode;
use chidt::multilabel::Strategy;
use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod config;
mod error;

use config::{ProtocolName, RunConfig};
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "chidt", version, about = "Cascaded C4.5 multi-label diagnosis coding")]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for generation, splitting and fold assignment; overrides the config.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Evaluation mode; overrides the config.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// Stage-2 strategy; overrides the config.
    #[arg(long, global = true, value_enum)]
    strategy: Option<StrategyArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Principal,
    Multilabel,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    DiverseBr,
    LabelPowerset,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Resubstitution,
    Holdout,
    KFold,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus and its registry of declared combinations.
    Gen,
    /// Train the cascade and write the model file.
    Train,
    /// Predict codes for an input CSV.
    Predict {
        /// CSV with an `id` column and the model's feature columns.
        input: PathBuf,
        /// Input has `id,terms` columns; terms are mapped through the lexicon.
        #[arg(long)]
        terms: bool,
    },
    /// Evaluate the model and write the report.
    Eval {
        #[arg(long, value_enum)]
        protocol: Option<ProtocolArg>,
        /// Fold count for k-fold evaluation.
        #[arg(long)]
        k: Option<usize>,
        /// Evaluate stage 1 alone.
        #[arg(long)]
        stage1_only: bool,
    },
    /// Describe a model file and print its trees.
    Inspect {
        /// Model file; defaults to the configured one.
        model: Option<PathBuf>,
    },
    /// Check code combinations against the registry and exclusion groups.
    Validate {
        /// One `;`-joined combination per line, `{}` for none.
        input: PathBuf,
        /// Registry file; defaults to the configured one, then `<out>/registry.json`.
        #[arg(long)]
        registry: Option<PathBuf>,
    },
}

pub(crate) fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

pub(crate) fn write(path: &Path, content: &str) -> CliResult<()> {
    let io = |source| CliError::Io {
        path: path.to_owned(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, content).map_err(io)
}

fn settings(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = Some(out.clone());
    }
    if let Some(mode) = cli.mode {
        cfg.evaluation.mode = match mode {
            ModeArg::Principal => EvalMode::Principal,
            ModeArg::Multilabel => EvalMode::Multilabel,
        };
    }
    if let Some(strategy) = cli.strategy {
        let strategy = match strategy {
            StrategyArg::DiverseBr => Strategy::DiverseBr,
            StrategyArg::LabelPowerset => Strategy::LabelPowerset,
        };
        cfg.cascade.strategy = strategy;
        cfg.strategy_flag = Some(strategy);
    }
    if let Command::Eval { protocol, k, .. } = &cli.command {
        if let Some(p) = protocol {
            cfg.evaluation.protocol = match p {
                ProtocolArg::Resubstitution => ProtocolName::Resubstitution,
                ProtocolArg::Holdout => ProtocolName::Holdout,
                ProtocolArg::KFold => ProtocolName::KFold,
            };
        }
        if let Some(k) = k {
            cfg.evaluation.k = *k;
        }
    }
    cfg.cascade.validate()?;
    Ok(cfg)
}

/// Appends a timestamped line to `<out>/run.log`. The log is the only place
/// wall-clock time is recorded, so every other output stays reproducible.
fn log_run(cfg: &RunConfig, command: &str, outcome: &CliResult<String>) {
    let dir = cfg.out_dir();
    if !dir.is_dir() {
        return;
    }
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let status = match outcome {
        Ok(_) => "ok".to_owned(),
        Err(e) => format!("exit {}: {e}", e.exit_code()),
    };
    let line = format!(
        "{secs}\t{command}\tseed={}\t{status}\n",
        cfg.seed.map_or("-".into(), |s| s.to_string())
    );
    let _ = OpenOptions::new()
        .create(true)
        .append(true)
        .open(dir.join("run.log"))
        .and_then(|mut f| f.write_all(line.as_bytes()));
}

fn run(cli: Cli) -> CliResult<String> {
    let cfg = settings(&cli)?;
    let name = match &cli.command {
        Command::Gen => "gen",
        Command::Train => "train",
        Command::Predict { .. } => "predict",
        Command::Eval { .. } => "eval",
        Command::Inspect { .. } => "inspect",
        Command::Validate { .. } => "validate",
    };
    let outcome = match cli.command {
        Command::Gen => commands::gen(&cfg),
        Command::Train => commands::train(&cfg),
        Command::Predict { input, terms } => commands::predict(&cfg, &input, terms),
        Command::Eval { stage1_only, .. } => commands::eval(&cfg, stage1_only),
        Command::Inspect { model } => commands::inspect(&cfg, model),
        Command::Validate { input, registry } => commands::validate(&cfg, &input, registry),
    };
    log_run(&cfg, name, &outcome);
    outcome
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(text) => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
