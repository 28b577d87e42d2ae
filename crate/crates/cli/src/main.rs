//! `szclass`: seizure-type classification pipeline CLI.
//!
//! Human-readable tables go to stdout; line-oriented JSON logs go to
//! stderr. Exit codes: 0 ok, 1 usage/config error, 2 data error,
//! 3 numeric failure.

// Validation guards use `!(x > 0.0)` on purpose: the negation rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod render;

use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use szclass_core::error::{Error, ErrorKind};

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Msg { msg: String, code: i32 },
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn message(&self) -> String {
        match self {
            CliError::Usage(msg) => msg.clone(),
            CliError::Msg { msg, .. } => msg.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }

    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Msg { code, .. } => *code,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Config => 1,
                ErrorKind::Data => 2,
                ErrorKind::Numeric => 3,
            },
        }
    }
}

#[derive(Parser)]
#[command(
    name = "szclass",
    version,
    about = "EEG seizure-type classification: ingestion, spectral features, classifiers, cross-validation, search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = false)]
    config: Option<PathBuf>,
    /// Seizure manifest CSV.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Output directory for all artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Feature method: 1 or 2.
    #[arg(long)]
    method: Option<u8>,
    /// Upper frequency bound in Hz.
    #[arg(long = "fmax")]
    fmax: Option<f64>,
    /// Window length in seconds.
    #[arg(long = "wl")]
    wl: Option<f64>,
    /// Overlap as a fraction of the window (0.5 or 0.75 for grid semantics).
    #[arg(long)]
    overlap: Option<f64>,
    /// Comma-separated classifier list: knn,sgd,gbt.
    #[arg(long)]
    classifier: Option<String>,
    /// Fold mode: seizure or patient.
    #[arg(long)]
    cv: Option<String>,
    #[arg(long)]
    folds: Option<usize>,
    /// Skip leakage-safe per-fold standardization.
    #[arg(long = "no-standardize")]
    no_standardize: bool,
    /// Search budget (trials per random search).
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Dataset statistics per seizure type.
    Stats {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Generate a synthetic corpus (EDF files + manifest).
    Synth {
        #[command(flatten)]
        common: CommonArgs,
        /// Generation spec JSON; defaults apply when omitted.
        #[arg(long)]
        genspec: Option<PathBuf>,
        /// Give some patients seizures of two classes.
        #[arg(long = "shared-patients")]
        shared_patients: bool,
    },
    /// Extract features into a binary cache.
    Featurize {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Cross-validate classifiers; writes metrics JSON and a text table.
    Cv {
        #[command(flatten)]
        common: CommonArgs,
        /// Take the top preprocessing configs from this sweep CSV.
        #[arg(long = "top-from")]
        top_from: Option<PathBuf>,
        /// How many top configs to take from the sweep table.
        #[arg(long = "top-n")]
        top_n: Option<usize>,
        /// Search hyperparameters per cell on the first split before CV.
        #[arg(long)]
        tune: bool,
    },
    /// Sweep the 50-point preprocessing grid.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated methods to sweep (default "1,2").
        #[arg(long = "sweep-methods")]
        sweep_methods: Option<String>,
        /// Comma-separated classifiers to sweep (default "knn,sgd").
        #[arg(long = "sweep-classifiers")]
        sweep_classifiers: Option<String>,
    },
    /// Random-search hyperparameters for one classifier.
    Search {
        #[command(flatten)]
        common: CommonArgs,
        /// Objective: "first-fold" or "cv".
        #[arg(long = "eval")]
        eval: Option<String>,
    },
    /// Re-render tables from a run directory's persisted JSON.
    Report {
        /// A directory previously written by `cv`.
        #[arg(long)]
        run: PathBuf,
    },
}

/// Minimal line-oriented JSON logger on stderr.
struct JsonLogger;

impl log::Log for JsonLogger {
    fn enabled(&self, metadata: &log::Metadata) -> bool {
        metadata.level() <= log::Level::Info
    }

    fn log(&self, record: &log::Record) {
        if !self.enabled(record.metadata()) {
            return;
        }
        let line = serde_json::json!({
            "level": record.level().to_string().to_lowercase(),
            "target": record.target(),
            "msg": record.args().to_string(),
        });
        let _ = writeln!(std::io::stderr(), "{line}");
    }

    fn flush(&self) {}
}

fn resolve_config(common: &CommonArgs) -> CliResult<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &common.manifest {
        cfg.manifest = Some(v.clone());
    }
    if let Some(v) = &common.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = common.workers {
        cfg.workers = v;
    }
    if let Some(v) = common.method {
        cfg.method = v;
    }
    if let Some(v) = common.fmax {
        cfg.f_max = v;
    }
    if let Some(v) = common.wl {
        cfg.w_l = v;
    }
    if let Some(v) = common.overlap {
        cfg.overlap = v;
    }
    if let Some(v) = &common.classifier {
        cfg.classifiers = v.split(',').map(|s| s.trim().to_string()).collect();
    }
    if let Some(v) = &common.cv {
        cfg.cv = v.clone();
    }
    if let Some(v) = common.folds {
        cfg.folds = Some(v);
    }
    if common.no_standardize {
        cfg.standardize = false;
    }
    if let Some(v) = common.budget {
        cfg.search_budget = v;
    }
    cfg.validate()?;
    if cfg.workers > 0 {
        // Ignore a second initialization (tests call run() repeatedly).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Stats { common } => commands::cmd_stats(&resolve_config(&common)?),
        Command::Synth {
            common,
            genspec,
            shared_patients,
        } => {
            let cfg = resolve_config(&common)?;
            commands::cmd_synth(&cfg, genspec.as_ref(), common.seed, shared_patients)
        }
        Command::Featurize { common } => commands::cmd_featurize(&resolve_config(&common)?),
        Command::Cv {
            common,
            top_from,
            top_n,
            tune,
        } => {
            let mut cfg = resolve_config(&common)?;
            if let Some(n) = top_n {
                cfg.top_n = n;
            }
            cfg.tune = tune || cfg.tune;
            commands::cmd_cv(&cfg, top_from.as_ref())
        }
        Command::Sweep {
            common,
            sweep_methods,
            sweep_classifiers,
        } => {
            let mut cfg = resolve_config(&common)?;
            if let Some(m) = sweep_methods {
                cfg.sweep_methods = m
                    .split(',')
                    .map(|s| s.trim().parse::<u8>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError::Usage(format!("--sweep-methods: {e}")))?;
            }
            if let Some(c) = sweep_classifiers {
                cfg.sweep_classifiers = c.split(',').map(|s| s.trim().to_string()).collect();
            }
            cfg.validate()?;
            commands::cmd_sweep(&cfg)
        }
        Command::Search { common, eval } => {
            let mut cfg = resolve_config(&common)?;
            if let Some(e) = eval {
                cfg.search_eval = e;
            }
            cfg.validate()?;
            commands::cmd_search(&cfg)
        }
        Command::Report { run } => commands::cmd_report(&run),
    }
}

fn main() {
    let _ = log::set_boxed_logger(Box::new(JsonLogger));
    log::set_max_level(log::LevelFilter::Info);

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as ClapKind;
            if matches!(e.kind(), ClapKind::DisplayHelp | ClapKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            eprintln!("{e}");
            std::process::exit(1);
        }
    };

    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            let line = serde_json::json!({
                "level": "error",
                "msg": e.message(),
            });
            eprintln!("{line}");
            std::process::exit(e.exit_code());
        }
    }
}
