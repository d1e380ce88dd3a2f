//! Orchestration behind the `ssta` command line tool.
//!
//! Every command computes all of its artifacts in memory and only then
//! writes them, each through a temporary file renamed into place, so a
//! failing command leaves no partial output behind.

mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::error::{Error, ErrorKind, Result};

pub use commands::{execute, load_dataset, Artifact, Command, PersistenceModel, SavedModel};
pub use config::{RunConfig, KEYS};

#[derive(Parser, Debug)]
#[command(name = "ssta", version, about = "Sea surface temperature anomaly forecasting toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// key=value configuration file
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Month of the first row of every value CSV (YYYY-MM)
    #[arg(long, global = true, value_name = "YYYY-MM")]
    start_month: Option<String>,

    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "SSTA_THREADS")]
    threads: Option<usize>,

    /// Override any configuration key
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// More log output (repeat for debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Generate a synthetic dataset
    Synth,
    /// Monthly climatology and anomalies of an SST grid
    Climatology,
    /// Write a feature table
    Features,
    /// Fit a model
    Train,
    /// Forecast from the latest window
    Predict,
    /// Chained forecast to a longer horizon (default 9 months)
    Forecast9,
    /// Score a model against persistence
    Evaluate,
    /// Score, split, diagnostics and charts
    Report,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Synth => Command::Synth,
            Cmd::Climatology => Command::Climatology,
            Cmd::Features => Command::Features,
            Cmd::Train => Command::Train,
            Cmd::Predict => Command::Predict,
            Cmd::Forecast9 => Command::Forecast9,
            Cmd::Evaluate => Command::Evaluate,
            Cmd::Report => Command::Report,
        }
    }
}

pub fn exit_code(kind: ErrorKind) -> i32 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Data => 2,
        ErrorKind::Numeric => 3,
    }
}

fn report_error(kind: &str, code: &str, reason: &str) {
    let reason = reason.replace('\n', " ").replace('"', "'");
    eprintln!("error kind={kind} code={code} reason=\"{}\"", reason.trim());
}

/// Writes `bytes` to `path` via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(m) = &cli.start_month {
        cfg.set("start_month", m)?;
    }
    if let Some(o) = &cli.out {
        cfg.set("out", &o.to_string_lossy())?;
    }
    if let Some(s) = cli.seed {
        cfg.set("seed", &s.to_string())?;
    }
    if let Some(t) = cli.threads {
        cfg.set("threads", &t.to_string())?;
    }
    for pair in &cli.set {
        cfg.set_pair(pair)?;
    }
    Ok(cfg)
}

fn run_command(command: Command, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let threads: usize = cfg.get_or("threads", 0)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let artifacts = pool.install(|| execute(command, cfg))?;
    let out = PathBuf::from(cfg.raw("out").unwrap_or("."));
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let mut written = Vec::new();
    for a in artifacts {
        let path = out.join(&a.name);
        write_atomic(&path, &a.bytes)?;
        log::info!("wrote {}", path.display());
        written.push(path);
    }
    Ok(written)
}

fn key_help() -> String {
    let width = KEYS.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::from("Configuration keys (config file or --set):\n");
    for (k, d) in KEYS {
        out.push_str(&format!("  {k:width$}  {d}\n"));
    }
    out
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code: 0 success, 1 usage, 2 data, 3 numeric failure.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = Cli::command()
        .after_help(key_help())
        .try_get_matches_from(argv)
        .and_then(|m| Cli::from_arg_matches(&m));
    let cli = match parsed {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return if e.kind() == K::DisplayHelpOnMissingArgumentOrSubcommand { 1 } else { 0 };
            }
            let msg = e.to_string();
            report_error("usage", "cli", msg.lines().next().unwrap_or("invalid arguments"));
            return 1;
        }
    };
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .try_init();

    let result = resolve_config(&cli).and_then(|cfg| run_command(cli.command.into(), &cfg));
    match result {
        Ok(_) => 0,
        Err(e) => {
            let kind = e.kind();
            let name = match kind {
                ErrorKind::Usage => "usage",
                ErrorKind::Data => "data",
                ErrorKind::Numeric => "numeric",
            };
            report_error(name, e.code(), &e.to_string());
            exit_code(kind)
        }
    }
}
