//! Command-line front end: argument parsing, configuration, CSV ingest and
//! emission, and the run manifest.
//!
//! [`run`] is the whole program; `main` only installs the logger and exits
//! with its return value, which keeps every exit path testable in-process.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use otkit::exec::Execution;

pub mod args;
mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod output;
pub mod units;

use args::{Cli, Command};
use config::RunConfig;
use error::{CliError, CliResult, EXIT_OK};
use output::{sha256_hex, unix_ms, FileRecord, RunContext, RunManifest, MANIFEST_FILE};

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let recorded = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, recorded, None) {
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("otkit: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command line and returns the output directory.
///
/// `config_text` replaces the `--config` file when replaying a manifest.
pub fn execute(cli: &Cli, recorded_args: Vec<String>, config_text: Option<&str>) -> CliResult<PathBuf> {
    if let Command::Replay { manifest } = &cli.command {
        return replay(manifest, &cli.global.out);
    }
    let g = &cli.global;
    let mut config_input = None;
    let cfg = match (config_text, &g.config) {
        (Some(text), _) => RunConfig::parse(text, "manifest configuration")?,
        (None, Some(path)) => {
            let (cfg, bytes) = RunConfig::load(path)?;
            config_input = Some(FileRecord {
                path: path.display().to_string(),
                sha256: sha256_hex(&bytes),
                bytes: bytes.len() as u64,
            });
            cfg
        }
        (None, None) => RunConfig::default(),
    };
    let effective = cfg.effective()?;
    let workers = g.workers.map(|n| n.get());
    let exec = if workers == Some(1) { Execution::Sequential } else { Execution::default() };

    let started = unix_ms();
    let mut ctx = RunContext::new(g.out.clone(), g.units, g.strict, g.seed, exec)?;
    with_workers(workers, || dispatch(&cli.command, &cfg, &mut ctx))?;

    let (mut inputs, outputs) = ctx.into_records();
    if let Some(rec) = config_input {
        inputs.insert(0, rec);
    }
    let manifest = RunManifest {
        toolkit: "otkit".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        args: recorded_args,
        seed: g.seed,
        units: g.units,
        workers,
        strict: g.strict,
        config_sha256: sha256_hex(effective.as_bytes()),
        config: effective,
        started_unix_ms: started,
        finished_unix_ms: unix_ms(),
        inputs,
        outputs,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    let path = g.out.join(MANIFEST_FILE);
    std::fs::write(&path, bytes).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    Ok(g.out.clone())
}

#[cfg(feature = "parallel")]
fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> CliResult<R> + Send) -> CliResult<R> {
    match workers {
        Some(n) if n > 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config(format!("cannot start {n} workers: {e}")))?
            .install(f),
        _ => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_workers<R: Send>(_workers: Option<usize>, f: impl FnOnce() -> CliResult<R> + Send) -> CliResult<R> {
    f()
}

fn dispatch(command: &Command, cfg: &RunConfig, ctx: &mut RunContext) -> CliResult<()> {
    match command {
        Command::Tft { action } => commands::tft::run(action, &cfg.tft, ctx),
        Command::Opbt { action } => commands::opbt::run(action, &cfg.opbt, ctx),
        Command::Oect { action } => commands::oect::run(action, &cfg.oect, ctx),
        Command::Impedance { action } => commands::impedance::run(action, &cfg.impedance, ctx),
        Command::Reservoir { action } => commands::reservoir::run(action, &cfg.reservoir, ctx),
        Command::Synapse { action } => commands::synapse::run(action, &cfg.synapse, ctx),
        Command::Replay { .. } => Err(CliError::usage("replay cannot be nested")),
    }
}

/// Re-runs the invocation recorded in a manifest, using its embedded
/// configuration, after checking that the recorded inputs are unchanged.
fn replay(manifest_path: &Path, out: &Path) -> CliResult<PathBuf> {
    let m = RunManifest::load(manifest_path)?;
    let config_file = m.inputs.first().filter(|_| m.args.iter().any(|a| a == "--config" || a.starts_with("--config=")));
    for rec in &m.inputs {
        if Some(rec) == config_file {
            continue;
        }
        let bytes = std::fs::read(&rec.path).map_err(|e| CliError::io(format!("recorded input {}: {e}", rec.path)))?;
        if sha256_hex(&bytes) != rec.sha256 {
            return Err(CliError::io(format!("recorded input {} has changed since the run", rec.path)));
        }
    }
    let argv = std::iter::once("otkit".to_string()).chain(m.args.iter().cloned());
    let mut cli = Cli::try_parse_from(argv).map_err(|e| CliError::usage(format!("manifest arguments: {e}")))?;
    if matches!(cli.command, Command::Replay { .. }) {
        return Err(CliError::usage("manifest records a replay"));
    }
    cli.global.out = out.to_path_buf();
    cli.global.config = None;
    execute(&cli, m.args.clone(), Some(&m.config))
}
