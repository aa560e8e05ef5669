use clap::Parser;
use conelab::exec::{init_threads, Exec};
use conelab::lab::{execute, ExperimentConfig, Kind};
use std::path::PathBuf;
use std::process::ExitCode;

/// Runs one grid experiment and writes `summary.json`, CSV and `.fld`
/// outputs. Exit status: 0 all checks passed, 1 a check failed, 2 error.
#[derive(Parser, Debug)]
#[command(name = "conelab", version)]
struct Cli {
    /// solve, contact, decay, seminorm, verify or density.
    kind: String,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized parts; overrides `seed` in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; overrides CONELAB_THREADS.
    #[arg(long)]
    threads: Option<usize>,
}

fn load(cli: &Cli) -> conelab::Result<ExperimentConfig> {
    let kind: Kind = cli.kind.parse()?;
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if let Some(k) = cfg.kind {
        if k != kind {
            return Err(conelab::Error::Config(format!(
                "configuration is for `{k:?}`, command line asks for `{}`",
                cli.kind
            )));
        }
    }
    cfg.kind = Some(kind);
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn threads(cli: &Cli) -> Result<Option<usize>, String> {
    if let Some(n) = cli.threads {
        return Ok(Some(n));
    }
    match std::env::var("CONELAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| format!("CONELAB_THREADS must be a positive integer, got `{v}`")),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match threads(&cli) {
        Ok(Some(0)) => {
            eprintln!("error: thread count must be at least 1");
            return ExitCode::from(2);
        }
        Ok(Some(n)) => init_threads(n),
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(execute(&cfg, Exec::Parallel) as u8)
}
