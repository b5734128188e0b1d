//! `nmpgap`: run potential-curve, error-rate and scheduling experiments.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::Config;

#[derive(Parser)]
#[command(name = "nmpgap", version, about = "Decoding-efficiency experiments for polar and LDPC codes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for Monte Carlo trials.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Potential curve against message count (CSV).
    Curve(Common),
    /// Block and bit error rates over an Eb/N0 sweep (CSV).
    Bler(Common),
    /// Rank decoders by messages to convergence (CSV).
    Compare(Common),
    /// Greedy schedule search with a τ report against layered and flooding.
    Schedule {
        #[command(flatten)]
        common: Common,
        /// Message budget; overrides `[schedule] horizon`.
        #[arg(long)]
        horizon: Option<usize>,
    },
}

fn load(c: &Common) -> Result<Config> {
    let mut cfg = Config::load(&c.config)?;
    cfg.seed = c.seed.or(cfg.seed);
    cfg.threads = c.threads.or(cfg.threads);
    if let Some(out) = &c.out {
        cfg.out = Some(out.clone());
    } else if let Some(out) = &cfg.out {
        cfg.out = Some(cfg.resolve(out));
    }
    Ok(cfg)
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Curve(c) => {
            let cfg = load(&c)?;
            emit(cfg.out.as_ref(), &commands::cmd_curve(&cfg)?)
        }
        Cmd::Bler(c) => {
            let cfg = load(&c)?;
            emit(cfg.out.as_ref(), &commands::cmd_bler(&cfg)?)
        }
        Cmd::Compare(c) => {
            let cfg = load(&c)?;
            emit(cfg.out.as_ref(), &commands::cmd_compare(&cfg)?)
        }
        Cmd::Schedule { common, horizon } => {
            let cfg = load(&common)?;
            let (schedule, report) = commands::cmd_schedule(&cfg, horizon)?;
            match &cfg.out {
                Some(p) => {
                    emit(Some(p), &schedule)?;
                    let mut rp = p.clone().into_os_string();
                    rp.push(".tau.csv");
                    emit(Some(&PathBuf::from(rp)), &report)?;
                }
                None => emit(None, &schedule)?,
            }
            eprint!("{report}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
