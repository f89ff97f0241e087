//! `dyadic-bloom`: runs diagnostics from JSON experiment configs and writes
//! a JSON summary, CSV curves and a replay copy of the effective config.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dyadic_bloom::{Error, Result};

use crate::config::ExperimentConfig;
use crate::output::Artifacts;

#[derive(Parser)]
#[command(
    name = "dyadic-bloom",
    version,
    about = "Two-weight harmonic analysis experiments on dyadic grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; falls back to the config's `out`, then
    /// `dyadic-bloom-out`.
    #[arg(long, global = true, env = "DYADIC_BLOOM_OUT")]
    out: Option<PathBuf>,
    /// Overrides the grid depth L.
    #[arg(long, global = true)]
    depth: Option<u32>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Sparse family file, overriding `settings.family`.
    #[arg(long, global = true)]
    family: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Run the diagnostic named in the config.
    Run,
    GenWeight,
    ApConst,
    Bmo,
    VmoModuli,
    SparseBuild,
    SparseVerify,
    SparseApply,
    OpApply,
    Norm,
    Dominate,
    Profile,
    Falsify,
}

impl Command {
    fn name(self) -> Option<&'static str> {
        Some(match self {
            Command::Run => return None,
            Command::GenWeight => "gen_weight",
            Command::ApConst => "ap_const",
            Command::Bmo => "bmo",
            Command::VmoModuli => "vmo_moduli",
            Command::SparseBuild => "sparse_build",
            Command::SparseVerify => "sparse_verify",
            Command::SparseApply => "sparse_apply",
            Command::OpApply => "op_apply",
            Command::Norm => "norm",
            Command::Dominate => "dominate",
            Command::Profile => "profile",
            Command::Falsify => "falsify",
        })
    }
}

const DEFAULT_OUT: &str = "dyadic-bloom-out";

const EXIT_VIOLATION: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;
const EXIT_UNKNOWN: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvariantViolation(_) => EXIT_VIOLATION,
        Error::Precondition(_) => EXIT_PRECONDITION,
        Error::Unknown(_) => EXIT_UNKNOWN,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                clap::error::ErrorKind::InvalidSubcommand => EXIT_UNKNOWN,
                _ => 1,
            });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| dyadic_bloom::error::invalid(format!("thread pool: {e}")))?;
    }
    let default_out = PathBuf::from(DEFAULT_OUT);
    let report = match (&cli.config, cli.command) {
        (None, Command::SparseVerify) => {
            let path = cli.family.as_ref().ok_or_else(|| {
                dyadic_bloom::error::invalid("sparse-verify needs --family or --config")
            })?;
            let art = Artifacts::create(cli.out.as_ref().unwrap_or(&default_out))?;
            commands::verify_file(path, &art)?
        }
        (None, _) => return Err(dyadic_bloom::error::invalid("--config is required")),
        (Some(path), cmd) => {
            let mut cfg = ExperimentConfig::load(path)?;
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(d) = cli.depth {
                cfg.grid.depth = d;
            }
            if let Some(f) = &cli.family {
                cfg.settings.family = Some(f.clone());
            }
            let name = match cmd.name() {
                Some(n) => n,
                None => commands::canonical(
                    cfg.diagnostic
                        .as_deref()
                        .ok_or_else(|| Error::Unknown("config names no diagnostic".into()))?,
                )?,
            };
            cfg.diagnostic = Some(name.to_string());
            let art = Artifacts::create(
                cli.out
                    .as_ref()
                    .or(cfg.out.as_ref())
                    .unwrap_or(&default_out),
            )?;
            art.replay(&cfg)?;
            commands::execute(name, &cfg, &art)?
        }
    };
    println!("{}", report.headline);
    if let Some(v) = report.violation {
        eprintln!("error: {v}");
        return Ok(EXIT_VIOLATION);
    }
    Ok(0)
}
