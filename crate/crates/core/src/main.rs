use std::path::PathBuf;
use std::process::ExitCode;

use boussinesq_core::cli::{self, CommandOutcome};
use boussinesq_core::{Result, RunConfig};
use clap::{Args, Parser, Subcommand};

/// Solitary waves of a fifth-order Boussinesq system: compute, verify and
/// propagate.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// Log solver progress (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Output directory. Defaults to `<root>/<config stem>-<command>` with
    /// the root taken from BOUSSINESQ_OUT, or `runs` when unset.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Stabilized fixed-point solve for a homogeneous power nonlinearity.
    SolveHomogeneous(Common),
    /// Cosine-collocation Newton solve for general nonlinearities.
    SolveNonhomogeneous(Common),
    /// Propagate a stored profile and compare with the translated wave.
    Propagate {
        #[command(flatten)]
        common: Common,
        /// Profile CSV (`x,psi,v`) or coefficients JSON from a previous solve.
        #[arg(long)]
        profile: PathBuf,
    },
    /// Solve over a grid of velocities (and exponents).
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Points solved concurrently.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

fn out_dir(common: &Common, command: &str) -> PathBuf {
    if let Some(out) = &common.out {
        return out.clone();
    }
    let root = std::env::var_os("BOUSSINESQ_OUT").map_or_else(|| PathBuf::from("runs"), PathBuf::from);
    let stem = common
        .config
        .file_stem()
        .map_or_else(|| "run".to_string(), |s| s.to_string_lossy().into_owned());
    root.join(format!("{stem}-{command}"))
}

fn run(cli: &Cli) -> Result<CommandOutcome> {
    let load = |c: &Common| RunConfig::load(&c.config);
    match &cli.command {
        Command::SolveHomogeneous(c) => {
            cli::cmd_solve_homogeneous(&load(c)?, Some(c.config.as_path()), &out_dir(c, "solve-homogeneous"))
        }
        Command::SolveNonhomogeneous(c) => {
            cli::cmd_solve_nonhomogeneous(&load(c)?, Some(c.config.as_path()), &out_dir(c, "solve-nonhomogeneous"))
        }
        Command::Propagate { common, profile } => cli::cmd_propagate(
            &load(common)?,
            Some(common.config.as_path()),
            profile,
            &out_dir(common, "propagate"),
        ),
        Command::Sweep { common, workers } => cli::cmd_sweep(
            &load(common)?,
            Some(common.config.as_path()),
            &out_dir(common, "sweep"),
            *workers,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = run(&cli);
    match &result {
        Ok(o) => println!("{}: {}", o.out_dir.display(), o.message),
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(cli::exit_code(&result))
}
