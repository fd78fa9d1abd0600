//! Command-line front end. Every subcommand reads one JSON [`RunConfig`]
//! and writes a JSON or CSV document; exit status is 0 on success, 1 when a
//! numerical contract fails (for example a truncation leak above the hard
//! limit) and 2 for configuration errors.

mod commands;
mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    cmd_compile_cost, cmd_cutoff_plan, cmd_fig2, cmd_hybrid, cmd_overlap, cmd_perm, cmd_qudit_basis, cmd_two_copy,
    Report,
};
pub use config::{Component, Family, Format, MSpec, OutputSpec, PlanChoice, RunConfig, StateEntry, StateSpec};

use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "cvswap", version, about = "Ancilla-free SWAP-test family on a truncated Fock-space simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parity (SWAP) overlap estimate between prepared states.
    Overlap(CommonArgs),
    /// Detector cutoff M for a target systematic error.
    CutoffPlan(CommonArgs),
    /// Closed form vs simulated truncated SWAP expectation for squeezed pairs.
    Fig2(CommonArgs),
    /// PERM test estimate of tr(rho_0 ... rho_{L-1}).
    Perm(CommonArgs),
    /// Two-copy test of a purification register.
    TwoCopy(CommonArgs),
    /// Variational-compiling cost of a given circuit pair.
    CompileCost(CommonArgs),
    /// SWAP test on qubit (x) CV-mode states.
    Hybrid(CommonArgs),
    /// Qudit SWAP eigenbasis and its verified eigenvalue multiplicities.
    QuditBasis(CommonArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Writes the photon patterns of the first run as CSV.
    #[arg(long)]
    dump_shots: Option<PathBuf>,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::LeakTooLarge { .. } | Error::ZeroNorm | Error::TooLarge { .. } | Error::NotUnitary(_) => EXIT_NUMERICAL,
        Error::Csv(_) => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

fn execute(command: &Command) -> Result<()> {
    let (args, run): (&CommonArgs, fn(&RunConfig) -> Result<Report>) = match command {
        Command::Overlap(a) => (a, cmd_overlap),
        Command::CutoffPlan(a) => (a, cmd_cutoff_plan),
        Command::Fig2(a) => (a, cmd_fig2),
        Command::Perm(a) => (a, cmd_perm),
        Command::TwoCopy(a) => (a, cmd_two_copy),
        Command::CompileCost(a) => (a, cmd_compile_cost),
        Command::Hybrid(a) => (a, cmd_hybrid),
        Command::QuditBasis(a) => (a, cmd_qudit_basis),
    };
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = Some(s);
    }
    cfg.keep_shots = args.dump_shots.is_some();
    let report = run(&cfg)?;

    if let Some(w) = report.json.get("warnings").and_then(|w| w.as_array()) {
        for msg in w {
            eprintln!("warning: {}", msg.as_str().unwrap_or_default());
        }
    }
    let output = cfg.output.clone().unwrap_or_default();
    let format = args.format.or(output.format).unwrap_or(Format::Json);
    let bytes = match format {
        Format::Json => {
            let mut b = serde_json::to_vec_pretty(&report.json)?;
            b.push(b'\n');
            b
        }
        Format::Csv => report.csv()?,
    };
    match args.out.clone().or(output.path.map(PathBuf::from)) {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    if let (Some(path), Some(shots)) = (&args.dump_shots, &report.shots_csv) {
        std::fs::write(path, shots)?;
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
