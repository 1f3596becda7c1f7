//! Command-line front end: reads a JSON scenario, runs one computation and
//! writes a CSV table.
//!
//! Exit codes: `0` success, `1` I/O failure, `2` invalid scenario, `3`
//! numerical failure, `4` a `compare` check failed.

// `!(x > 0.0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod commands;
pub mod output;
pub mod scenario;

use clap::{Parser, Subcommand};
use output::{render, Provenance, Table};
use scenario::Scenario;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Io(String),
    Schema(String),
    Numerical(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Schema(m) => write!(f, "invalid scenario: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Schema(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

pub const EXIT_COMPARE_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "dualgain", version, about = "Ruin, exit and dividend computations for a dual risk model with proportional gains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the CSV here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Override `mc.paths`.
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    /// Override `mc.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transform of the ruin probability over `outputs.s`.
    RuinLt { scenario: PathBuf },
    /// Ruin probability over the x-grid.
    RuinProb { scenario: PathBuf },
    /// `E[exp(-alpha tau)]` over the x-grid for `outputs.alpha`.
    RuinTime { scenario: PathBuf },
    /// Lattice exit transforms `rho_n`, `mu_n` and their curves.
    Exit { scenario: PathBuf },
    /// Barrier dividends `v_n` and `v_N(x)`.
    Dividends { scenario: PathBuf },
    /// Brownian-perturbed lattice: `rho_n`, `v_n` and curves.
    Brownian { scenario: PathBuf },
    /// Monte-Carlo estimates of `outputs.quantities`.
    Simulate { scenario: PathBuf },
    /// Run `outputs.checks`; exit 4 if any fails.
    Compare { scenario: PathBuf },
}

impl Command {
    fn parts(&self) -> (&'static str, &PathBuf) {
        match self {
            Command::RuinLt { scenario } => ("ruin-lt", scenario),
            Command::RuinProb { scenario } => ("ruin-prob", scenario),
            Command::RuinTime { scenario } => ("ruin-time", scenario),
            Command::Exit { scenario } => ("exit", scenario),
            Command::Dividends { scenario } => ("dividends", scenario),
            Command::Brownian { scenario } => ("brownian", scenario),
            Command::Simulate { scenario } => ("simulate", scenario),
            Command::Compare { scenario } => ("compare", scenario),
        }
    }
}

/// Result of one run: the rendered CSV and the number of failed checks.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub csv: String,
    pub failures: usize,
}

/// Parse a scenario text and apply command-line overrides.
pub fn load_scenario(text: &str, paths: Option<usize>, seed: Option<u64>) -> Result<Scenario, CliError> {
    let mut scn = Scenario::from_json(text)?;
    if let Some(p) = paths {
        scn.mc.paths = p;
    }
    if let Some(s) = seed {
        scn.mc.seed = s;
    }
    scn.validate()?;
    Ok(scn)
}

/// Run one subcommand on an already-read scenario text.
pub fn execute(command: &str, text: &str, paths: Option<usize>, seed: Option<u64>) -> Result<RunOutput, CliError> {
    let scn = load_scenario(text, paths, seed)?;
    let (table, failures): (Table, usize) = match command {
        "ruin-lt" => (commands::ruin_lt(&scn)?, 0),
        "ruin-prob" => (commands::ruin_prob(&scn)?, 0),
        "ruin-time" => (commands::ruin_time(&scn)?, 0),
        "exit" => (commands::exit(&scn)?, 0),
        "dividends" => (commands::dividends(&scn)?, 0),
        "brownian" => (commands::brownian(&scn)?, 0),
        "simulate" => (commands::simulate(&scn)?, 0),
        "compare" => {
            let rep = checks::compare(&scn)?;
            (rep.table, rep.failures)
        }
        other => return Err(CliError::Schema(format!("unknown command `{other}`"))),
    };
    let prov = Provenance::new(command, text, scn.mc.seed);
    Ok(RunOutput { csv: render(&table, &prov), failures })
}

/// Full CLI run; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let (name, path) = cli.command.parts();
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            let err = CliError::Io(format!("cannot read scenario {}: {e}", path.display()));
            eprintln!("error: {err}");
            return err.exit_code();
        }
    };
    if cli.verbose {
        eprintln!("dualgain {name}: {}", path.display());
    }
    let started = std::time::Instant::now();
    let out = match execute(name, &text, cli.paths, cli.seed) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let written = match &cli.out {
        Some(p) => std::fs::write(p, &out.csv).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(out.csv.as_bytes()).map_err(|e| CliError::Io(e.to_string()))
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    if cli.verbose {
        eprintln!("done in {:.3} s", started.elapsed().as_secs_f64());
    }
    if out.failures > 0 {
        eprintln!("compare: {} check row(s) failed", out.failures);
        return EXIT_COMPARE_FAILED;
    }
    0
}
