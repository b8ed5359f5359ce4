//! Command-line front end: `simulate`, `solve`, `area`, `pvar`, `verify`.
//!
//! Exit status is 0 on success, 1 when a check fails or a run errors, and 2
//! when the configuration is invalid.

pub mod config;
pub mod run;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{resolve_numeric, ConfigError, FileConfig, Format, RunConfig, SolutionChoice};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "pathwise", version, about = "Pathwise solutions and diagnostics for cadlag drivers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// output directory (reports go to stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML configuration; flags override its keys
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// driver path CSV instead of simulating one
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// model preset
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// field preset
    #[arg(long, global = true)]
    pub field: Option<String>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub points: Option<usize>,
    #[arg(long = "max-level", global = true)]
    pub max_level: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub solution: Option<SolutionChoice>,
    /// number of largest jumps applied forward by the corrective scheme
    #[arg(long, global = true)]
    pub corrected: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a driver path from a Levy model
    Simulate(Common),
    /// Solve dY = f(Y) dX along a driver
    Solve(Common),
    /// Levy area: moment check by Monte Carlo, or dyadic areas of --input
    Area(Common),
    /// Exact p-variation of a driver
    Pvar(Common),
    /// Run an invariant suite and report PASS/FAIL per check
    Verify {
        /// suite name, or `all`
        suite: String,
        #[command(flatten)]
        common: Common,
    },
}

pub fn resolve(command: &Command) -> Result<RunConfig, ConfigError> {
    let (name, suite, c) = match command {
        Command::Simulate(c) => ("simulate", None, c),
        Command::Solve(c) => ("solve", None, c),
        Command::Area(c) => ("area", None, c),
        Command::Pvar(c) => ("pvar", None, c),
        Command::Verify { suite, common } => ("verify", Some(suite.clone()), common),
    };
    let file = match &c.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let mut model = file.model.unwrap_or_default();
    if let Some(m) = &c.model {
        model.preset = Some(m.clone());
    }
    let mut field = file.field.unwrap_or_default();
    if let Some(f) = &c.field {
        field.preset = Some(f.clone());
        field.spec = None;
    }
    let mut numeric = file.numeric.unwrap_or_default();
    numeric.p = c.p.or(numeric.p);
    numeric.delta = c.delta.or(numeric.delta);
    numeric.eps = c.eps.or(numeric.eps);
    numeric.trials = c.trials.or(numeric.trials);
    numeric.points = c.points.or(numeric.points);
    numeric.max_level = c.max_level.or(numeric.max_level);
    numeric.solution = c.solution.or(numeric.solution);
    numeric.corrected = c.corrected.or(numeric.corrected);
    let cfg = RunConfig {
        command: name.to_string(),
        suite,
        seed: c.seed.or(file.seed),
        format: c.format.or(file.format).unwrap_or_default(),
        input: c.input.clone().or(file.input),
        model,
        field,
        numeric: resolve_numeric(&numeric)?,
        out: c.out.clone().or(file.out),
    };
    // surface model/field problems as configuration errors up front
    cfg.model()?;
    if let Some(s) = &cfg.suite {
        if !verify::SUITES.contains(&s.as_str()) && s != "all" {
            return Err(ConfigError(format!("unknown suite `{s}`; expected one of {} or all", verify::SUITES.join(", "))));
        }
    }
    Ok(cfg)
}

/// Parses arguments, runs, and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let cfg = match resolve(&cli.command) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return EXIT_CONFIG;
        }
    };
    match run::run(&cfg) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAIL,
        Err(run::RunError::Config(e)) => {
            eprintln!("config error: {e}");
            EXIT_CONFIG
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAIL
        }
    }
}
