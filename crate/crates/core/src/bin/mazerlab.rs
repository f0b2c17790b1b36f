use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mazerlab::runner::{
    load_config_with_overrides, minimal_config, parse_config, parse_override, resolve_jobs, run, RunConfig, Scenario,
};

const UNITS: &str = "Units: hbar = 1 and 2M = 1. Energies (lambda, delta, omega, k^2) are in units of the \
coupling lambda; lengths (cavity_length, z, dz) in 1/gamma with gamma^2 = lambda. Sector energies \
omega*(n + 1/2) are dropped (interaction picture), so omega is recorded but does not enter the dynamics.\n\n\
Exit codes: 0 ok, 2 config error, 3 numerical failure.";

#[derive(Parser, Debug)]
#[command(name = "mazerlab", version, about = "Mazer scattering: published closed form vs coupled-channel solution", after_help = UNITS)]
struct Cli {
    #[command(subcommand)]
    scenario: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// JSON config file; without it the scenario's defaults are used.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set delta=0.5` or `--set packet.k0=2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads (falls back to MAZERLAB_JOBS, then the processor count).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Residual of the published state under the coupled equations.
    Residual(Common),
    /// Residual norms over a list of detunings.
    ResidualSweep(Common),
    /// Stationary coupled-channel scattering probabilities.
    Stationary(Common),
    /// Wave-packet propagation and the atomic inversion W(t).
    Propagate(Common),
    /// Off-diagonal coupling left in the bare and dressed bases.
    Audit(Common),
    /// Closed-form resonant emission probabilities.
    ResonantProbabilities(Common),
}

impl Command {
    fn split(self) -> (Scenario, Common) {
        match self {
            Command::Residual(c) => (Scenario::Residual, c),
            Command::ResidualSweep(c) => (Scenario::ResidualSweep, c),
            Command::Stationary(c) => (Scenario::Stationary, c),
            Command::Propagate(c) => (Scenario::Propagate, c),
            Command::Audit(c) => (Scenario::Audit, c),
            Command::ResonantProbabilities(c) => (Scenario::ResonantProbabilities, c),
        }
    }
}

fn load(scenario: Scenario, common: &Common) -> Result<RunConfig, String> {
    let mut overrides = common
        .overrides
        .iter()
        .map(|o| parse_override(o))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    overrides.push(("scenario".into(), scenario.name().into()));
    let config = match &common.config {
        Some(path) => load_config_with_overrides(path, &overrides),
        None => {
            let base = serde_json::to_string(&minimal_config(scenario)).expect("default config serializes");
            parse_config(&base, &overrides)
        }
    };
    config.map_err(|e| match (e.line, e.column, &common.config) {
        (Some(l), Some(c), Some(p)) if !e.message.contains(" at line ") => {
            format!("{}:{l}:{c}: {}", p.display(), e.message)
        }
        _ => e.to_string(),
    })
}

fn main() -> ExitCode {
    let (scenario, common) = Cli::parse().scenario.split();
    let config = match load(scenario, &common) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("config error: {msg}");
            return ExitCode::from(2);
        }
    };
    let jobs = resolve_jobs(common.jobs);
    match run(&config, jobs) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for f in &outcome.files {
                println!("{}", f.display());
            }
            println!("{}", outcome.manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
