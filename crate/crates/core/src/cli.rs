//! Command-line front end. The binary only forwards `std::env::args` here.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::effcap::Variant;
use crate::error::{Error, Result};
use crate::report::{self, ValidationHooks};
use crate::sim::SensingMode;
use crate::sweep::{self, Preset};

/// Exit code for a config that fails to parse or validate.
pub const EXIT_INVALID_CONFIG: i32 = 2;
/// Exit code for runtime errors and failed validation checks.
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "crharq", version, about = "Throughput and effective capacity of a sensing HARQ-CC link")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic metrics for the configured operating point.
    Analyze(Common),
    /// CSV sweep over one parameter, from the config or a figure preset.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Figure preset: fig1, fig2 or fig3.
        #[arg(long, value_parser = parse::<Preset>)]
        preset: Option<Preset>,
    },
    /// Monte Carlo run with the analytic values alongside.
    Simulate(Common),
    /// Analytic-versus-simulation checks; exits 1 if any fails.
    Validate(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML config; the baseline is used when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Simulation seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Effective-capacity polynomial: paper or renewal.
    #[arg(long, value_parser = parse::<Variant>)]
    pub variant: Option<Variant>,
    /// Simulated frames.
    #[arg(long)]
    pub frames: Option<u64>,
    /// Simulated sensing: statistical or physical.
    #[arg(long, value_parser = parse::<SensingMode>)]
    pub mode: Option<SensingMode>,
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Common {
    /// Loads the config and applies the command-line overrides.
    pub fn resolve(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        if let Some(seed) = self.seed {
            cfg.simulation.seed = seed;
        }
        if let Some(frames) = self.frames {
            cfg.simulation.frames = frames;
        }
        if let Some(mode) = self.mode {
            cfg.simulation.sensing_mode = mode;
        }
        if let Some(variant) = self.variant {
            cfg.model.variant = variant;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// `<out>` with its extension replaced by `meta.json`.
pub fn meta_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

fn run_sweep(common: &Common, preset: Option<Preset>) -> Result<()> {
    let cfg = common.resolve()?;
    let output = match preset {
        Some(p) => sweep::run_preset(&cfg, p)?,
        None if !cfg.sweep.is_empty() => sweep::run_specs(&cfg, cfg.sweep.clone(), Vec::new())?,
        None => return Err(Error::Config("no [[sweep]] entries in the config and no --preset given".into())),
    };
    let mut csv = Vec::new();
    sweep::write_csv(&output.rows, &mut csv)?;
    let meta = report::to_json(&report::sweep_meta(&cfg, &output))?;
    match &common.out {
        Some(path) => {
            std::fs::write(path, &csv)?;
            std::fs::write(meta_path(path), meta)?;
        }
        None => {
            std::io::stdout().write_all(&csv)?;
            for a in &output.goodput_argmax {
                eprintln!("{}: goodput peaks at n = {} ({:.6} bits/channel use)", a.series, a.packet_bits, a.goodput_bcu);
            }
        }
    }
    Ok(())
}

/// Runs one command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Analyze(c) => c
            .resolve()
            .and_then(|cfg| report::analyze(&cfg))
            .and_then(|r| report::to_json(&r))
            .and_then(|s| emit(c.out.as_deref(), &s))
            .map(|_| true),
        Command::Sweep { common, preset } => run_sweep(common, *preset).map(|_| true),
        Command::Simulate(c) => c
            .resolve()
            .and_then(|cfg| report::simulate_report(&cfg))
            .and_then(|r| report::to_json(&r))
            .and_then(|s| emit(c.out.as_deref(), &s))
            .map(|_| true),
        Command::Validate(c) => c.resolve().and_then(|cfg| {
            let r = report::validate(&cfg, &ValidationHooks::default())?;
            for check in &r.checks {
                let verdict = if check.passed { "PASS" } else { "FAIL" };
                eprintln!("{verdict} {} ({:.3e} vs {:.1e}) {}", check.name, check.measured, check.tolerance, check.detail);
            }
            emit(c.out.as_deref(), &report::to_json(&r)?)?;
            Ok(r.passed)
        }),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => EXIT_FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidParam { .. } => EXIT_INVALID_CONFIG,
                _ => EXIT_FAILURE,
            }
        }
    }
}
