//! `sparselab`: seeded experiment runner.
//!
//! Exit status: 0 on success, 1 when a numerical step failed (the output is
//! still written, failures are listed in it), 2 on usage errors.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigFile, Settings};
use run::{is_usage_error, Experiment};

#[derive(Debug, Parser)]
#[command(name = "sparselab", version, about = "Sparse bounds and random Hilbert transform experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML file; its values override the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Active sites of one random set on `[-n, n]`.
    SampleSet,
    /// `‖T_k‖` of one realization for each scale.
    Opnorm,
    /// Concentration of `‖T_k‖` over seeds.
    Concentration,
    /// Single-scale ℓ¹ and ℓ² bounds.
    ScaleBounds,
    /// Build and verify sparse collections.
    SparseCheck,
    /// `|⟨Tf, g⟩|` against the sparse form.
    Domination,
    /// A_p and reverse Hölder characteristics of a power weight.
    WeightChar,
    /// Weight conditions for the weighted random Hilbert bound.
    WwCheck,
    /// Weighted ℓ^p norms of `H_α` and the single-scale weighted bound.
    Wnorm,
    /// `‖I_Q‖_{2→2}` across scales and its decay exponent.
    OscDecay,
    /// Bad-set measure of `K_Q`.
    Badset,
    /// Critical index and gain exponent.
    Interp,
    /// Run the experiment named in `--config`.
    Run,
}

impl Command {
    fn experiment(self) -> Option<Experiment> {
        Some(match self {
            Command::SampleSet => Experiment::SampleSet,
            Command::Opnorm => Experiment::Opnorm,
            Command::Concentration => Experiment::Concentration,
            Command::ScaleBounds => Experiment::ScaleBounds,
            Command::SparseCheck => Experiment::SparseCheck,
            Command::Domination => Experiment::Domination,
            Command::WeightChar => Experiment::WeightChar,
            Command::WwCheck => Experiment::WwCheck,
            Command::Wnorm => Experiment::Wnorm,
            Command::OscDecay => Experiment::OscDecay,
            Command::Badset => Experiment::Badset,
            Command::Interp => Experiment::Interp,
            Command::Run => return None,
        })
    }
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let file = match &cli.config {
        Some(path) => match ConfigFile::load(path) {
            Ok(f) => f,
            Err(e) => return usage(e),
        },
        None => ConfigFile::default(),
    };
    let named = match file.experiment.as_deref().map(|n| (n, Experiment::from_name(n))) {
        Some((n, None)) => return usage(format!("unknown experiment `{n}`")),
        Some((_, e)) => e,
        None => None,
    };
    let experiment = match (cli.command.experiment(), named) {
        (Some(a), Some(b)) if a != b => {
            return usage(format!("config names `{}` but the subcommand is `{}`", b.name(), a.name()))
        }
        (Some(e), _) | (None, Some(e)) => e,
        (None, None) => return usage("`run` needs a config file with an `experiment` entry"),
    };
    let settings = match cli.settings.overlay(&file.settings).resolve(experiment.default_format()) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let report = match experiment.run(&settings) {
        Ok(r) => r,
        Err(e) if is_usage_error(&e) => return usage(e),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = output::emit(&report, &settings) {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(1);
    }
    if report.failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("{} numerical failure(s) recorded in the output", report.failures.len());
        ExitCode::from(1)
    }
}
