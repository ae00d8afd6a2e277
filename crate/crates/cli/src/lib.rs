//! Command-line front end: scenario files in, CSV tables, JSON records and
//! run logs out.
//!
//! ```text
//! hamcurv validate SCENARIO [--override k=v]...
//! hamcurv run SCENARIO [--override k=v]... [--out DIR] [--emit-plot-data] [--seed N]
//! ```
//!
//! Exit status: 0 on success, 1 when a certificate reports failed hypotheses
//! or a failed conclusion (the certificate is still written), 2 on errors.

pub mod error;
pub mod model;
pub mod output;
pub mod scenario;
pub mod tasks;
pub mod validate;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use error::CliError;
pub use scenario::{load_scenario, parse_scenario, Scenario};

#[derive(Debug, Parser)]
#[command(name = "hamcurv", version, about = "Curvature and hyperbolicity checks for Hamiltonian flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and statically check a scenario without running it.
    Validate {
        scenario: PathBuf,
        /// `key.path=value`, applied before validation. Repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run the scenario's task and write its artifacts.
    Run {
        scenario: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write `(x, y)` series for plotting.
        #[arg(long)]
        emit_plot_data: bool,
        /// Seed for sampled choices; overrides the scenario's `seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// File stem derived from the scenario name.
fn stem(s: &Scenario) -> String {
    let base = s.output.prefix.clone().unwrap_or_else(|| s.name.clone());
    let clean: String =
        base.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect();
    if clean.is_empty() {
        "scenario".into()
    } else {
        clean
    }
}

/// Validates and returns the scenario together with its model.
fn prepare(path: &Path, overrides: &[String]) -> Result<(Scenario, hamcurv_core::HamiltonianModel), CliError> {
    let s = load_scenario(path, overrides)?;
    let diags = validate::diagnostics(&s);
    if !diags.is_empty() {
        return Err(CliError::Invalid(diags));
    }
    let model = model::build_model(&s.system).map_err(CliError::Invalid)?;
    Ok((s, model))
}

/// Runs the command line with explicit arguments and streams; returns the
/// exit status.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 2;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match cli.command {
        Command::Validate { scenario, overrides } => match load_scenario(&scenario, &overrides) {
            Ok(s) => {
                let diags = validate::diagnostics(&s);
                if diags.is_empty() {
                    let _ = writeln!(out, "ok");
                    0
                } else {
                    for d in diags {
                        let _ = writeln!(out, "error: {d}");
                    }
                    2
                }
            }
            Err(e) => {
                let _ = writeln!(out, "error: {e}");
                2
            }
        },
        Command::Run { scenario, overrides, out: dir, emit_plot_data, seed } => {
            let result = prepare(&scenario, &overrides).and_then(|(s, model)| {
                let seed = seed.unwrap_or(s.seed);
                let artifacts = tasks::run_task(&s, &model, seed)?;
                let dir = dir.or_else(|| s.output.dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| ".".into());
                let written = output::write_artifacts(&dir, &stem(&s), &artifacts, emit_plot_data)?;
                Ok((artifacts, written))
            });
            match result {
                Ok((a, written)) => {
                    let _ = write!(out, "{}", a.log);
                    for p in written {
                        let _ = writeln!(out, "wrote {}", p.display());
                    }
                    a.status.exit_code()
                }
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    2
                }
            }
        }
    }
}
