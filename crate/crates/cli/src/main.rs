//! `jcl`: spectra, scattering tables and steady-state currents from a TOML config.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod csv;
mod exit;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use config::{RunInputs, SweepAxis};
use exit::{Failure, Outcome};

#[derive(Debug, Parser)]
#[command(name = "jcl", version, about = "Transport through a two-level dot coupled to a photon mode")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write results here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Relative quadrature tolerance, overriding the file.
    #[arg(long, global = true, value_name = "REL")]
    tol: Option<f64>,

    /// Photon cutoff: used directly by spectrum, smatrix and validate, and as
    /// the starting point of the convergence policy for current commands.
    #[arg(long, global = true, value_name = "N")]
    nph: Option<usize>,

    /// Sweep axis for the `sweep` command.
    #[arg(long, global = true, value_name = "KEY:START:STOP:STEPS")]
    sweep: Option<String>,

    /// Also write H_D in both bases as CSV next to the output.
    #[arg(long, global = true)]
    debug_dump_matrices: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
enum Command {
    /// Numeric versus closed-form eigenvalues of the truncated dot-photon block.
    Spectrum,
    /// Cross sections between open channels over an energy grid.
    Smatrix,
    /// One current report as JSON.
    Currents,
    /// Current reports along a parameter axis.
    Sweep,
    /// Currents against the photon cutoff.
    Convergence,
    /// Structural checks on the given config, or on the shipped suite.
    Validate,
}

const DEFAULT_SUITE: [(&str, &str); 3] = [
    ("generic", include_str!("../../../configs/generic.toml")),
    ("mirror_symmetric", include_str!("../../../configs/mirror_symmetric.toml")),
    ("light_absorbing", include_str!("../../../configs/light_absorbing.toml")),
];

fn apply_overrides(mut inputs: RunInputs, cli: &Cli) -> Outcome<RunInputs> {
    if let Some(tol) = cli.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Failure::config(anyhow!("--tol must be positive, got {tol}")));
        }
        inputs.numerics.rel_tol = tol;
    }
    if cli.nph == Some(0) {
        return Err(Failure::config(anyhow!("--nph must be at least 1")));
    }
    inputs.nph = cli.nph;
    Ok(inputs)
}

fn load_inputs(cli: &Cli) -> Outcome<RunInputs> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Failure::config(anyhow!("--config PATH is required for this command")))?;
    let inputs = config::load(path).map_err(Failure::config)?;
    apply_overrides(inputs, cli)
}

fn configure_threads() -> Outcome<()> {
    let Ok(raw) = std::env::var("JCL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("JCL_THREADS must be a non-negative integer, got `{raw}`"))
        .map_err(Failure::config)?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(Failure::config)?;
    }
    Ok(())
}

fn emit(text: &str, out: Option<&Path>) -> Outcome<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::numerical),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                // a closed pipe (e.g. `| head`) is not an error
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => other.map_err(Failure::numerical),
            }
        }
    }
}

fn run(cli: &Cli) -> Outcome<()> {
    configure_threads()?;
    let output = if cli.command == Command::Validate && cli.config.is_none() {
        let suite = DEFAULT_SUITE
            .iter()
            .map(|(name, text)| {
                let inputs = config::parse(text).with_context(|| format!("shipped config {name}"));
                Ok((name.to_string(), apply_overrides(inputs.map_err(Failure::config)?, cli)?))
            })
            .collect::<Outcome<Vec<_>>>()?;
        commands::validate_suite(&suite)?
    } else {
        let inputs = load_inputs(cli)?;
        if cli.debug_dump_matrices {
            let dir = cli
                .out
                .as_deref()
                .and_then(Path::parent)
                .filter(|p| !p.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            commands::dump_matrices(&inputs, dir)?;
        }
        match cli.command {
            Command::Spectrum => commands::spectrum(&inputs)?,
            Command::Smatrix => commands::smatrix_table(&inputs)?,
            Command::Currents => commands::currents(&inputs)?,
            Command::Sweep => {
                let spec = cli
                    .sweep
                    .as_deref()
                    .ok_or_else(|| Failure::config(anyhow!("sweep needs --sweep KEY:START:STOP:STEPS")))?;
                let axis = SweepAxis::parse(spec).map_err(Failure::config)?;
                commands::sweep(&inputs, &axis)?
            }
            Command::Convergence => commands::convergence(&inputs)?,
            Command::Validate => {
                let name = cli.config.as_deref().map(|p| p.display().to_string()).unwrap_or_default();
                commands::validate_suite(&[(name, inputs)])?
            }
        }
    };
    emit(&output.text, cli.out.as_deref())?;
    match output.failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(exit::CONFIG);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
