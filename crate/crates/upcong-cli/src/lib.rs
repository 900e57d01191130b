//! Command line harness: argument parsing, job configuration and
//! deterministic JSON or CSV reports.
//!
//! Exit codes: 0 when every cross-check agrees, 1 on a mismatch, 2 on
//! resource or precision failures, 3 on unusable input.

pub mod args;
pub mod commands;
pub mod error;
pub mod input;
pub mod report;

use std::path::Path;

pub use args::{Cli, Command, Family, Format};
pub use error::{CliError, CliResult};
pub use report::{JobConfig, Report};

pub fn run(cli: &Cli) -> CliResult<Report> {
    let mut report = match &cli.command {
        Command::Basis { k, index, precision } => commands::basis(*k, index, *precision),
        Command::UpSpace { k, index, p } => commands::up_space(*k, index, *p),
        Command::HeatCycle { form, p, precision } => commands::heat(form, *p, *precision),
        Command::Criterion { family: Family::Jacobi { k, rank, index, primes, verify } } => {
            commands::criterion_jacobi(*k, *rank, index.as_deref(), primes, *verify)
        }
        Command::Criterion { family: Family::Siegel { k, degree, primes } } => commands::criterion_siegel(*k, *degree, primes),
        Command::Restrict { form, s } => commands::restrict(form, s),
        Command::LatticeTheta { gram, degree, trace_bound, budget } => commands::theta(gram, *degree, *trace_bound, *budget),
        Command::CheckTable1 => commands::check_table1(),
        Command::Schottky { p } => commands::schottky(*p),
    }?;
    report.config.threads = cli.threads;
    report.config.format = cli.format.name().to_string();
    Ok(report)
}

/// Writes the rendered report to `--out` (plus its manifest) or stdout.
pub fn emit(cli: &Cli, report: &Report) -> CliResult<()> {
    let text = report.render(cli.format)?;
    let Some(out) = &cli.out else {
        print!("{text}");
        return Ok(());
    };
    write(out, &text)?;
    let mut manifest = out.as_os_str().to_owned();
    manifest.push(".manifest.json");
    write(Path::new(&manifest), &report::pretty(&report.manifest()))
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}
