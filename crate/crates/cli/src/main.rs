use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use sderiv_core::harness::{builtin_catalog, run, CatalogEntry, Expectation, GridSpec, Report, RunConfig};
use sderiv_core::PowerSeries;

/// Numerical checks of quaternionic S-derivability.
#[derive(Parser, Debug)]
#[command(name = "sderiv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the verification harness.
    Check(CheckArgs),
    /// List the builtin functions and their expectations.
    List,
}

#[derive(clap::Args, Debug)]
struct CheckArgs {
    /// Builtin name or `series:<path>`; repeatable. Defaults to every builtin.
    #[arg(long = "function", short = 'f', value_name = "NAME")]
    functions: Vec<String>,
    /// Grid: `default` or e.g. `box=-1.5,1.5,5;axis=-1.5,1.5,25;ball=2,100;band=1e-6`.
    #[arg(long, default_value = "default")]
    grid: String,
    /// Base finite-difference step, scaled by max(1, |q|).
    #[arg(long, default_value_t = sderiv_core::diff::DEFAULT_STEP)]
    step: f64,
    /// Tolerance for finite-difference residuals.
    #[arg(long, default_value_t = sderiv_core::diff::TOL_FD)]
    tol: f64,
    /// Tolerance for residuals built from exact partials.
    #[arg(long, default_value_t = sderiv_core::diff::TOL_EXACT)]
    tol_exact: f64,
    /// Seed for ball samples, probe directions and slice angles.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON report here (`-` for stdout).
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Write one CSV line per row here.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Include convergence traces in the report.
    #[arg(long)]
    trace: bool,
}

fn select(names: &[String]) -> anyhow::Result<Vec<CatalogEntry>> {
    let builtin = builtin_catalog();
    if names.is_empty() {
        return Ok(builtin);
    }
    names
        .iter()
        .map(|name| {
            if let Some(path) = name.strip_prefix("series:") {
                let series = PowerSeries::load(path).with_context(|| format!("loading series {path}"))?;
                let notes = format!("order {}, radius {}", series.order(), series.radius());
                return Ok(CatalogEntry::from_series(name.clone(), series, Expectation::SDerivable, notes));
            }
            match builtin.iter().find(|e| &e.name == name) {
                Some(e) => Ok(e.clone()),
                None => bail!("unknown function {name:?}; see `sderiv list`"),
            }
        })
        .collect()
}

fn write_to(path: &PathBuf, body: impl FnOnce(&mut dyn Write) -> sderiv_core::Result<()>) -> anyhow::Result<()> {
    if path.as_os_str() == "-" {
        let mut out = io::stdout().lock();
        body(&mut out)?;
        return Ok(());
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    body(&mut out)?;
    out.flush()?;
    Ok(())
}

fn print_summary(report: &Report, mut out: impl Write) -> io::Result<()> {
    writeln!(out, "grid {}", report.grid)?;
    writeln!(
        out,
        "{:<24} {:<24} {:>7} {:>7} {:>7} {:>8}  expectation",
        "function", "expects", "pass", "fail", "skip", "nonconv"
    )?;
    for f in &report.functions {
        let s = &f.summary;
        writeln!(
            out,
            "{:<24} {:<24} {:>7} {:>7} {:>7} {:>8}  {}",
            f.name,
            f.expectation.to_string(),
            s.passed,
            s.failed,
            s.skipped,
            s.nonconvergent,
            if s.expectation_met { "met" } else { "VIOLATED" }
        )?;
        for v in &s.violation_examples {
            writeln!(out, "    {v}")?;
        }
        if s.violations > s.violation_examples.len() {
            writeln!(out, "    ... {} more", s.violations - s.violation_examples.len())?;
        }
    }
    let t = &report.summary;
    writeln!(
        out,
        "{} functions, {} rows: {} pass, {} fail, {} skipped; {} violations",
        t.functions, t.rows, t.passed, t.failed, t.skipped, t.violations
    )
}

fn check(args: CheckArgs) -> anyhow::Result<ExitCode> {
    let grid: GridSpec = args.grid.parse::<GridSpec>()?.with_seed(args.seed);
    let config =
        RunConfig { step: args.step, tol: args.tol, tol_exact: args.tol_exact, seed: args.seed, traces: args.trace };
    let catalog = select(&args.functions)?;
    let report = run(&catalog, &grid, &config)?;

    let report_on_stdout = args.report.as_ref().is_some_and(|p| p.as_os_str() == "-");
    if let Some(path) = &args.report {
        write_to(path, |w| report.write_json(w))?;
    }
    if let Some(path) = &args.csv {
        write_to(path, |w| report.write_csv(w))?;
    }
    if report_on_stdout {
        print_summary(&report, io::stderr().lock())?;
    } else {
        print_summary(&report, io::stdout().lock())?;
    }
    Ok(ExitCode::from(report.exit_code() as u8))
}

fn list() -> ExitCode {
    for e in builtin_catalog() {
        println!("{:<12} {:<18} {}", e.name, e.expectation.to_string(), e.notes);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::List => list(),
        Command::Check(args) => match check(args) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
    }
}
