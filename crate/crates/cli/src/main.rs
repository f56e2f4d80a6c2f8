use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use dsym_core::moments::moment_recursion_residual;
use dsym_core::sampling::{poly_ds_sample_exact, sample};
use dsym_core::grid::DEFAULT_POINTS;
use dsym_core::{Density, GridSpec, SymmetryParams};

mod family;
mod output;
mod verify;

use family::{matched_lognormal, FamilyArgs, FamilyKind, Model};
use output::{csv, emit, num};

/// Doubly symmetric densities on (0, inf): evaluate, compare, verify,
/// integrate and sample.
#[derive(Parser)]
#[command(name = "dsym", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a density on a log-spaced grid; CSV `y,pdf`.
    Density {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form polynomial law next to the lognormal with the same mode
    /// and ratio; CSV `y,pdf_poly,pdf_lognormal`.
    Compare {
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        k: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the property battery for a family and write a JSON report.
    Verify {
        #[command(flatten)]
        family: FamilyArgs,
        /// Multiplies every tolerance.
        #[arg(long, default_value_t = 1.0)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Moments and recursion defects; CSV `s,moment,recursion_defect`.
    Moments {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        s: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a sample, one value per line.
    Sample {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the tabulated CDF even where an exact sampler exists.
        #[arg(long)]
        tabulated: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
struct GridArgs {
    #[arg(long)]
    ymin: Option<f64>,
    #[arg(long)]
    ymax: Option<f64>,
    /// Defaults to 2001, or 20001 for `compare` so piece boundaries stay resolved.
    #[arg(long)]
    points: Option<usize>,
}

impl GridArgs {
    fn resolve(&self, around: &SymmetryParams, points: usize) -> Result<GridSpec> {
        let d = GridSpec::default_for(around);
        let lo = self.ymin.unwrap_or(d.w_min.exp());
        let hi = self.ymax.unwrap_or(d.w_max.exp());
        if !(lo > 0.0 && hi > lo) {
            bail!("need 0 < ymin < ymax, got [{lo}, {hi}]");
        }
        Ok(GridSpec::from_y_range(lo, hi, self.points.unwrap_or(points))?)
    }
}

const FIGURE_POINTS: usize = 20_001;

enum Outcome {
    Done,
    VerificationFailed,
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Density { family, grid, out } => {
            let m = family.build()?;
            let g = grid.resolve(&m.location, DEFAULT_POINTS)?;
            let rows = g.points().into_iter().map(|y| vec![y, m.density.pdf(y)]);
            emit(out.as_deref(), &csv(&["y", "pdf"], rows))?;
        }
        Command::Compare { theta, k, grid, out } => {
            let p = SymmetryParams::new(theta, k)?;
            let poly = dsym_core::densities::make_poly_ds(p)?;
            let ln = matched_lognormal(&p);
            let g = grid.resolve(&p, FIGURE_POINTS)?;
            let rows = g.points().into_iter().map(|y| vec![y, poly.pdf(y), ln.pdf(y)]);
            emit(out.as_deref(), &csv(&["y", "pdf_poly", "pdf_lognormal"], rows))?;
        }
        Command::Verify { family, tol, out } => {
            if !(tol > 0.0 && tol.is_finite()) {
                bail!("--tol must be a positive factor, got {tol}");
            }
            let m = family.build()?;
            let report = verify::run(&family, &m, tol)?;
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            emit(out.as_deref(), &text)?;
            if !report.all_pass() {
                for c in report.checks.iter().filter(|c| !c.pass) {
                    eprintln!("check {} failed: residual {} vs tolerance {}", c.name, c.residual, c.tolerance);
                }
                return Ok(Outcome::VerificationFailed);
            }
        }
        Command::Moments { family, s, out } => {
            let m = family.build()?;
            let p = m.ds.unwrap_or(m.location);
            let rec = moment_recursion_residual(m.density.as_ref(), &p, &s)?;
            let rows = rec.entries.iter().map(|e| vec![e.s, e.moment, e.defect]);
            emit(out.as_deref(), &csv(&["s", "moment", "recursion_defect"], rows))?;
        }
        Command::Sample { family, n, seed, tabulated, out } => {
            if n == 0 {
                bail!("--n must be at least 1");
            }
            let m: Model = family.build()?;
            let batch = match (m.kind, tabulated) {
                (FamilyKind::Poly, false) => poly_ds_sample_exact(m.location, n, seed)?,
                _ => sample(m.density.as_ref(), n, seed)?,
            };
            let mut text = String::with_capacity(24 * n);
            for y in &batch.values {
                text.push_str(&num(*y));
                text.push('\n');
            }
            emit(out.as_deref(), &text)?;
        }
    }
    Ok(Outcome::Done)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
