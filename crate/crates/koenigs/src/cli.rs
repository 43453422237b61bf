//! Argument parsing and dispatch.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use koenigs_core::montecarlo::SimConfig;
use koenigs_core::series::Summation;
use koenigs_core::BranchingModel;

use crate::check::{self, CheckReport, McParams, CROSS_GRID};
use crate::error::{exit, CliError, CliResult};
use crate::eval::{eval, EvalKind, EvalRequest, MethodArg};
use crate::figures::write_figure;
use crate::params::{parse_lambda, Grid};
use crate::sim::{self, SimReport};

#[derive(Debug, Parser)]
#[command(name = "koenigs", version, about = "Koenigs functions of the Poisson Markov branching process")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct ModelArgs {
    /// Offspring mean, decimal or fraction n/d.
    #[arg(long, value_parser = lambda_arg)]
    pub lambda: Option<f64>,
    /// Death rate K.
    #[arg(long, default_value_t = 1.0, value_parser = lambda_arg)]
    pub bigk: f64,
    /// Number of derivatives kept in series representations.
    #[arg(long, default_value_t = koenigs_core::DEFAULT_ORDER)]
    pub order: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate one function as CSV on standard output.
    Eval {
        #[arg(value_enum)]
        kind: EvalKind,
        #[command(flatten)]
        model: ModelArgs,
        /// lo:hi:step; defaults to 0:0.95:0.05 (logQ: 19 interior points of (q, 1)).
        #[arg(long, value_parser = grid_arg)]
        grid: Option<Grid>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Time for F along the s-grid.
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Time grid for F at fixed --s.
        #[arg(long, value_parser = grid_arg)]
        tgrid: Option<Grid>,
        /// Starting point for F along --tgrid.
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        /// Rows for lcl and measure.
        #[arg(long, default_value_t = crate::eval::DEFAULT_PMF_ROWS)]
        n: usize,
    },
    /// Write the curves of one figure and a manifest into --out.
    Figures {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=7))]
        figure: u8,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = koenigs_core::DEFAULT_ORDER)]
        order: usize,
    },
    /// Run a consistency suite; prints a JSON report, exits 1 on failure.
    Check {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_parser = grid_arg)]
        grid: Option<Grid>,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Simulate the process; prints a JSON summary.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        mc: McArgs,
        /// Extra times at which to record the population.
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<f64>,
    },
}

#[derive(Debug, clap::Args)]
pub struct McArgs {
    /// Horizon of the Monte Carlo suites.
    #[arg(long = "t", default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 100_000)]
    pub replicates: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Population cap; 200 for lambda > 1, 10^6 otherwise.
    #[arg(long)]
    pub cap: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Crossmethod,
    Schroeder,
    Abel,
    Montecarlo,
    Lcl,
}

fn lambda_arg(text: &str) -> Result<f64, String> {
    parse_lambda(text).map_err(|e| e.to_string())
}

fn grid_arg(text: &str) -> Result<Grid, String> {
    text.parse::<Grid>().map_err(|e| e.to_string())
}

fn lambda_or(model: &ModelArgs, default: f64) -> f64 {
    model.lambda.unwrap_or(default)
}

fn mc_params(model: &ModelArgs, mc: &McArgs, default_lambda: f64) -> McParams {
    McParams {
        lambda: lambda_or(model, default_lambda),
        bigk: model.bigk,
        t: mc.t,
        replicates: mc.replicates,
        seed: mc.seed,
        cap: mc.cap,
    }
}

fn write_json<W: Write, T: serde::Serialize>(out: &mut W, value: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Runs one command. Returns the exit code; diagnostics go to `err`.
pub fn run<W: Write, E: Write>(cli: Cli, summation: Summation, out: &mut W, err: &mut E) -> CliResult<i32> {
    match cli.command {
        Command::Eval { kind, model, grid, method, t, tgrid, s, n } => {
            let lambda = match (model.lambda, kind) {
                (Some(l), _) => l,
                (None, EvalKind::Measure) => 1.0,
                (None, _) => return Err(CliError::usage("--lambda is required")),
            };
            let mut req = EvalRequest::new(kind, lambda);
            req.method = method;
            req.bigk = model.bigk;
            req.order = model.order;
            req.grid = grid;
            req.t = t;
            req.t_grid = tgrid;
            req.s = s;
            req.n = n;
            req.summation = summation;
            let table = eval(&req)?;
            for w in &table.warnings {
                writeln!(err, "warning: {w}")?;
            }
            table.write_csv(&mut *out)?;
            Ok(exit::OK)
        }
        Command::Figures { figure, out: dir, order } => {
            let manifest = write_figure(figure, &dir, order, summation)?;
            for w in &manifest.warnings {
                writeln!(err, "warning: {w}")?;
            }
            writeln!(out, "wrote {} files and manifest.json to {}", manifest.files.len(), dir.display())?;
            Ok(exit::OK)
        }
        Command::Check { suite, model, grid, mc } => {
            let report: CheckReport = match suite {
                Suite::Crossmethod => {
                    check::crossmethod(lambda_or(&model, 0.5), model.order, grid.unwrap_or(CROSS_GRID), summation)?
                }
                Suite::Schroeder => check::schroeder(lambda_or(&model, 0.5), model.bigk, model.order, summation)?,
                Suite::Abel => check::abel(lambda_or(&model, 1.0), model.bigk, model.order, summation)?,
                Suite::Montecarlo => check::montecarlo(mc_params(&model, &mc, 0.5))?,
                Suite::Lcl => check::lcl(mc_params(&model, &mc, 0.5))?,
            };
            write_json(out, &report)?;
            Ok(if report.pass { exit::OK } else { exit::CHECK_FAILED })
        }
        Command::Simulate { model, mc, checkpoints } => {
            let p = mc_params(&model, &mc, 0.5);
            let config = SimConfig::new(BranchingModel::new(p.lambda, p.bigk)?, p.t, p.replicates, p.seed)
                .with_cap(p.cap())
                .with_checkpoints(checkpoints);
            let outcome = sim::simulate(&config)?;
            if outcome.truncated > 0 {
                writeln!(err, "warning: {} replicates reached the cap {}", outcome.truncated, config.cap)?;
            }
            write_json(out, &SimReport::new(&config, &outcome))?;
            Ok(exit::OK)
        }
    }
}
