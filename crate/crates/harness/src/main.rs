use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use bilevel_harness::compare::{compare, render_csv, render_text};
use bilevel_harness::plot::{emit_plot, PlotOptions};
use bilevel_harness::run::run_config;
use bilevel_harness::selftest::run_selftest;
use bilevel_harness::trace_io::read_trace;
use bilevel_harness::{rate_fit, Config};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bilevel",
    version,
    about = "Run and compare simple bilevel solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "traces")]
    out_dir: PathBuf,
    /// Overrides `instance.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `run.time_limit_s`.
    #[arg(long)]
    time_limit_s: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the single solver named in the configuration.
    Solve(RunArgs),
    /// Run every configured solver and write a comparison table.
    Bench(RunArgs),
    /// Fit a power law to a trace column.
    Ratefit {
        trace: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long)]
        t_min: usize,
        #[arg(long)]
        t_max: usize,
    },
    /// Summarize traces as a table.
    Compare {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Plot trace columns to SVG.
    Plot {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        /// Comma-separated columns, e.g. `g_x_gap,g_z_gap`.
        #[arg(long, value_delimiter = ',', required = true)]
        columns: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        t_min: Option<usize>,
        #[arg(long)]
        t_max: Option<usize>,
    },
    /// Randomized checks of the linear oracles and projections.
    OracleSelftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

fn load(args: &RunArgs) -> anyhow::Result<Config> {
    let mut config =
        Config::load(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        config.instance.set_seed(seed);
        config.entries.push(("cli.seed".into(), seed.to_string()));
    }
    if let Some(limit) = args.time_limit_s {
        config.run.time_limit_s = Some(limit);
        config
            .entries
            .push(("cli.time_limit_s".into(), limit.to_string()));
    }
    Ok(config)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn real_main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve(args) => {
            let config = load(&args)?;
            if config.solvers.len() != 1 {
                bail!(
                    "solve runs one solver; found {} in solver.names (use bench)",
                    config.solvers.len()
                );
            }
            let outcome = run_config(&config, &args.out_dir)?;
            for (trace, path) in outcome.traces.iter().zip(&outcome.paths) {
                println!(
                    "{} -> {} ({})",
                    trace.header.solver,
                    path.display(),
                    trace.header.termination.as_str()
                );
            }
            Ok(if outcome.any_failed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Bench(args) => {
            let config = load(&args)?;
            let outcome = run_config(&config, &args.out_dir)?;
            let rows = compare(&outcome.traces)?;
            let text = render_text(&rows);
            std::fs::write(args.out_dir.join("summary.txt"), &text)?;
            std::fs::write(args.out_dir.join("summary.csv"), render_csv(&rows))?;
            print!("{text}");
            Ok(if outcome.any_failed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Ratefit {
            trace,
            column,
            t_min,
            t_max,
        } => {
            let trace = read_trace(&trace)?;
            let fit = rate_fit(&trace, &column, t_min, t_max)?;
            println!(
                "{} over [{}, {}]: slope {:.6} ± {:.2e}, intercept {:.6}, {} points ({} dropped)",
                fit.column,
                fit.t_min,
                fit.t_max,
                fit.slope,
                fit.slope_stderr,
                fit.intercept,
                fit.points,
                fit.dropped
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { traces, csv } => {
            let traces = traces
                .iter()
                .map(read_trace)
                .collect::<Result<Vec<_>, _>>()?;
            let rows = compare(&traces)?;
            print!("{}", render_text(&rows));
            if let Some(path) = csv {
                std::fs::write(path, render_csv(&rows))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot {
            traces,
            columns,
            out,
            t_min,
            t_max,
        } => {
            let traces = traces
                .iter()
                .map(read_trace)
                .collect::<Result<Vec<_>, _>>()?;
            let columns: Vec<&str> = columns.iter().map(String::as_str).collect();
            let opts = PlotOptions {
                t_min,
                t_max,
                log_y: None,
            };
            let written = emit_plot(&traces, &columns, &out, &opts)?;
            println!(
                "{} ({} series)",
                written.svg.display(),
                written.series.len()
            );
            for s in &written.sidecars {
                println!("  {}", s.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::OracleSelftest { seed, cases } => {
            let results = run_selftest(seed, cases);
            let mut ok = true;
            for r in &results {
                ok &= r.passed;
                println!(
                    "{} {}: worst {:.2e} (tolerance {:.0e}, {} cases)",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.worst,
                    r.tolerance,
                    r.cases
                );
            }
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
