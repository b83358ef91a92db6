//! Benchmark CLI: run seeded experiments, fit empirical rates from trace
//! CSVs, and check step-size schedules for admissibility.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cgalp::bench::{fit_rate, run_experiment, Experiment, ExperimentConfig};
use cgalp::schedule::{validate_schedule, ParameterSchedule};

#[derive(Parser)]
#[command(name = "bench", about = "Benchmark harness for the constrained conditional-gradient solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentArg {
    Projection,
    Matcomp,
}

impl From<ExperimentArg> for Experiment {
    fn from(e: ExperimentArg) -> Self {
        match e {
            ExperimentArg::Projection => Experiment::Projection,
            ExperimentArg::Matcomp => Experiment::Matcomp,
        }
    }
}

#[derive(Args)]
struct ScheduleArgs {
    /// Log-power exponent in the step size (log(k+2))^a / (k+1)^(1-b)
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    /// Step-size exponent offset b
    #[arg(long, default_value_t = 0.0)]
    b: f64,
    /// Smoothing exponent: beta_k = 1 / (k+1)^(1-delta)
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Constant augmentation parameter rho
    #[arg(long, default_value_t = 5.0)]
    rho: f64,
    /// Dual damping constant: theta_k = gamma_k / c
    #[arg(long, default_value_t = 1.0)]
    c: f64,
}

impl ScheduleArgs {
    fn schedule(&self) -> ParameterSchedule {
        ParameterSchedule::new(self.a, self.b, self.delta, self.rho, self.c)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write CSV traces plus a JSON summary
    Run {
        #[arg(long, value_enum)]
        experiment: ExperimentArg,
        /// Matrix side length (matcomp only)
        #[arg(long, default_value_t = 32)]
        n: usize,
        /// Fraction of observed entries (matcomp only)
        #[arg(long, default_value_t = 0.8)]
        density: f64,
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Measured iterations (rows in the CSV trace)
        #[arg(long, default_value_t = 10_000)]
        iters: usize,
        /// Iterations for the cached reference solve
        #[arg(long, default_value_t = 100_000)]
        ref_iters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for traces, summary, and the reference cache
        #[arg(long)]
        out: PathBuf,
        /// Fail with a cache miss instead of solving a missing reference
        #[arg(long)]
        no_reference_solve: bool,
    },
    /// Fit a log-log slope to one column of a trace CSV
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        /// Column name from the CSV header
        #[arg(long)]
        column: String,
        #[arg(long, default_value_t = 100)]
        k_lo: usize,
        #[arg(long, default_value_t = usize::MAX)]
        k_hi: usize,
    },
    /// Check a parameter schedule against the admissibility conditions
    ValidateSchedule {
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Gradient Lipschitz constant of the smooth part, if known
        #[arg(long)]
        f_lipschitz: Option<f64>,
        /// Diameter bound of the constraint set
        #[arg(long, default_value_t = 2.0)]
        diameter: f64,
    },
}

fn cmd_fit(input: PathBuf, column: String, k_lo: usize, k_hi: usize) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&input)
        .with_context(|| format!("reading {}", input.display()))?;
    let mut lines = text.lines();
    let header = lines.next().context("empty CSV")?;
    let cols: Vec<&str> = header.split(',').collect();
    let Some(col_idx) = cols.iter().position(|&c| c == column) else {
        bail!("column {column:?} not in header ({header})");
    };
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            bail!("line {}: expected {} fields, found {}", lineno + 2, cols.len(), fields.len());
        }
        let k: usize = fields[0].parse().with_context(|| format!("line {}: k", lineno + 2))?;
        let v: f64 = fields[col_idx]
            .parse()
            .with_context(|| format!("line {}: {column}", lineno + 2))?;
        rows.push((k, v));
    }
    let fit = fit_rate(&rows, k_lo, k_hi)?;
    println!("{}", serde_json::to_string_pretty(&fit)?);
    Ok(())
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run {
            experiment,
            n,
            density,
            schedule,
            iters,
            ref_iters,
            seed,
            out,
            no_reference_solve,
        } => {
            let cfg = ExperimentConfig {
                experiment: experiment.into(),
                n,
                density,
                a: schedule.a,
                b: schedule.b,
                delta: schedule.delta,
                rho: schedule.rho,
                c: schedule.c,
                iters,
                ref_iters,
                seed,
                out,
                allow_reference_solve: !no_reference_solve,
            };
            let artifacts = run_experiment(&cfg)?;
            for p in &artifacts.csv_paths {
                println!("wrote {}", p.display());
            }
            println!("wrote {}", artifacts.summary_path.display());
            for run in &artifacts.summary.runs {
                for (name, fit) in &run.fits {
                    println!(
                        "{}: {} slope {:.4} (r^2 {:.4}, k in [{}, {}])",
                        run.algo, name, fit.slope, fit.r_squared, fit.k_range.0, fit.k_range.1
                    );
                }
            }
        }
        Command::Fit { input, column, k_lo, k_hi } => cmd_fit(input, column, k_lo, k_hi)?,
        Command::ValidateSchedule { schedule, f_lipschitz, diameter } => {
            let report = validate_schedule(&schedule.schedule(), f_lipschitz, diameter);
            print!("{report}");
            if !report.all_pass() {
                std::process::exit(1);
            }
        }
    }
    Ok(())
}
