use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fcpo::twin::TwinDemoConfig;
use fcpo_cli::config::{parse_algorithms, parse_cases};
use fcpo_cli::harness::{bench_matrix, execute, write_outputs, RESULTS_HEADER};
use fcpo_cli::report::stats_report;
use fcpo_cli::twin_demo::demo_twin;
use fcpo_cli::{CliError, CliResult, HarnessConfig};

#[derive(Parser)]
#[command(name = "fcpo", version, about = "Markov-switching swarm optimizer: benchmarks, statistics and calibration demo")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run selected optimizers once per case and print the result rows.
    Run(HarnessArgs),
    /// Run the full benchmark matrix and write results.csv and traces.jsonl.
    Bench(HarnessArgs),
    /// Statistical report over a results.csv file.
    Stats(StatsArgs),
    /// Self-calibration demo of the activation model.
    Twin(TwinArgs),
}

#[derive(Args)]
struct HarnessArgs {
    /// key = value file applied before the flags below
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for instances and runs
    #[arg(long)]
    seed: Option<u64>,
    /// Runs per case and algorithm
    #[arg(long)]
    runs: Option<usize>,
    /// Evaluations per run (default 1000 * D)
    #[arg(long)]
    budget: Option<u64>,
    /// Comma-separated ids: fcpo, fcpo_nozoom, fcpo_noeigen, fcpo_nolpsr, pso, shade, lshade, cmaes
    #[arg(long)]
    algos: Option<String>,
    /// Comma-separated cases such as F1-D10 or F10 (both dimensions)
    #[arg(long)]
    cases: Option<String>,
    #[arg(long)]
    no_zoom: bool,
    #[arg(long)]
    no_eigen: bool,
    #[arg(long)]
    no_lpsr: bool,
    /// Initial FCPO population
    #[arg(long)]
    p_init: Option<usize>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads
    #[arg(long)]
    parallel: Option<usize>,
    /// One worker and a timing-free results file, for reproducible output
    #[arg(long, conflicts_with = "parallel")]
    sequential: bool,
}

#[derive(Args)]
struct StatsArgs {
    /// results.csv written by `bench`
    results: PathBuf,
    /// Directory for the report files (default: next to the results)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Algorithm the others are compared against (default: fcpo)
    #[arg(long)]
    control: Option<String>,
}

#[derive(Args)]
struct TwinArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    runs: usize,
    #[arg(long, default_value_t = 6_000)]
    budget: u64,
    /// Grid side length
    #[arg(long, default_value_t = 40)]
    grid: usize,
    /// Number of activation sites
    #[arg(long, default_value_t = 3)]
    sites: usize,
    #[arg(long, default_value = "twin")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    #[arg(long, conflicts_with = "parallel")]
    sequential: bool,
}

impl HarnessArgs {
    fn resolve(&self, runs_default: usize) -> CliResult<HarnessConfig> {
        let mut cfg = HarnessConfig { runs: runs_default, ..Default::default() };
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            cfg.apply_file(&text)?;
        }
        if let Some(v) = self.seed {
            cfg.master_seed = v;
        }
        if let Some(v) = self.runs {
            cfg.runs = v;
        }
        if let Some(v) = self.budget {
            cfg.budget = Some(v);
        }
        if let Some(v) = &self.algos {
            cfg.algorithms = parse_algorithms(v)?;
        }
        if let Some(v) = &self.cases {
            cfg.cases = parse_cases(v)?;
        }
        cfg.ablation.no_zoom |= self.no_zoom;
        cfg.ablation.no_eigen |= self.no_eigen;
        cfg.ablation.no_lpsr |= self.no_lpsr;
        if let Some(v) = self.p_init {
            cfg.p_init = v;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.parallel {
            cfg.parallel = v;
        }
        if self.sequential {
            cfg.sequential = true;
            cfg.parallel = 1;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve(1)?;
            let runs = execute(&cfg, false)?;
            println!("{}", RESULTS_HEADER.join(","));
            for r in &runs {
                println!(
                    "{},{},{},{},{:?},{},{:.3}",
                    r.case.function, r.case.dim, r.algorithm, r.record.seed, r.record.final_value, r.record.nfe, r.record.runtime_ms
                );
            }
            if args.out.is_some() {
                write_outputs(&cfg.out, &runs, cfg.sequential)?;
            }
        }
        Command::Bench(args) => {
            let cfg = args.resolve(30)?;
            let runs = bench_matrix(&cfg, true)?;
            eprintln!("wrote {} runs to {}", runs.len(), cfg.out.display());
        }
        Command::Stats(args) => {
            let out = args
                .out
                .clone()
                .unwrap_or_else(|| args.results.parent().map(PathBuf::from).unwrap_or_default());
            let report = stats_report(&args.results, &out, args.control.as_deref())?;
            print!("{}", fcpo_cli::report::render_text(&report));
        }
        Command::Twin(args) => {
            let cfg = TwinDemoConfig {
                nx: args.grid,
                ny: args.grid,
                n_pmj: args.sites,
                budget: args.budget,
                runs: args.runs,
                seed: args.seed,
                ..Default::default()
            };
            let parallel = if args.sequential { 1 } else { args.parallel };
            let outcome = demo_twin(&cfg, parallel, &args.out)?;
            for (i, r) in outcome.runs.iter().enumerate() {
                println!(
                    "run {i}: initial median {:.4e}, final {:.4e} ({:.2}%)",
                    r.initial_median,
                    r.record.final_value,
                    100.0 * r.record.final_value / r.initial_median
                );
            }
            let max_sigma = outcome.summary.sigma.iter().copied().fold(0.0, f64::max);
            println!("max activation sd {max_sigma:.3} ms; files in {}", args.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
