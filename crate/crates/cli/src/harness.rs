//! Benchmark matrix execution and result files.
//!
//! `bench` writes three files into the output directory:
//!
//! * `results.csv` with header `function,dim,algorithm,seed,final_value,nfe,runtime_ms`,
//!   one row per run, ordered by case, then algorithm (as listed), then run;
//! * `traces.jsonl` with one `{"run_id", "nfe", "best"}` object per
//!   improvement of the best-so-far value;
//! * `timings.csv` with the measured wall-clock time of every run.
//!
//! In sequential mode the `runtime_ms` column of `results.csv` is written as
//! `0` so that the file depends on the master seed alone; the measured times
//! are still available in `timings.csv`.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use fcpo::baselines::BaselineConfig;
use fcpo::benchmarks::{suite, BenchmarkCase};
use fcpo::fcpo::{Fcpo, FcpoConfig};
use fcpo::{derive_run_seed, Budget, RngStream, RunRecord};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{fcpo_ablation, CaseSpec, HarnessConfig};
use crate::error::{CliError, CliResult};

pub const RESULTS_HEADER: [&str; 7] = ["function", "dim", "algorithm", "seed", "final_value", "nfe", "runtime_ms"];

/// FCPO configuration the harness uses for an algorithm id.
pub fn harness_fcpo_config(id: &str, dim: usize, budget: u64, p_init: usize) -> CliResult<FcpoConfig> {
    let ablation = fcpo_ablation(id).ok_or_else(|| CliError::Config(format!("'{id}' is not an FCPO variant")))?;
    Ok(FcpoConfig::new(dim, 1)
        .with_population(p_init)
        .with_ablation(ablation)
        .fit_to_budget(dim, budget)?)
}

/// Runs one optimizer on one case and stamps the wall-clock runtime.
pub fn run_case(case: &BenchmarkCase, algorithm: &str, seed: u64, cfg: &HarnessConfig) -> CliResult<RunRecord> {
    let dim = case.dim();
    let budget = cfg.budget_for(dim);
    let mut rng = RngStream::new(seed);
    let start = Instant::now();
    let mut record = if fcpo_ablation(algorithm).is_some() {
        let config = harness_fcpo_config(algorithm, dim, budget, cfg.p_init)?;
        Fcpo::new(config)?.run(case, Budget::new(budget)?, &mut rng)?
    } else {
        let baseline = BaselineConfig::for_id(algorithm, dim)
            .ok_or_else(|| CliError::Config(format!("unknown algorithm '{algorithm}'")))?;
        baseline.run(case, Budget::new(budget)?, &mut rng)?
    };
    record.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(record)
}

/// Seed of run `index`; shared by every algorithm and case.
pub fn run_seed(master_seed: u64, index: usize) -> u64 {
    derive_run_seed(master_seed, index as u64)
}

/// The benchmark instances of the selected cases.
pub fn selected_cases(cfg: &HarnessConfig) -> Vec<(CaseSpec, BenchmarkCase)> {
    let all = suite(cfg.master_seed);
    cfg.cases
        .iter()
        .filter_map(|spec| {
            all.iter()
                .find(|c| c.function() == spec.function && c.dim() == spec.dim)
                .map(|c| (*spec, c.clone()))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct BenchRun {
    pub case: CaseSpec,
    pub algorithm: String,
    pub run_index: usize,
    pub record: RunRecord,
}

impl BenchRun {
    pub fn run_id(&self) -> String {
        format!("{}/{}/{}", self.case, self.algorithm, self.run_index)
    }
}

/// Executes the full cross product. Results come back in file order.
pub fn execute(cfg: &HarnessConfig, progress: bool) -> CliResult<Vec<BenchRun>> {
    cfg.validate()?;
    let cases = selected_cases(cfg);
    let algorithms = cfg.resolved_algorithms();
    let jobs: Vec<(usize, &str, usize)> = (0..cases.len())
        .flat_map(|c| algorithms.iter().flat_map(move |a| (0..cfg.runs).map(move |r| (c, a.as_str(), r))))
        .collect();
    let total = jobs.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let job = |&(c, algorithm, r): &(usize, &str, usize)| -> CliResult<BenchRun> {
        let (spec, case) = &cases[c];
        let record = run_case(case, algorithm, run_seed(cfg.master_seed, r), cfg)?;
        let n = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
        if progress && (n.is_multiple_of(50) || n == total) {
            eprintln!("[{n}/{total}] {spec} {algorithm} run {r}: {:.6e}", record.final_value);
        }
        Ok(BenchRun { case: *spec, algorithm: algorithm.to_string(), run_index: r, record })
    };
    if cfg.sequential || cfg.parallel == 1 {
        jobs.iter().map(job).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.parallel)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| jobs.par_iter().map(job).collect())
    }
}

#[derive(Serialize)]
struct TraceLine<'a> {
    run_id: &'a str,
    nfe: u64,
    best: f64,
}

fn create(path: &Path) -> CliResult<BufWriter<fs::File>> {
    fs::File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

/// Writes `results.csv`, `traces.jsonl` and `timings.csv` into `dir`.
pub fn write_outputs(dir: &Path, runs: &[BenchRun], sequential: bool) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let results = dir.join("results.csv");
    let mut w = csv::Writer::from_writer(create(&results)?);
    let csv_err = |e: csv::Error| CliError::Config(format!("writing {}: {e}", results.display()));
    w.write_record(RESULTS_HEADER).map_err(csv_err)?;
    for run in runs {
        let r = &run.record;
        let runtime = if sequential { "0".to_string() } else { format!("{:.3}", r.runtime_ms) };
        w.write_record([
            run.case.function.to_string(),
            run.case.dim.to_string(),
            run.algorithm.clone(),
            r.seed.to_string(),
            format!("{:?}", r.final_value),
            r.nfe.to_string(),
            runtime,
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io(&results, e))?;

    let traces = dir.join("traces.jsonl");
    let mut t = create(&traces)?;
    for run in runs {
        let id = run.run_id();
        for p in &run.record.trace {
            let line = serde_json::to_string(&TraceLine { run_id: &id, nfe: p.nfe, best: p.best })
                .map_err(|e| CliError::Config(e.to_string()))?;
            writeln!(t, "{line}").map_err(|e| CliError::io(&traces, e))?;
        }
    }
    t.flush().map_err(|e| CliError::io(&traces, e))?;

    let timings = dir.join("timings.csv");
    let mut tw = create(&timings)?;
    writeln!(tw, "function,dim,algorithm,seed,runtime_ms").map_err(|e| CliError::io(&timings, e))?;
    for run in runs {
        writeln!(
            tw,
            "{},{},{},{},{:.3}",
            run.case.function, run.case.dim, run.algorithm, run.record.seed, run.record.runtime_ms
        )
        .map_err(|e| CliError::io(&timings, e))?;
    }
    tw.flush().map_err(|e| CliError::io(&timings, e))
}

/// Runs the matrix and writes its files.
pub fn bench_matrix(cfg: &HarnessConfig, progress: bool) -> CliResult<Vec<BenchRun>> {
    let runs = execute(cfg, progress)?;
    write_outputs(&cfg.out, &runs, cfg.sequential)?;
    Ok(runs)
}
