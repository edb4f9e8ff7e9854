//! Statistics over a `results.csv` file.
//!
//! For every case: Kruskal–Wallis over all algorithms, Dunn's test of each
//! algorithm against the control (FCPO by default) with Holm adjustment, and
//! Cliff's delta of the control against each algorithm (negative means the
//! control reached lower values). Across cases: mean ranks of the per-case
//! medians and the Friedman test on those ranks.
//!
//! Files written next to the report:
//!
//! * `report.txt`, the human-readable tables;
//! * `summary.json`, the same numbers in machine-readable form;
//! * `pareto.csv`, mean runtime against median error relative to the best
//!   algorithm of each case (errors below `1e-8` count as `1e-8`);
//! * `convergence.csv`, median best-so-far value on a 50-point NFE grid,
//!   written when `traces.jsonl` sits next to the results file.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use fcpo::benchmarks::FunctionId;
use fcpo::stats::{cliffs_delta, dunn_holm, friedman, kruskal_wallis, median, rank_table, DunnRow, SampleGroup, TestReport};
use serde::Deserialize;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::harness::RESULTS_HEADER;

/// Errors below this are treated as solved in the relative-error export.
pub const ERROR_FLOOR: f64 = 1e-8;
pub const CONVERGENCE_POINTS: u64 = 50;

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ResultRow {
    pub function: String,
    pub dim: usize,
    pub algorithm: String,
    pub seed: u64,
    pub final_value: f64,
    pub nfe: u64,
    pub runtime_ms: f64,
}

/// Reads a results file, naming the offending line on any error.
pub fn read_results(path: &Path) -> CliResult<Vec<ResultRow>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_results(&text)
}

pub fn parse_results(text: &str) -> CliResult<Vec<ResultRow>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| CliError::Parse { line: 1, message: e.to_string() })?
        .clone();
    if header.iter().collect::<Vec<_>>() != RESULTS_HEADER {
        return Err(CliError::Parse {
            line: 1,
            message: format!("expected header '{}'", RESULTS_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, record) in reader.deserialize::<ResultRow>().enumerate() {
        let line = i + 2;
        let row = record.map_err(|e| CliError::Parse { line, message: e.to_string() })?;
        if !row.final_value.is_finite() {
            return Err(CliError::Parse { line, message: "final_value is not finite".into() });
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Parse { line: 2, message: "no result rows".into() });
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub runs: usize,
    pub median: f64,
    pub mean: f64,
    pub sd: f64,
    pub best: f64,
    pub median_error: f64,
    pub mean_runtime_ms: f64,
    pub mean_nfe: f64,
}

#[derive(Debug, Clone)]
pub struct CaseReport {
    pub function: String,
    pub dim: usize,
    pub algorithms: Vec<AlgorithmSummary>,
    pub kruskal: TestReport,
    pub dunn: Vec<DunnRow>,
    /// `(algorithm, delta(control, algorithm))`.
    pub cliffs: Vec<(String, f64)>,
}

#[derive(Debug, Clone)]
pub struct StatsReport {
    pub control: String,
    pub algorithms: Vec<String>,
    pub cases: Vec<CaseReport>,
    pub average_ranks: Vec<f64>,
    pub per_case_ranks: Vec<Vec<f64>>,
    pub friedman: Option<TestReport>,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

fn known_optimum(function: &str) -> f64 {
    FunctionId::from_str(function).map_or(0.0, |f| f.bias())
}

/// Runs every test. `timings` (from `timings.csv`, keyed by function, dim,
/// algorithm and seed) replaces zero runtimes of sequential-mode files.
pub fn analyze(
    rows: &[ResultRow],
    control: Option<&str>,
    timings: &HashMap<(String, usize, String, u64), f64>,
) -> CliResult<StatsReport> {
    let mut algorithms: Vec<String> = Vec::new();
    let mut cases: BTreeMap<(u8, usize, String), BTreeMap<String, Vec<&ResultRow>>> = BTreeMap::new();
    for row in rows {
        if !algorithms.contains(&row.algorithm) {
            algorithms.push(row.algorithm.clone());
        }
        let order = FunctionId::from_str(&row.function).map_or(u8::MAX, |f| {
            FunctionId::ALL.iter().position(|g| *g == f).unwrap_or(usize::MAX) as u8
        });
        cases
            .entry((order, row.dim, row.function.clone()))
            .or_default()
            .entry(row.algorithm.clone())
            .or_default()
            .push(row);
    }
    if algorithms.len() < 2 {
        return Err(CliError::Config("need at least two algorithms".into()));
    }
    let control = match control {
        Some(c) => c.to_string(),
        None if algorithms.iter().any(|a| a == "fcpo") => "fcpo".to_string(),
        None => algorithms[0].clone(),
    };
    if !algorithms.contains(&control) {
        return Err(CliError::Config(format!("control algorithm '{control}' not in results")));
    }

    let mut reports = Vec::new();
    let mut medians = Vec::new();
    for ((_, dim, function), by_algo) in &cases {
        let counts: Vec<usize> = algorithms.iter().map(|a| by_algo.get(a).map_or(0, Vec::len)).collect();
        if counts.iter().any(|&c| c != counts[0]) {
            return Err(CliError::Config(format!(
                "{function}-D{dim}: algorithms have unequal run counts {counts:?}"
            )));
        }
        let optimum = known_optimum(function);
        let mut groups = Vec::new();
        let mut summaries = Vec::new();
        for a in &algorithms {
            let runs = &by_algo[a];
            let values: Vec<f64> = runs.iter().map(|r| r.final_value).collect();
            let errors: Vec<f64> = values.iter().map(|v| v - optimum).collect();
            let runtimes: Vec<f64> = runs
                .iter()
                .map(|r| {
                    if r.runtime_ms > 0.0 {
                        r.runtime_ms
                    } else {
                        timings
                            .get(&(r.function.clone(), r.dim, r.algorithm.clone(), r.seed))
                            .copied()
                            .unwrap_or(0.0)
                    }
                })
                .collect();
            let (mean, sd) = mean_sd(&values);
            summaries.push(AlgorithmSummary {
                algorithm: a.clone(),
                runs: values.len(),
                median: median(&values).unwrap_or(f64::NAN),
                mean,
                sd,
                best: values.iter().copied().fold(f64::INFINITY, f64::min),
                median_error: median(&errors).unwrap_or(f64::NAN),
                mean_runtime_ms: mean_sd(&runtimes).0,
                mean_nfe: runs.iter().map(|r| r.nfe as f64).sum::<f64>() / runs.len() as f64,
            });
            groups.push(SampleGroup::new(a.clone(), values)?);
        }
        let kruskal = kruskal_wallis(&groups)?;
        let dunn = dunn_holm(&groups, &control)?;
        let control_values = &groups[algorithms.iter().position(|a| *a == control).unwrap_or(0)].values;
        let cliffs = groups
            .iter()
            .filter(|g| g.label != control)
            .map(|g| Ok((g.label.clone(), cliffs_delta(control_values, &g.values)?)))
            .collect::<CliResult<Vec<_>>>()?;
        medians.push(summaries.iter().map(|s| s.median).collect::<Vec<_>>());
        reports.push(CaseReport {
            function: function.clone(),
            dim: *dim,
            algorithms: summaries,
            kruskal,
            dunn,
            cliffs,
        });
    }
    let ranks = rank_table(&medians)?;
    let friedman = if ranks.per_case.len() >= 2 { Some(friedman(&ranks.per_case)?) } else { None };
    Ok(StatsReport {
        control,
        algorithms,
        cases: reports,
        average_ranks: ranks.average,
        per_case_ranks: ranks.per_case,
        friedman,
    })
}

fn read_timings(path: &Path) -> HashMap<(String, usize, String, u64), f64> {
    #[derive(Deserialize)]
    struct Row {
        function: String,
        dim: usize,
        algorithm: String,
        seed: u64,
        runtime_ms: f64,
    }
    let Ok(text) = fs::read_to_string(path) else {
        return HashMap::new();
    };
    csv::Reader::from_reader(text.as_bytes())
        .deserialize::<Row>()
        .filter_map(Result::ok)
        .map(|r| ((r.function, r.dim, r.algorithm, r.seed), r.runtime_ms))
        .collect()
}

fn fmt_p(p: f64) -> String {
    if p < 1e-4 {
        format!("{p:.2e}")
    } else {
        format!("{p:.4}")
    }
}

pub fn render_text(r: &StatsReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "control: {}", r.control);
    for c in &r.cases {
        let _ = writeln!(s, "\n== {}-D{} ==", c.function, c.dim);
        let _ = writeln!(
            s,
            "{:<14} {:>5} {:>14} {:>14} {:>12} {:>14} {:>12}",
            "algorithm", "runs", "median", "mean", "sd", "best", "runtime_ms"
        );
        for a in &c.algorithms {
            let _ = writeln!(
                s,
                "{:<14} {:>5} {:>14.6e} {:>14.6e} {:>12.4e} {:>14.6e} {:>12.2}",
                a.algorithm, a.runs, a.median, a.mean, a.sd, a.best, a.mean_runtime_ms
            );
        }
        let _ = writeln!(
            s,
            "Kruskal-Wallis H = {:.4}, df = {}, p = {} ({:?})",
            c.kruskal.statistic, c.kruskal.df, fmt_p(c.kruskal.p_value), c.kruskal.method
        );
        let _ = writeln!(s, "{:<14} {:>9} {:>10} {:>10} {:>9}", "vs control", "z", "p", "p_holm", "cliff");
        for (d, (_, delta)) in c.dunn.iter().zip(&c.cliffs) {
            let _ = writeln!(
                s,
                "{:<14} {:>9.3} {:>10} {:>10} {:>9.3}",
                d.label, d.z, fmt_p(d.p_raw), fmt_p(d.p_adjusted), delta
            );
        }
    }
    let _ = writeln!(s, "\n== mean rank of case medians (1 = best) ==");
    for (a, rank) in r.algorithms.iter().zip(&r.average_ranks) {
        let _ = writeln!(s, "{a:<14} {rank:.3}");
    }
    match &r.friedman {
        Some(f) => {
            let _ = writeln!(s, "Friedman chi2 = {:.4}, df = {}, p = {}", f.statistic, f.df, fmt_p(f.p_value));
        }
        None => s.push_str("Friedman test skipped: fewer than two cases\n"),
    }
    s
}

fn finite_or_null(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        serde_json::Value::Null
    }
}

pub fn render_json(r: &StatsReport) -> serde_json::Value {
    let cases: Vec<_> = r
        .cases
        .iter()
        .map(|c| {
            json!({
                "function": c.function,
                "dim": c.dim,
                "algorithms": c.algorithms.iter().map(|a| json!({
                    "algorithm": a.algorithm,
                    "runs": a.runs,
                    "median": finite_or_null(a.median),
                    "mean": finite_or_null(a.mean),
                    "sd": finite_or_null(a.sd),
                    "best": finite_or_null(a.best),
                    "median_error": finite_or_null(a.median_error),
                    "mean_runtime_ms": a.mean_runtime_ms,
                    "mean_nfe": a.mean_nfe,
                })).collect::<Vec<_>>(),
                "kruskal_wallis": {
                    "h": c.kruskal.statistic,
                    "df": c.kruskal.df,
                    "p": c.kruskal.p_value,
                    "method": format!("{:?}", c.kruskal.method),
                },
                "dunn": c.dunn.iter().zip(&c.cliffs).map(|(d, (_, delta))| json!({
                    "algorithm": d.label,
                    "z": d.z,
                    "p": d.p_raw,
                    "p_holm": d.p_adjusted,
                    "cliffs_delta": delta,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "control": r.control,
        "algorithms": r.algorithms,
        "cases": cases,
        "average_ranks": r.algorithms.iter().zip(&r.average_ranks)
            .map(|(a, v)| (a.clone(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "friedman": r.friedman.as_ref().map(|f| json!({"chi2": f.statistic, "df": f.df, "p": f.p_value})),
    })
}

pub fn render_pareto(r: &StatsReport) -> String {
    let mut s = String::from("function,dim,algorithm,mean_runtime_ms,median_error,relative_median_error\n");
    for c in &r.cases {
        let best = c
            .algorithms
            .iter()
            .map(|a| a.median_error.max(ERROR_FLOOR))
            .fold(f64::INFINITY, f64::min);
        for a in &c.algorithms {
            let _ = writeln!(
                s,
                "{},{},{},{:.3},{:?},{:?}",
                c.function,
                c.dim,
                a.algorithm,
                a.mean_runtime_ms,
                a.median_error,
                a.median_error.max(ERROR_FLOOR) / best
            );
        }
    }
    s
}

#[derive(Deserialize)]
struct TraceLine {
    run_id: String,
    nfe: u64,
    best: f64,
}

/// Median best-so-far curves from a traces file.
pub fn render_convergence(traces_text: &str, rows: &[ResultRow]) -> CliResult<String> {
    let mut traces: HashMap<String, Vec<(u64, f64)>> = HashMap::new();
    for (i, line) in traces_text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let t: TraceLine =
            serde_json::from_str(line).map_err(|e| CliError::Parse { line: i + 1, message: e.to_string() })?;
        traces.entry(t.run_id).or_default().push((t.nfe, t.best));
    }
    // run ids are `<function>-D<dim>/<algorithm>/<run>`
    type Key = (String, usize, String);
    let mut groups: BTreeMap<Key, Vec<&Vec<(u64, f64)>>> = BTreeMap::new();
    let mut max_nfe: HashMap<Key, u64> = HashMap::new();
    for (id, points) in &traces {
        let mut parts = id.split('/');
        let (Some(case), Some(algo)) = (parts.next(), parts.next()) else { continue };
        let Some((function, dim)) = case.split_once("-D") else { continue };
        let Ok(dim) = dim.parse::<usize>() else { continue };
        groups.entry((function.to_string(), dim, algo.to_string())).or_default().push(points);
    }
    for r in rows {
        let key = (r.function.clone(), r.dim, r.algorithm.clone());
        let e = max_nfe.entry(key).or_insert(0);
        *e = (*e).max(r.nfe);
    }
    let mut s = String::from("function,dim,algorithm,nfe,median_best,mean_best\n");
    for (key, runs) in &groups {
        let Some(&limit) = max_nfe.get(key) else { continue };
        for k in 1..=CONVERGENCE_POINTS {
            let nfe = (limit * k).div_ceil(CONVERGENCE_POINTS);
            let values: Vec<f64> = runs
                .iter()
                .map(|p| match p.partition_point(|q| q.0 <= nfe) {
                    0 => f64::INFINITY,
                    i => p[i - 1].1,
                })
                .collect();
            let med = median(&values).unwrap_or(f64::NAN);
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let _ = writeln!(s, "{},{},{},{nfe},{med:?},{mean:?}", key.0, key.1, key.2);
        }
    }
    Ok(s)
}

/// Reads `results`, runs the tests and writes the report files into `out`.
pub fn stats_report(results: &Path, out: &Path, control: Option<&str>) -> CliResult<StatsReport> {
    let rows = read_results(results)?;
    let dir = results.parent().unwrap_or(Path::new("."));
    let timings = read_timings(&dir.join("timings.csv"));
    let report = analyze(&rows, control, &timings)?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let write = |name: &str, text: String| {
        let p = out.join(name);
        fs::write(&p, text).map_err(|e| CliError::io(&p, e))
    };
    write("report.txt", render_text(&report))?;
    let json = serde_json::to_string_pretty(&render_json(&report)).map_err(|e| CliError::Config(e.to_string()))?;
    write("summary.json", json + "\n")?;
    write("pareto.csv", render_pareto(&report))?;
    let traces = dir.join("traces.jsonl");
    if let Ok(text) = fs::read_to_string(&traces) {
        write("convergence.csv", render_convergence(&text, &rows)?)?;
    }
    Ok(report)
}
