use std::collections::HashMap;
use std::fs;
use std::process::Command;

use fcpo::benchmarks::{make_case, FunctionId};
use fcpo_cli::config::{all_cases, parse_cases};
use fcpo_cli::harness::{bench_matrix, harness_fcpo_config, run_case};
use fcpo_cli::report::{analyze, parse_results, stats_report};
use fcpo_cli::twin_demo::demo_twin;
use fcpo_cli::{CliError, HarnessConfig};
use fcpo::twin::TwinDemoConfig;

fn small(out: &std::path::Path) -> HarnessConfig {
    HarnessConfig {
        master_seed: 5,
        runs: 3,
        budget: Some(300),
        algorithms: vec!["fcpo".into(), "pso".into()],
        cases: all_cases(),
        sequential: true,
        out: out.to_path_buf(),
        ..Default::default()
    }
}

#[test]
fn matrix_row_count_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let runs = bench_matrix(&cfg, false).unwrap();
    assert_eq!(runs.len(), 60);
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 61);
    assert_eq!(csv.lines().next().unwrap(), "function,dim,algorithm,seed,final_value,nfe,runtime_ms");
    for r in &runs {
        assert!(r.record.nfe <= 300);
    }

    let mut last: HashMap<String, u64> = HashMap::new();
    for line in fs::read_to_string(dir.path().join("traces.jsonl")).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let id = v["run_id"].as_str().unwrap().to_string();
        let nfe = v["nfe"].as_u64().unwrap();
        assert!(v["best"].is_f64());
        if let Some(prev) = last.insert(id, nfe) {
            assert!(nfe > prev);
        }
    }
    assert_eq!(last.len(), 60);
}

#[test]
fn sequential_reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cases = parse_cases("F2-D10,F10-D20").unwrap();
    for dir in [&a, &b] {
        let cfg = HarnessConfig {
            cases: cases.clone(),
            algorithms: vec!["fcpo".into(), "shade".into(), "cmaes".into()],
            ..small(dir.path())
        };
        bench_matrix(&cfg, false).unwrap();
    }
    for file in ["results.csv", "traces.jsonl"] {
        assert_eq!(fs::read(a.path().join(file)).unwrap(), fs::read(b.path().join(file)).unwrap(), "{file}");
    }
}

#[test]
fn run_case_contract() {
    let case = make_case(FunctionId::F1, 10, 3).unwrap();
    let cfg = HarnessConfig { budget: Some(2_000), ..Default::default() };
    for algo in ["fcpo", "fcpo_nozoom", "fcpo_noeigen", "fcpo_nolpsr", "pso", "shade", "lshade", "cmaes"] {
        let a = run_case(&case, algo, 11, &cfg).unwrap();
        let b = run_case(&case, algo, 11, &cfg).unwrap();
        assert!(a.nfe <= 2_000, "{algo}");
        assert!(a.runtime_ms > 0.0, "{algo}");
        assert_eq!(a.algorithm_id, algo);
        assert_eq!((a.final_value, a.nfe), (b.final_value, b.nfe), "{algo}");
    }
    assert!(matches!(run_case(&case, "cso", 1, &cfg), Err(CliError::Config(_))));
}

#[test]
fn nolpsr_spends_more_at_fixed_iterations() {
    let lpsr = harness_fcpo_config("fcpo", 20, 20_000, 30).unwrap();
    let mut fixed = lpsr.clone();
    fixed.ablation.no_lpsr = true;
    assert!(fixed.planned_nfe(20) > lpsr.planned_nfe(20));
}

const HAND_CSV: &str = "\
function,dim,algorithm,seed,final_value,nfe,runtime_ms
F1,10,fcpo,1,301,100,1.5
F1,10,fcpo,2,302,100,1.5
F1,10,fcpo,3,303,100,1.5
F1,10,pso,1,310,100,1.0
F1,10,pso,2,320,100,1.0
F1,10,pso,3,330,100,1.0
F1,10,cmaes,1,300,100,2.0
F1,10,cmaes,2,300.5,100,2.0
F1,10,cmaes,3,300.25,100,2.0
F3,10,fcpo,1,650,100,1.5
F3,10,fcpo,2,640,100,1.5
F3,10,fcpo,3,660,100,1.5
F3,10,pso,1,600,100,1.0
F3,10,pso,2,601,100,1.0
F3,10,pso,3,602,100,1.0
F3,10,cmaes,1,700,100,2.0
F3,10,cmaes,2,701,100,2.0
F3,10,cmaes,3,702,100,2.0
";

#[test]
fn hand_ranks_and_dunn_rows() {
    let rows = parse_results(HAND_CSV).unwrap();
    let r = analyze(&rows, None, &HashMap::new()).unwrap();
    assert_eq!(r.control, "fcpo");
    assert_eq!(r.algorithms, ["fcpo", "pso", "cmaes"]);
    // Medians: F1 (302, 320, 300.25) -> ranks (2, 3, 1); F3 (650, 601, 701) -> (2, 1, 3).
    assert_eq!(r.per_case_ranks, vec![vec![2.0, 3.0, 1.0], vec![2.0, 1.0, 3.0]]);
    assert_eq!(r.average_ranks, vec![2.0, 2.0, 2.0]);
    for c in &r.cases {
        assert_eq!(c.dunn.len(), 2);
        assert_eq!(c.cliffs.len(), 2);
    }
    assert_eq!(r.cases[0].cliffs[0], ("pso".to_string(), -1.0));
    assert!((r.cases[0].algorithms[0].median_error - 2.0).abs() < 1e-12);
}

#[test]
fn identical_results_give_unit_p_values() {
    let mut csv = String::from("function,dim,algorithm,seed,final_value,nfe,runtime_ms\n");
    for algo in ["fcpo", "pso", "shade"] {
        for (seed, v) in [(1, 305.0), (2, 310.0), (3, 307.5), (4, 301.0)] {
            csv.push_str(&format!("F1,20,{algo},{seed},{v},200,1\n"));
        }
    }
    let r = analyze(&parse_results(&csv).unwrap(), None, &HashMap::new()).unwrap();
    assert_eq!(r.cases[0].kruskal.p_value, 1.0);
    assert!(r.cases[0].dunn.iter().all(|d| d.p_adjusted == 1.0 && d.z == 0.0));
    assert!(r.friedman.is_none());
}

#[test]
fn malformed_csv_names_the_line() {
    let bad = HAND_CSV.replace("F1,10,pso,2,320,100,1.0", "F1,10,pso,2,abc,100,1.0");
    match parse_results(&bad) {
        Err(CliError::Parse { line, .. }) => assert_eq!(line, 6),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_results("a,b\n1,2\n"), Err(CliError::Parse { line: 1, .. })));
    let unequal: String = HAND_CSV.lines().filter(|l| !l.starts_with("F3,10,pso,3")).map(|l| format!("{l}\n")).collect();
    assert!(analyze(&parse_results(&unequal).unwrap(), None, &HashMap::new()).is_err());
}

#[test]
fn report_files_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = HarnessConfig { cases: parse_cases("F1-D10,F3-D10").unwrap(), ..small(dir.path()) };
    bench_matrix(&cfg, false).unwrap();
    let out = dir.path().join("report");
    stats_report(&dir.path().join("results.csv"), &out, None).unwrap();
    for f in ["report.txt", "summary.json", "pareto.csv", "convergence.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["cases"].as_array().unwrap().len(), 2);
    let pareto = fs::read_to_string(out.join("pareto.csv")).unwrap();
    assert_eq!(pareto.lines().count(), 5);
    // sequential results carry zero runtimes; the report takes them from timings.csv
    assert!(pareto.lines().skip(1).all(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap() > 0.0));
}

#[test]
fn twin_demo_smoke() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = TwinDemoConfig { nx: 14, ny: 14, n_pmj: 2, horizon: 100, budget: 400, runs: 3, seed: 2, ..Default::default() };
    let outcome = demo_twin(&cfg, 2, dir.path()).unwrap();
    for f in ["target.txt", "truth.txt", "truth_activation.txt", "activation_mean.txt", "calibrations.csv", "loss_curve.csv", "sigma_map.txt"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert!(outcome.summary.sigma.iter().all(|&s| s >= 0.0));
    assert!(outcome.summary.curve_mean.windows(2).all(|w| w[1] <= w[0]));
    let sigma_rows = fs::read_to_string(dir.path().join("sigma_map.txt")).unwrap().lines().count();
    assert_eq!(sigma_rows, 14 * 14 + 1);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_fcpo");
    let dir = tempfile::tempdir().unwrap();
    let ok = Command::new(bin)
        .args(["run", "--cases", "F3-D10", "--algos", "pso", "--budget", "500", "--seed", "4"])
        .output()
        .unwrap();
    assert!(ok.status.success());
    let stdout = String::from_utf8(ok.stdout).unwrap();
    assert!(stdout.starts_with("function,dim,algorithm,seed,final_value,nfe,runtime_ms\nF3,10,pso,"));

    let bad = Command::new(bin).args(["bench", "--algos", "cso"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let bad = Command::new(bin).args(["bench", "--cases", "F7"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));

    let cfg = dir.path().join("cfg.txt");
    fs::write(&cfg, format!("seed = 3\nruns = 2\nbudget = 200\nalgos = fcpo,lshade\ncases = F1-D10\nout = {}\n", dir.path().join("o").display())).unwrap();
    let st = Command::new(bin).args(["bench", "--sequential", "--config"]).arg(&cfg).status().unwrap();
    assert!(st.success());
    let csv = fs::read_to_string(dir.path().join("o/results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let missing = Command::new(bin).args(["stats"]).arg(dir.path().join("nope.csv")).status().unwrap();
    assert_eq!(missing.code(), Some(1));
}
