//! The `twin` subcommand: hidden-truth self-calibration repeated over seeds.
//!
//! Files written:
//!
//! * `target.txt`: target signal, one lead per row;
//! * `truth.txt`: hidden sites, one `u v t_onset` row per site;
//! * `truth_activation.txt`, `activation_mean.txt`: `ny x nx` activation maps;
//! * `calibrations.csv`: one row per run with its loss and fitted sites;
//! * `loss_curve.csv`: best loss after each iteration, mean and sd over runs;
//! * `sigma_map.txt`: `node x y sigma` rows of the activation-time spread.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fcpo::twin::{
    activation_map, calibrate, calibration_config, summarize, synthetic_problem, write_matrix, write_sigma_map,
    write_signal, Calibration, TwinDemoConfig, TwinSummary,
};
use fcpo::{Budget, RngStream};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};

pub struct TwinOutcome {
    pub runs: Vec<Calibration>,
    pub summary: TwinSummary,
}

fn grid_rows(values: &[f64], nx: usize) -> Vec<Vec<f64>> {
    values.chunks(nx).map(<[f64]>::to_vec).collect()
}

pub fn demo_twin(cfg: &TwinDemoConfig, parallel: usize, out: &Path) -> CliResult<TwinOutcome> {
    let (problem, truth) = synthetic_problem(cfg)?;
    let config = calibration_config(&problem, cfg.budget)?;
    let one = |i: usize| -> CliResult<Calibration> {
        Ok(calibrate(&problem, config.clone(), Budget::new(cfg.budget)?, &mut RngStream::new(cfg.run_seed(i)))?)
    };
    let runs: Vec<Calibration> = if parallel <= 1 {
        (0..cfg.runs).map(one).collect::<CliResult<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallel)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| (0..cfg.runs).into_par_iter().map(one).collect::<CliResult<_>>())?
    };
    let summary = summarize(&runs)?;

    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let write = |name: &str, text: String| {
        let p = out.join(name);
        fs::write(&p, text).map_err(|e| CliError::io(&p, e))
    };
    write("target.txt", write_signal(problem.target()))?;
    let sites: Vec<Vec<f64>> = truth.sites.iter().map(|s| vec![s.u, s.v, s.t_onset]).collect();
    write("truth.txt", write_matrix(&sites))?;
    let nx = cfg.nx;
    write("truth_activation.txt", write_matrix(&grid_rows(&activation_map(problem.graph(), &truth), nx)))?;
    let mean_activation: Vec<f64> = (0..problem.graph().len())
        .map(|k| runs.iter().map(|r| r.activation[k]).sum::<f64>() / runs.len() as f64)
        .collect();
    write("activation_mean.txt", write_matrix(&grid_rows(&mean_activation, nx)))?;

    let mut table = String::from("run,seed,initial_median,final_loss,nfe,sites\n");
    for (i, r) in runs.iter().enumerate() {
        let sites: Vec<String> = r.pmj.to_vector().iter().map(|v| format!("{v:.4}")).collect();
        let _ = writeln!(
            table,
            "{i},{},{:?},{:?},{},{}",
            r.record.seed,
            r.initial_median,
            r.record.final_value,
            r.record.nfe,
            sites.join(" ")
        );
    }
    write("calibrations.csv", table)?;

    let mut curve = String::from("iteration,mean_loss,sd_loss\n");
    for (i, (m, s)) in summary.curve_mean.iter().zip(&summary.curve_sd).enumerate() {
        let _ = writeln!(curve, "{i},{m:?},{s:?}");
    }
    write("loss_curve.csv", curve)?;
    write("sigma_map.txt", write_sigma_map(nx, &summary.sigma))?;
    Ok(TwinOutcome { runs, summary })
}
