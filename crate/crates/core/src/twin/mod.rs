//! Toy activation-calibration problem.
//!
//! A wave spreads over a planar grid from a few activation sites, each with
//! its own onset time. Arrival times come from shortest paths on the
//! 8-connected grid ([`activation_map`]). A fixed lead field turns them into
//! a multi-lead pseudo-ECG ([`pseudo_ecg`]). Comparing two signals uses an
//! L2 loss after one common time shift, scale and offset ([`align_and_loss`]).
//! [`calibrate`] recovers sites and onsets from a target signal with FCPO.
//!
//! ```
//! use fcpo::twin::{activation_map, GridGraph, PmjConfig, PmjSite};
//!
//! let grid = GridGraph::uniform(5, 5, 1.0).unwrap();
//! let site = PmjSite { u: 0.0, v: 0.0, t_onset: 2.0 };
//! let t = activation_map(&grid, &PmjConfig { sites: vec![site] });
//! assert_eq!(t[0], 2.0);
//! assert!((t[24] - (2.0 + 4.0 * 2f64.sqrt())).abs() < 1e-12);
//! ```

mod calibrate;
mod io;
mod loss;
mod model;

pub use calibrate::{
    calibrate, calibration_config, demo_twin, summarize, synthetic_problem, Calibration,
    TwinDemoConfig, TwinProblem, TwinSummary, DEFAULT_HORIZON, DEFAULT_LEADS, DEFAULT_ONSET_MAX_MS,
};
pub use io::{read_matrix, read_signal, write_matrix, write_signal, write_sigma_map};
pub use loss::{align_and_loss, fit_scale_offset, peak_time, Alignment};
pub use model::{
    activation_map, activation_std, pseudo_ecg, pulse, EcgSignal, GridGraph, LeadField, PmjConfig,
    PmjSite, PULSE_HALF_WIDTH, PULSE_TAU_MS, SAMPLE_PERIOD_MS,
};
