use super::model::EcgSignal;
use crate::error::{Error, Result};

/// Index of the largest squared sample; ties go to the earliest index.
pub fn peak_time(lead: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in lead.iter().enumerate() {
        if v * v > lead[best] * lead[best] {
            best = i;
        }
    }
    best
}

/// Least-squares fit `target ≈ s * sim + r` over two equally long windows.
///
/// Returns `(s, r, residual)`, where the residual is the summed squared
/// error times `sample_period`. A constant `sim` gives `s = 0` and
/// `r = mean(target)`.
///
/// ```
/// use fcpo::twin::fit_scale_offset;
///
/// let sim = [0.0, 1.0, -2.0, 0.5];
/// let target: Vec<f64> = sim.iter().map(|x| 2.0 * x + 3.0).collect();
/// let (s, r, res) = fit_scale_offset(&target, &sim, 1.0).unwrap();
/// assert!((s - 2.0).abs() < 1e-12 && (r - 3.0).abs() < 1e-12 && res < 1e-20);
/// ```
pub fn fit_scale_offset(target: &[f64], sim: &[f64], sample_period: f64) -> Result<(f64, f64, f64)> {
    if target.len() != sim.len() {
        return Err(Error::DimensionMismatch {
            expected: sim.len(),
            got: target.len(),
        });
    }
    if sim.len() < 2 {
        return Err(Error::Contract("fit window needs at least 2 samples".into()));
    }
    let n = sim.len() as f64;
    let mean_s = sim.iter().sum::<f64>() / n;
    let mean_t = target.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut peak: f64 = 0.0;
    for (x, y) in sim.iter().zip(target) {
        let dx = x - mean_s;
        sxx += dx * dx;
        sxy += dx * (y - mean_t);
        peak = peak.max(x.abs());
    }
    let (s, r) = if sxx <= n * peak * peak * 1e-24 {
        (0.0, mean_t)
    } else {
        let s = sxy / sxx;
        (s, mean_t - s * mean_s)
    };
    Ok((s, r, squared_error(target, sim, s, r) * sample_period))
}

fn squared_error(target: &[f64], sim: &[f64], s: f64, r: f64) -> f64 {
    target
        .iter()
        .zip(sim)
        .map(|(y, x)| {
            let e = y - (s * x + r);
            e * e
        })
        .sum()
}

/// Result of [`align_and_loss`]. `shift` is in samples: the target is read at
/// `t + shift` against the simulation at `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub loss: f64,
    pub shift: i64,
    pub scale: f64,
    pub offset: f64,
}

/// Range of simulation indices `t` for which `t + shift` is a valid target
/// index.
fn overlap(shift: i64, sim_len: usize, target_len: usize) -> std::ops::Range<usize> {
    let start = (-shift).max(0) as usize;
    let end = (target_len as i64 - shift).clamp(0, sim_len as i64) as usize;
    start..end.max(start)
}

/// Aligned, scaled L2 loss between two multi-lead signals.
///
/// Each lead proposes a shift from its peak times and a scale and offset
/// fitted on that lead alone. Every proposal is scored on all leads over the
/// overlap of the shifted signals, and the cheapest one wins (earliest lead on
/// ties). Proposals whose overlap has fewer than 2 samples score `+inf`.
pub fn align_and_loss(target: &EcgSignal, sim: &EcgSignal) -> Result<Alignment> {
    if target.lead_count() != sim.lead_count() {
        return Err(Error::DimensionMismatch {
            expected: sim.lead_count(),
            got: target.lead_count(),
        });
    }
    if target.sample_period != sim.sample_period {
        return Err(Error::InvalidConfig("sample periods differ".into()));
    }
    let dt = sim.sample_period;
    let (tn, sn) = (target.samples(), sim.samples());
    let mut best = Alignment {
        loss: f64::INFINITY,
        shift: 0,
        scale: 1.0,
        offset: 0.0,
    };
    for (tl, sl) in target.leads.iter().zip(&sim.leads) {
        let shift = peak_time(tl) as i64 - peak_time(sl) as i64;
        let window = overlap(shift, sn, tn);
        if window.len() < 2 {
            continue;
        }
        let a = (window.start as i64 + shift) as usize;
        let shifted = a..a + window.len();
        let (scale, offset, _) = fit_scale_offset(&tl[shifted.clone()], &sl[window.clone()], dt)?;
        let loss: f64 = target
            .leads
            .iter()
            .zip(&sim.leads)
            .map(|(tk, sk)| squared_error(&tk[shifted.clone()], &sk[window.clone()], scale, offset))
            .sum::<f64>()
            * dt;
        if loss < best.loss {
            best = Alignment {
                loss,
                shift,
                scale,
                offset,
            };
        }
    }
    Ok(best)
}
