use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Width of the derivative-of-Gaussian pulse, in ms.
pub const PULSE_TAU_MS: f64 = 4.0;
/// Half-width of the pulse support, in units of `PULSE_TAU_MS`. Contributions
/// further than this from the activation time are dropped.
pub const PULSE_HALF_WIDTH: f64 = 6.0;
pub const SAMPLE_PERIOD_MS: f64 = 1.0;

const NEIGHBOURS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Rectangular grid of `nx * ny` nodes at unit spacing, connected to their
/// eight neighbours. Node `k` sits at `(k % nx, k / nx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGraph {
    nx: usize,
    ny: usize,
    speed: Vec<f64>,
}

impl GridGraph {
    pub fn uniform(nx: usize, ny: usize, speed: f64) -> Result<Self> {
        Self::with_speeds(nx, ny, vec![speed; nx * ny])
    }

    pub fn with_speeds(nx: usize, ny: usize, speed: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidConfig("grid needs at least one node".into()));
        }
        if speed.len() != nx * ny {
            return Err(Error::DimensionMismatch {
                expected: nx * ny,
                got: speed.len(),
            });
        }
        if speed.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::InvalidConfig("conduction speeds must be positive".into()));
        }
        Ok(Self { nx, ny, speed })
    }

    /// Grid whose speed varies smoothly between `lo` and `hi`.
    pub fn smooth_random(nx: usize, ny: usize, lo: f64, hi: f64, seed: u64) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::InvalidConfig("need 0 < lo <= hi".into()));
        }
        let field = smooth_field(nx, ny, 3, &mut RngStream::new(seed));
        let (min, max) = field
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let span = (max - min).max(f64::MIN_POSITIVE);
        let speed = field.iter().map(|v| lo + (hi - lo) * (v - min) / span).collect();
        Self::with_speeds(nx, ny, speed)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speed
    }

    pub fn position(&self, k: usize) -> (f64, f64) {
        ((k % self.nx) as f64, (k / self.nx) as f64)
    }

    /// Node closest to `(u, v)`, rounding halves up and clamping to the grid.
    pub fn nearest_node(&self, u: f64, v: f64) -> usize {
        let snap = |c: f64, n: usize| ((c + 0.5).floor().max(0.0) as usize).min(n - 1);
        snap(v, self.ny) * self.nx + snap(u, self.nx)
    }

    /// Neighbours of `k` with their traversal times.
    pub fn edges(&self, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (x, y) = ((k % self.nx) as isize, (k / self.nx) as isize);
        NEIGHBOURS.iter().filter_map(move |&(dx, dy)| {
            let (nx_, ny_) = (x + dx, y + dy);
            if nx_ < 0 || ny_ < 0 || nx_ >= self.nx as isize || ny_ >= self.ny as isize {
                return None;
            }
            let j = ny_ as usize * self.nx + nx_ as usize;
            let length = ((dx * dx + dy * dy) as f64).sqrt();
            Some((j, length / (0.5 * (self.speed[k] + self.speed[j]))))
        })
    }
}

/// One activation site: continuous grid coordinates and an onset time (ms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmjSite {
    pub u: f64,
    pub v: f64,
    pub t_onset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmjConfig {
    pub sites: Vec<PmjSite>,
}

impl PmjConfig {
    /// Reads `(u, v, t_onset)` triples from a flat decision vector.
    pub fn from_vector(x: &[f64]) -> Result<Self> {
        if x.is_empty() || !x.len().is_multiple_of(3) {
            return Err(Error::InvalidConfig(format!(
                "decision vector length {} is not a positive multiple of 3",
                x.len()
            )));
        }
        Ok(Self {
            sites: x
                .chunks_exact(3)
                .map(|c| PmjSite {
                    u: c[0],
                    v: c[1],
                    t_onset: c[2],
                })
                .collect(),
        })
    }

    pub fn to_vector(&self) -> Vec<f64> {
        self.sites.iter().flat_map(|s| [s.u, s.v, s.t_onset]).collect()
    }

    pub fn validate(&self, graph: &GridGraph, t_onset_max: f64) -> Result<()> {
        if self.sites.is_empty() {
            return Err(Error::InvalidConfig("no activation sites".into()));
        }
        let (umax, vmax) = ((graph.nx() - 1) as f64, (graph.ny() - 1) as f64);
        for (i, s) in self.sites.iter().enumerate() {
            if !(0.0..=umax).contains(&s.u) || !(0.0..=vmax).contains(&s.v) {
                return Err(Error::InvalidConfig(format!("site {i} lies outside the grid")));
            }
            if !(0.0..=t_onset_max).contains(&s.t_onset) {
                return Err(Error::InvalidConfig(format!(
                    "site {i} onset {} outside [0, {t_onset_max}]",
                    s.t_onset
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    time: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// First-arrival times (ms) of a wave started at every site at its onset
/// time: multi-source Dijkstra over the grid graph.
pub fn activation_map(graph: &GridGraph, pmj: &PmjConfig) -> Vec<f64> {
    let mut time = vec![f64::INFINITY; graph.len()];
    let mut heap = BinaryHeap::new();
    for s in &pmj.sites {
        let k = graph.nearest_node(s.u, s.v);
        if s.t_onset < time[k] {
            time[k] = s.t_onset;
            heap.push(Entry {
                time: s.t_onset,
                node: k,
            });
        }
    }
    while let Some(Entry { time: t, node }) = heap.pop() {
        if t > time[node] {
            continue;
        }
        for (j, w) in graph.edges(node) {
            let candidate = t + w;
            if candidate < time[j] {
                time[j] = candidate;
                heap.push(Entry {
                    time: candidate,
                    node: j,
                });
            }
        }
    }
    time
}

/// Linear map from node activity to `L` lead signals. Every lead sums to
/// zero over the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadField {
    b: DMatrix<f64>,
}

impl LeadField {
    pub fn from_matrix(b: DMatrix<f64>) -> Result<Self> {
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("lead field must be finite".into()));
        }
        Ok(Self { b })
    }

    /// `leads` smooth random fields over the grid, each centred to zero
    /// mean and scaled to RMS `1 / sqrt(K)`.
    pub fn generate(leads: usize, graph: &GridGraph, seed: u64) -> Self {
        let k = graph.len();
        let mut rng = RngStream::new(seed);
        let mut b = DMatrix::zeros(leads, k);
        for l in 0..leads {
            let mut field = smooth_field(graph.nx(), graph.ny(), 3, &mut rng);
            let mean = field.iter().sum::<f64>() / k as f64;
            field.iter_mut().for_each(|v| *v -= mean);
            let rms = (field.iter().map(|v| v * v).sum::<f64>() / k as f64).sqrt();
            let scale = if rms > 0.0 { 1.0 / (rms * (k as f64).sqrt()) } else { 0.0 };
            for (j, v) in field.iter().enumerate() {
                b[(l, j)] = v * scale;
            }
        }
        Self { b }
    }

    pub fn leads(&self) -> usize {
        self.b.nrows()
    }

    pub fn nodes(&self) -> usize {
        self.b.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.b
    }
}

/// Sum of a linear ramp and a few random plane waves, sampled on the grid.
fn smooth_field(nx: usize, ny: usize, waves: usize, rng: &mut RngStream) -> Vec<f64> {
    let (gx, gy) = (rng.normal(), rng.normal());
    let params: Vec<[f64; 4]> = (0..waves)
        .map(|_| {
            [
                rng.normal(),
                rng.uniform_in(-1.5, 1.5),
                rng.uniform_in(-1.5, 1.5),
                rng.uniform_in(0.0, std::f64::consts::TAU),
            ]
        })
        .collect();
    (0..nx * ny)
        .map(|k| {
            let x = (k % nx) as f64 / nx as f64;
            let y = (k / nx) as f64 / ny as f64;
            let waves: f64 = params
                .iter()
                .map(|[a, fx, fy, phase]| a * (std::f64::consts::TAU * (fx * x + fy * y) + phase).cos())
                .sum();
            gx * x + gy * y + waves
        })
        .collect()
}

/// Multi-lead signal sampled every `sample_period` ms.
#[derive(Debug, Clone, PartialEq)]
pub struct EcgSignal {
    pub leads: Vec<Vec<f64>>,
    pub sample_period: f64,
}

impl EcgSignal {
    pub fn new(leads: Vec<Vec<f64>>, sample_period: f64) -> Result<Self> {
        if leads.is_empty() || leads[0].is_empty() {
            return Err(Error::InvalidConfig("signal needs at least one non-empty lead".into()));
        }
        if leads.iter().any(|l| l.len() != leads[0].len()) {
            return Err(Error::InvalidConfig("leads differ in length".into()));
        }
        if !(sample_period.is_finite() && sample_period > 0.0) {
            return Err(Error::InvalidConfig("sample period must be positive".into()));
        }
        Ok(Self {
            leads,
            sample_period,
        })
    }

    pub fn lead_count(&self) -> usize {
        self.leads.len()
    }

    pub fn samples(&self) -> usize {
        self.leads.first().map_or(0, Vec::len)
    }
}

/// Pulse shape: first derivative of a unit Gaussian, up to sign.
pub fn pulse(u: f64) -> f64 {
    -u * (-0.5 * u * u).exp()
}

/// Lead signals `y_l(t) = sum_k B[l,k] pulse((t - t_a(k)) / tau)` on `horizon`
/// samples of 1 ms.
pub fn pseudo_ecg(activation: &[f64], lead_field: &LeadField, horizon: usize) -> Result<EcgSignal> {
    if activation.len() != lead_field.nodes() {
        return Err(Error::DimensionMismatch {
            expected: lead_field.nodes(),
            got: activation.len(),
        });
    }
    if horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be positive".into()));
    }
    let leads = lead_field.leads();
    let reach = PULSE_HALF_WIDTH * PULSE_TAU_MS;
    let mut out = vec![vec![0.0; horizon]; leads];
    let mut shape = Vec::new();
    for (k, &ta) in activation.iter().enumerate() {
        if !ta.is_finite() {
            return Err(Error::InvalidConfig(format!("activation time of node {k} is not finite")));
        }
        let first = ((ta - reach) / SAMPLE_PERIOD_MS).ceil().max(0.0) as usize;
        let last = ((ta + reach) / SAMPLE_PERIOD_MS).floor();
        if last < 0.0 || first >= horizon {
            continue;
        }
        let last = (last as usize).min(horizon - 1);
        pulse_samples(first, last, ta, &mut shape);
        let column = &lead_field.matrix().as_slice()[k * leads..(k + 1) * leads];
        for (y, &w) in out.iter_mut().zip(column) {
            if w == 0.0 {
                continue;
            }
            for (dst, s) in y[first..=last].iter_mut().zip(&shape) {
                *dst += w * s;
            }
        }
    }
    EcgSignal::new(out, SAMPLE_PERIOD_MS)
}

/// `pulse((t - ta) / tau)` for the sample indices `first..=last`.
///
/// The Gaussian factor follows the two-term recurrence
/// `g(u + h) = g(u) * q`, `q(u + h) = q(u) * exp(-h^2)`, so each node costs
/// three exponentials instead of one per sample.
fn pulse_samples(first: usize, last: usize, ta: f64, out: &mut Vec<f64>) {
    out.clear();
    let h = SAMPLE_PERIOD_MS / PULSE_TAU_MS;
    let mut u = (first as f64 * SAMPLE_PERIOD_MS - ta) / PULSE_TAU_MS;
    let mut g = (-0.5 * u * u).exp();
    let mut q = (-(u * h) - 0.5 * h * h).exp();
    let step = (-h * h).exp();
    for _ in first..=last {
        out.push(-u * g);
        g *= q;
        q *= step;
        u += h;
    }
}

/// Per-node sample standard deviation (divisor `n - 1`) across runs.
pub fn activation_std(runs: &[Vec<f64>]) -> Result<Vec<f64>> {
    if runs.len() < 2 {
        return Err(Error::Contract(format!(
            "activation_std needs at least 2 runs, got {}",
            runs.len()
        )));
    }
    let k = runs[0].len();
    if runs.iter().any(|r| r.len() != k) {
        return Err(Error::Contract("runs differ in node count".into()));
    }
    let n = runs.len() as f64;
    Ok((0..k)
        .map(|j| {
            // Deviations from the first run are exactly zero for identical
            // maps, which a plain mean does not guarantee.
            let d = |r: &Vec<f64>| r[j] - runs[0][j];
            let mean = runs.iter().map(d).sum::<f64>() / n;
            let ss: f64 = runs.iter().map(|r| (d(r) - mean).powi(2)).sum();
            (ss / (n - 1.0)).sqrt()
        })
        .collect())
}
