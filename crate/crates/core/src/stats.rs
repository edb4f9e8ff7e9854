//! Rank-based comparison of optimizer results.
//!
//! The omnibus Kruskal–Wallis test and Dunn's post-hoc test use the
//! asymptotic chi-square and normal distributions for ordinary sample sizes.
//! When every group holds at most [`SMALL_GROUP_MAX`] values those
//! approximations are poor (three groups of three, perfectly separated, give
//! an asymptotic `p = 0.027` against an exact `p = 0.0036`), so the p-value
//! comes from the permutation distribution instead: exact enumeration when
//! the number of distinct relabelings is at most [`EXACT_LIMIT`], otherwise
//! [`MC_RESAMPLES`] seeded random relabelings.

use std::cmp::Ordering;

use statrs::function::erf::erfc;
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::rng::RngStream;

pub const SMALL_GROUP_MAX: usize = 8;
pub const EXACT_LIMIT: u64 = 200_000;
pub const MC_RESAMPLES: usize = 100_000;
const MC_SEED: u64 = 0x006b_775f_7065_726d;

/// Observations of one algorithm (or any labelled sample).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGroup {
    pub label: String,
    pub values: Vec<f64>,
}

impl SampleGroup {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if values.is_empty() {
            return Err(Error::InvalidConfig(format!("group '{label}' is empty")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("group '{label}' has non-finite values")));
        }
        Ok(Self { label, values })
    }
}

/// How a p-value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PValueMethod {
    ChiSquare,
    Normal,
    ExactPermutation { relabelings: u64 },
    MonteCarloPermutation { resamples: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub statistic: f64,
    pub p_value: f64,
    pub df: usize,
    pub method: PValueMethod,
}

/// One control-versus-other comparison of [`dunn_holm`].
#[derive(Debug, Clone, PartialEq)]
pub struct DunnRow {
    pub label: String,
    /// Positive when the other group ranks higher (worse, for minimization)
    /// than the control.
    pub z: f64,
    pub p_raw: f64,
    pub p_adjusted: f64,
}

/// Survival function of the chi-square distribution.
pub fn chi_square_sf(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(df as f64 / 2.0, x / 2.0).clamp(0.0, 1.0)
}

/// Two-sided standard normal tail `P(|Z| >= |z|)`.
pub fn normal_two_sided(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// Mid-ranks (1-based) of `values` and the tie sum `sum(t^3 - t)`.
pub fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let n = values.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut ties = 0.0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[idx[end]] == values[idx[start]] {
            end += 1;
        }
        let mid = (start + end + 1) as f64 / 2.0;
        for &k in &idx[start..end] {
            ranks[k] = mid;
        }
        let t = (end - start) as f64;
        ties += t * t * t - t;
        start = end;
    }
    (ranks, ties)
}

struct Pooled {
    ranks: Vec<f64>,
    sizes: Vec<usize>,
    ties: f64,
}

impl Pooled {
    fn new(groups: &[SampleGroup]) -> Result<Self> {
        if groups.len() < 2 {
            return Err(Error::InvalidConfig("need at least two groups".into()));
        }
        for g in groups {
            if g.values.len() < 2 {
                return Err(Error::InsufficientSamples {
                    needed: 2,
                    got: g.values.len(),
                });
            }
            if g.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(format!("group '{}' has non-finite values", g.label)));
            }
        }
        let all: Vec<f64> = groups.iter().flat_map(|g| g.values.iter().copied()).collect();
        let (ranks, ties) = midranks(&all);
        Ok(Self {
            ranks,
            sizes: groups.iter().map(|g| g.values.len()).collect(),
            ties,
        })
    }

    fn n(&self) -> usize {
        self.ranks.len()
    }

    fn small(&self) -> bool {
        self.sizes.iter().all(|&s| s <= SMALL_GROUP_MAX)
    }

    /// Rank sums per group for the labelling `labels[k]` of pooled item `k`.
    fn rank_sums(&self, labels: &[usize]) -> Vec<f64> {
        let mut sums = vec![0.0; self.sizes.len()];
        for (r, &l) in self.ranks.iter().zip(labels) {
            sums[l] += r;
        }
        sums
    }

    fn identity_labels(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(g, &s)| std::iter::repeat_n(g, s))
            .collect()
    }

    fn tie_denominator(&self) -> f64 {
        let n = self.n() as f64;
        1.0 - self.ties / (n * n * n - n)
    }

    fn h(&self, sums: &[f64]) -> f64 {
        let denom = self.tie_denominator();
        if denom <= 0.0 {
            return 0.0;
        }
        let n = self.n() as f64;
        let raw: f64 = sums
            .iter()
            .zip(&self.sizes)
            .map(|(s, &m)| s * s / m as f64)
            .sum::<f64>()
            * 12.0
            / (n * (n + 1.0))
            - 3.0 * (n + 1.0);
        (raw / denom).max(0.0)
    }

    fn dunn_z(&self, sums: &[f64], a: usize, b: usize) -> f64 {
        let n = self.n() as f64;
        let var = n * (n + 1.0) / 12.0 - self.ties / (12.0 * (n - 1.0));
        let se = (var * (1.0 / self.sizes[a] as f64 + 1.0 / self.sizes[b] as f64)).sqrt();
        if se <= 0.0 || !se.is_finite() {
            return 0.0;
        }
        (sums[b] / self.sizes[b] as f64 - sums[a] / self.sizes[a] as f64) / se
    }

    fn relabelings(&self) -> Option<u64> {
        // Multinomial N! / prod(n_i!), built up as a product of binomials.
        let mut total: u128 = 1;
        let mut placed = 0u128;
        for &s in &self.sizes {
            for k in 1..=s as u128 {
                placed += 1;
                total = total * placed / k;
                if total > u64::MAX as u128 {
                    return None;
                }
            }
        }
        u64::try_from(total).ok()
    }

    /// Fraction of relabelings whose statistic is at least `observed`.
    /// `stat` maps a vector of rank sums to the statistic.
    fn permutation_p(&self, observed: f64, stat: &dyn Fn(&[f64]) -> f64) -> (f64, PValueMethod) {
        let tol = 1e-9 * observed.abs().max(1.0);
        match self.relabelings() {
            Some(count) if count <= EXACT_LIMIT => {
                let mut labels = self.identity_labels();
                let mut hits = 0u64;
                loop {
                    if stat(&self.rank_sums(&labels)) >= observed - tol {
                        hits += 1;
                    }
                    if !next_permutation(&mut labels) {
                        break;
                    }
                }
                (
                    hits as f64 / count as f64,
                    PValueMethod::ExactPermutation { relabelings: count },
                )
            }
            _ => {
                let mut rng = RngStream::new(MC_SEED);
                let mut labels = self.identity_labels();
                let mut hits = 0usize;
                for _ in 0..MC_RESAMPLES {
                    rng.shuffle(&mut labels);
                    if stat(&self.rank_sums(&labels)) >= observed - tol {
                        hits += 1;
                    }
                }
                (
                    (hits + 1) as f64 / (MC_RESAMPLES + 1) as f64,
                    PValueMethod::MonteCarloPermutation {
                        resamples: MC_RESAMPLES,
                    },
                )
            }
        }
    }
}

/// Lexicographic successor of a sequence; `false` once the last permutation
/// has been reached.
fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Kruskal–Wallis H test on mid-ranks with tie correction.
///
/// ```
/// use fcpo::stats::{kruskal_wallis, SampleGroup};
///
/// let groups = vec![
///     SampleGroup::new("a", vec![1.0, 2.0, 3.0]).unwrap(),
///     SampleGroup::new("b", vec![10.0, 20.0, 30.0]).unwrap(),
///     SampleGroup::new("c", vec![100.0, 200.0, 300.0]).unwrap(),
/// ];
/// let r = kruskal_wallis(&groups).unwrap();
/// assert!((r.statistic - 7.2).abs() < 1e-12);
/// // 6 of the 1680 relabelings reach H = 7.2.
/// assert!((r.p_value - 6.0 / 1680.0).abs() < 1e-12);
/// ```
pub fn kruskal_wallis(groups: &[SampleGroup]) -> Result<TestReport> {
    let pooled = Pooled::new(groups)?;
    let df = groups.len() - 1;
    let h = pooled.h(&pooled.rank_sums(&pooled.identity_labels()));
    if pooled.tie_denominator() <= 0.0 {
        return Ok(TestReport {
            statistic: 0.0,
            p_value: 1.0,
            df,
            method: PValueMethod::ChiSquare,
        });
    }
    let (p_value, method) = if pooled.small() {
        pooled.permutation_p(h, &|sums| pooled.h(sums))
    } else {
        (chi_square_sf(h, df), PValueMethod::ChiSquare)
    };
    Ok(TestReport {
        statistic: h,
        p_value,
        df,
        method,
    })
}

/// Holm step-down adjustment; results are in input order.
pub fn holm(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
    let mut adjusted = vec![0.0; m];
    let mut running: f64 = 0.0;
    for (k, &i) in order.iter().enumerate() {
        running = running.max(((m - k) as f64 * p[i]).min(1.0));
        adjusted[i] = running;
    }
    adjusted
}

/// Dunn's test of every group against `control`, Holm-adjusted over the
/// comparisons. Rows follow the input order of the non-control groups.
pub fn dunn_holm(groups: &[SampleGroup], control: &str) -> Result<Vec<DunnRow>> {
    let pooled = Pooled::new(groups)?;
    let c = groups
        .iter()
        .position(|g| g.label == control)
        .ok_or_else(|| Error::InvalidConfig(format!("control group '{control}' not found")))?;
    let sums = pooled.rank_sums(&pooled.identity_labels());
    let mut rows = Vec::with_capacity(groups.len() - 1);
    for (j, g) in groups.iter().enumerate() {
        if j == c {
            continue;
        }
        let z = pooled.dunn_z(&sums, c, j);
        let p_raw = if z == 0.0 {
            1.0
        } else if pooled.small() {
            let observed = z.abs();
            pooled.permutation_p(observed, &|s| pooled.dunn_z(s, c, j).abs()).0
        } else {
            normal_two_sided(z)
        };
        rows.push(DunnRow {
            label: g.label.clone(),
            z,
            p_raw,
            p_adjusted: 0.0,
        });
    }
    let raw: Vec<f64> = rows.iter().map(|r| r.p_raw).collect();
    for (row, adj) in rows.iter_mut().zip(holm(&raw)) {
        row.p_adjusted = adj;
    }
    Ok(rows)
}

/// Cliff's delta `(#{a > b} - #{a < b}) / (|a| |b|)`.
///
/// Negative values mean `a` tends to be smaller than `b`.
pub fn cliffs_delta(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientSamples {
            needed: 1,
            got: 0,
        });
    }
    let mut sorted = b.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut greater: i64 = 0;
    let mut less: i64 = 0;
    for &x in a {
        let below = sorted.partition_point(|&y| y < x);
        let not_above = sorted.partition_point(|&y| y <= x);
        greater += below as i64;
        less += (sorted.len() - not_above) as i64;
    }
    Ok((greater - less) as f64 / (a.len() * b.len()) as f64)
}

/// Per-case ranks (1 = lowest median, ties share mid-ranks) and the average
/// rank of each algorithm over cases.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    pub per_case: Vec<Vec<f64>>,
    pub average: Vec<f64>,
}

pub fn rank_table(case_medians: &[Vec<f64>]) -> Result<RankTable> {
    let k = case_medians
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidConfig("no cases".into()))?;
    if k == 0 || case_medians.iter().any(|row| row.len() != k) {
        return Err(Error::InvalidConfig("rank table rows must have equal, non-zero length".into()));
    }
    if case_medians.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("rank table values must be finite".into()));
    }
    let per_case: Vec<Vec<f64>> = case_medians.iter().map(|row| midranks(row).0).collect();
    let n = per_case.len() as f64;
    let average = (0..k)
        .map(|j| per_case.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    Ok(RankTable { per_case, average })
}

/// Friedman test on a cases-by-algorithms rank matrix.
///
/// ```
/// use fcpo::stats::friedman;
///
/// let r = friedman(&[vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0]]).unwrap();
/// assert!((r.statistic - 4.0).abs() < 1e-12);
/// assert!((r.p_value - (-2.0f64).exp()).abs() < 1e-9);
/// ```
pub fn friedman(ranks: &[Vec<f64>]) -> Result<TestReport> {
    let n = ranks.len();
    let k = ranks.first().map_or(0, Vec::len);
    if n < 2 || k < 2 || ranks.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidConfig(
            "Friedman test needs a complete matrix with at least 2 cases and 2 algorithms".into(),
        ));
    }
    let (nf, kf) = (n as f64, k as f64);
    let sum_sq: f64 = (0..k)
        .map(|j| ranks.iter().map(|r| r[j]).sum::<f64>().powi(2))
        .sum();
    let stat = (12.0 / (nf * kf * (kf + 1.0)) * sum_sq - 3.0 * nf * (kf + 1.0)).max(0.0);
    Ok(TestReport {
        statistic: stat,
        p_value: chi_square_sf(stat, k - 1),
        df: k - 1,
        method: PValueMethod::ChiSquare,
    })
}

/// Median of a non-empty slice (mean of the two middle values for even
/// lengths).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let n = v.len();
    Some(0.5 * (v[(n - 1) / 2] + v[n / 2]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn groups(data: &[&[f64]]) -> Vec<SampleGroup> {
        data.iter()
            .enumerate()
            .map(|(i, v)| SampleGroup::new(format!("g{i}"), v.to_vec()).unwrap())
            .collect()
    }

    #[test]
    fn midrank_ties() {
        let (r, t) = midranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, vec![3.5, 1.0, 3.5, 2.0]);
        assert_eq!(t, 6.0);
    }

    #[test]
    fn identical_groups() {
        let g = groups(&[&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]]);
        let r = kruskal_wallis(&g).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let all_same = groups(&[&[4.0, 4.0], &[4.0, 4.0]]);
        let r = kruskal_wallis(&all_same).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn holm_example() {
        let adj = holm(&[0.01, 0.04, 0.03]);
        let expect = [0.03, 0.06, 0.06];
        for (a, e) in adj.iter().zip(expect) {
            assert!((a - e).abs() < 1e-15);
        }
        assert_eq!(holm(&[0.5, 0.9]), vec![1.0, 1.0]);
    }

    #[test]
    fn multinomial_count() {
        let g = groups(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[7.0, 8.0, 9.0]]);
        assert_eq!(Pooled::new(&g).unwrap().relabelings(), Some(1680));
    }

    #[test]
    fn next_permutation_counts_multiset() {
        let mut v = vec![0, 0, 1, 1];
        let mut n = 1;
        while next_permutation(&mut v) {
            n += 1;
        }
        assert_eq!(n, 6);
    }

    #[test]
    fn chi_square_df2_closed_form() {
        for x in [0.5, 1.0, 4.0, 9.0] {
            assert!((chi_square_sf(x, 2) - (-x / 2.0f64).exp()).abs() < 1e-12);
        }
        assert!((normal_two_sided(1.959963984540054) - 0.05).abs() < 1e-9);
    }

    #[test]
    fn large_groups_use_asymptotics() {
        let a: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..30).map(|i| i as f64 + 5.5).collect();
        let g = vec![SampleGroup::new("a", a).unwrap(), SampleGroup::new("b", b).unwrap()];
        assert_eq!(kruskal_wallis(&g).unwrap().method, PValueMethod::ChiSquare);
    }
}
