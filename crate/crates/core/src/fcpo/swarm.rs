use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{covariance, eigh, EigenSystem};
use crate::markov::{State, TransitionMatrix};

use super::config::FcpoConfig;

/// Full state of one run. Per-particle vectors are index-aligned.
#[derive(Debug, Clone)]
pub struct SwarmState {
    pub positions: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
    pub pbest: Vec<Vec<f64>>,
    pub pbest_values: Vec<f64>,
    pub gbest: Vec<f64>,
    pub gbest_value: f64,
    pub states: Vec<State>,
    pub transitions: TransitionMatrix,
    pub eigen: Option<EigenSystem>,
    /// Consecutive iterations without a global-best improvement.
    pub no_improvement: usize,
    pub iteration: usize,
}

impl SwarmState {
    pub fn size(&self) -> usize {
        self.positions.len()
    }

    pub fn dim(&self) -> usize {
        self.gbest.len()
    }

    /// Index of the particle holding the global best (lowest index on ties).
    pub fn best_index(&self) -> usize {
        argmin(&self.pbest_values)
    }

    /// Drops the `size - target` particles with the worst personal bests.
    /// Among equal values the higher index goes first; the global-best holder
    /// is never removed.
    pub fn shrink_to(&mut self, target: usize, p_min: usize) -> Result<()> {
        if target < p_min {
            return Err(Error::Contract(format!(
                "cannot shrink below p_min ({target} < {p_min})"
            )));
        }
        let size = self.size();
        if target >= size {
            return Ok(());
        }
        let keeper = self.best_index();
        let mut order: Vec<usize> = (0..size).filter(|&i| i != keeper).collect();
        order.sort_by(|&a, &b| {
            self.pbest_values[b]
                .total_cmp(&self.pbest_values[a])
                .then(b.cmp(&a))
        });
        let mut keep = vec![true; size];
        for &i in order.iter().take(size - target) {
            keep[i] = false;
        }
        retain_by(&mut self.positions, &keep);
        retain_by(&mut self.velocities, &keep);
        retain_by(&mut self.pbest, &keep);
        retain_by(&mut self.pbest_values, &keep);
        retain_by(&mut self.states, &keep);
        Ok(())
    }

    /// Recomputes the elite covariance eigensystem when the swarm is larger
    /// than the dimension. Otherwise, or under the `no_eigen` ablation, the
    /// previous eigensystem is kept.
    pub fn update_eigensystem(&mut self, cfg: &FcpoConfig) {
        if cfg.ablation.no_eigen || self.size() <= self.dim() {
            return;
        }
        let Ok(elites) = elite_set(&self.pbest_values, cfg.elite_fraction) else {
            return;
        };
        let d = self.dim();
        let rows = DMatrix::from_fn(elites.len(), d, |r, c| self.pbest[elites[r]][c]);
        if let Ok(eig) = covariance(&rows).and_then(|c| eigh(&c)) {
            if eig.values.iter().all(|v| v.is_finite()) {
                self.eigen = Some(eig);
            }
        }
    }
}

fn retain_by<T>(v: &mut Vec<T>, keep: &[bool]) {
    let mut it = keep.iter();
    v.retain(|_| *it.next().unwrap());
}

pub(crate) fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Indices of the `K = max(2, floor(fraction * P))` lowest values, best first,
/// ties broken by lower index.
pub fn elite_set(values: &[f64], elite_fraction: f64) -> Result<Vec<usize>> {
    let p = values.len();
    if p < 2 {
        return Err(Error::Contract(format!("elite set needs P >= 2, got {p}")));
    }
    let k = ((elite_fraction * p as f64).floor() as usize).max(2).min(p);
    let mut idx: Vec<usize> = (0..p).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    idx.truncate(k);
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    pub(crate) fn swarm(values: &[f64], dim: usize) -> SwarmState {
        let n = values.len();
        let pos: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64; dim]).collect();
        let best = argmin(values);
        SwarmState {
            positions: pos.clone(),
            velocities: vec![vec![0.0; dim]; n],
            pbest: pos.clone(),
            pbest_values: values.to_vec(),
            gbest: pos[best].clone(),
            gbest_value: values[best],
            states: vec![State::new(0).unwrap(); n],
            transitions: TransitionMatrix::uniform(),
            eigen: None,
            no_improvement: 0,
            iteration: 0,
        }
    }

    #[test]
    fn elite_sizes() {
        assert_eq!(elite_set(&[0.0; 4], 0.4).unwrap().len(), 2);
        assert_eq!(elite_set(&[0.0; 10], 0.4).unwrap().len(), 4);
        let mut e = elite_set(&[3.0, 1.0, 2.0], 0.4).unwrap();
        e.sort_unstable();
        assert_eq!(e, vec![1, 2]);
        assert!(elite_set(&[1.0], 0.4).is_err());
    }

    #[test]
    fn elite_ties_prefer_lower_index() {
        assert_eq!(elite_set(&[1.0, 0.0, 0.0, 0.0, 0.0], 0.4).unwrap(), vec![1, 2]);
    }

    #[test]
    fn shrink_removes_worst() {
        let mut s = swarm(&[1.0, 5.0, 3.0], 2);
        s.shrink_to(2, 2).unwrap();
        assert_eq!(s.pbest_values, vec![1.0, 3.0]);
        assert_eq!(s.positions, vec![vec![0.0, 0.0], vec![2.0, 2.0]]);
        assert_eq!(s.size(), 2);
    }

    #[test]
    fn shrink_to_current_size_is_identity() {
        let mut s = swarm(&[1.0, 5.0, 3.0], 2);
        let before = s.pbest_values.clone();
        s.shrink_to(3, 2).unwrap();
        assert_eq!(s.pbest_values, before);
        assert!(s.shrink_to(1, 2).is_err());
    }

    #[test]
    fn shrink_ties_drop_higher_index_and_keep_best() {
        let mut s = swarm(&[2.0, 2.0, 2.0, 2.0], 1);
        s.shrink_to(2, 2).unwrap();
        assert_eq!(s.positions, vec![vec![0.0], vec![1.0]]);

        // All values equal: the holder of the global best (index 0) survives
        // even though it shares the worst value.
        let mut s = swarm(&[7.0, 7.0, 7.0], 1);
        s.shrink_to(2, 2).unwrap();
        assert_eq!(s.positions[0], vec![0.0]);
    }

    #[test]
    fn eigensystem_gated_on_population() {
        let cfg = FcpoConfig::new(3, 10);
        let mut s = swarm(&[1.0, 2.0, 3.0], 3);
        s.update_eigensystem(&cfg);
        assert!(s.eigen.is_none(), "P <= D keeps the previous (absent) system");

        let mut s = swarm(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3);
        let mut no = cfg.clone();
        no.ablation.no_eigen = true;
        s.update_eigensystem(&no);
        assert!(s.eigen.is_none());
    }

    #[test]
    fn leading_direction_follows_elite_spread() {
        let cfg = FcpoConfig::new(3, 10);
        let values: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let mut s = swarm(&values, 3);
        for (i, p) in s.pbest.iter_mut().enumerate() {
            *p = vec![i as f64 * 1.7 - 3.0, 0.25, -1.0];
        }
        s.update_eigensystem(&cfg);
        let e = s.eigen.as_ref().unwrap();
        let lead: DVector<f64> = e.vectors.column(0).into_owned();
        assert!((lead[0].abs() - 1.0).abs() < 1e-6);
        assert!(lead[1].abs() < 1e-6 && lead[2].abs() < 1e-6);
    }
}
