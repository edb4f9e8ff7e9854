//! Per-particle moves selected by the Markov state.

use crate::linalg::EigenSystem;
use crate::problem::Bounds;
use crate::rng::RngStream;

use super::config::{FcpoConfig, LOCKDOWN_VELOCITY_FACTOR, VELOCITY_CLAMP_FRACTION};
use super::swarm::SwarmState;

/// New position and velocity of one particle.
#[derive(Debug, Clone, PartialEq)]
pub struct Move {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
}

/// The operator actually applied to a particle in one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    Neutral,
    Zoomies,
    Purr,
    Restoration,
}

/// Cosine inertia schedule `max(0.1, 0.4 + 0.5 cos(pi rho))`.
pub fn inertia_weight(rho: f64) -> f64 {
    (0.4 + 0.5 * (std::f64::consts::PI * rho).cos()).max(0.1)
}

/// Step scale of eigen-aligned refinement, `0.02 (1 - rho)^2`.
pub fn purr_step(rho: f64) -> f64 {
    0.02 * (1.0 - rho).powi(2)
}

/// Per-coordinate velocity bound at progress `rho`.
pub fn velocity_bound(bounds: &Bounds, rho: f64, cfg: &FcpoConfig) -> Vec<f64> {
    let factor = if rho > cfg.lockdown_rho {
        LOCKDOWN_VELOCITY_FACTOR
    } else {
        1.0
    };
    bounds
        .widths()
        .into_iter()
        .map(|w| VELOCITY_CLAMP_FRACTION * w * factor)
        .collect()
}

/// Inertia + cognitive + social velocity update, clamped component-wise,
/// followed by a clipped position step. Under the terminal lockdown the
/// inertia is zero and the clamp shrinks by a factor `1e-6`.
pub fn neutral_update(
    state: &SwarmState,
    i: usize,
    rho: f64,
    cfg: &FcpoConfig,
    bounds: &Bounds,
    rng: &mut RngStream,
) -> Move {
    let w = if rho > cfg.lockdown_rho {
        0.0
    } else {
        inertia_weight(rho)
    };
    let vmax = velocity_bound(bounds, rho, cfg);
    let x = &state.positions[i];
    let v = &state.velocities[i];
    let p = &state.pbest[i];
    let g = &state.gbest;
    let mut velocity = Vec::with_capacity(x.len());
    let mut position = Vec::with_capacity(x.len());
    for d in 0..x.len() {
        let r1 = rng.uniform();
        let r2 = rng.uniform();
        let vd = w * v[d] + cfg.c1 * r1 * (p[d] - x[d]) + cfg.c2 * r2 * (g[d] - x[d]);
        let vd = vd.clamp(-vmax[d], vmax[d]);
        velocity.push(vd);
        position.push(x[d] + vd);
    }
    bounds.clip_in_place(&mut position);
    Move { position, velocity }
}

/// `clip(a + f (a - b))` for the elite-difference jump.
pub fn elite_jump(pbest_a: &[f64], pbest_b: &[f64], f: f64, bounds: &Bounds) -> Vec<f64> {
    let mut x: Vec<f64> = pbest_a
        .iter()
        .zip(pbest_b)
        .map(|(a, b)| a + f * (a - b))
        .collect();
    bounds.clip_in_place(&mut x);
    x
}

/// Elite-difference jump: two distinct elites `a`, `b` ordered so that `a`
/// is not worse, then `x' = clip(pbest_a + F (pbest_a - pbest_b))` with
/// `F ~ N(0.5, 0.3^2)` and zero velocity.
///
/// Returns `None` when the elite personal bests hold fewer than two distinct
/// positions; the caller then applies the neutral update.
pub fn zoomies_move(
    state: &SwarmState,
    elites: &[usize],
    bounds: &Bounds,
    rng: &mut RngStream,
) -> Option<Move> {
    let first = &state.pbest[*elites.first()?];
    if elites.iter().all(|&e| state.pbest[e] == *first) {
        return None;
    }
    let ia = rng.below(elites.len());
    let mut ib = rng.below(elites.len() - 1);
    if ib >= ia {
        ib += 1;
    }
    let (mut a, mut b) = (elites[ia], elites[ib]);
    if state.pbest_values[b] < state.pbest_values[a] {
        std::mem::swap(&mut a, &mut b);
    }
    let f = rng.normal_with(0.5, 0.3);
    Some(Move {
        position: elite_jump(&state.pbest[a], &state.pbest[b], f, bounds),
        velocity: vec![0.0; state.dim()],
    })
}

/// Gaussian refinement around the personal best along the elite eigenbasis:
/// `x' = clip(pbest_i + alpha(rho) [Q (s ⊙ xi)] ⊙ (ub - lb))`, zero velocity.
pub fn purr_displacement(
    eig: &EigenSystem,
    rho: f64,
    bounds: &Bounds,
    rng: &mut RngStream,
) -> Vec<f64> {
    let scales = eig.normalized_scales();
    let d = eig.dim();
    let xi: Vec<f64> = (0..d).map(|k| scales[k] * rng.normal()).collect();
    let alpha = purr_step(rho);
    (0..d)
        .map(|r| {
            let rotated: f64 = (0..d).map(|k| eig.vectors[(r, k)] * xi[k]).sum();
            alpha * rotated * bounds.width(r)
        })
        .collect()
}

/// Eigen-aligned refinement; `None` when no eigensystem exists yet.
pub fn purr_move(
    state: &SwarmState,
    i: usize,
    rho: f64,
    bounds: &Bounds,
    rng: &mut RngStream,
) -> Option<Move> {
    let eig = state.eigen.as_ref()?;
    let step = purr_displacement(eig, rho, bounds, rng);
    let mut position: Vec<f64> = state.pbest[i].iter().zip(&step).map(|(p, s)| p + s).collect();
    bounds.clip_in_place(&mut position);
    Some(Move {
        position,
        velocity: vec![0.0; state.dim()],
    })
}

/// Damped pull-back: `v' = v / 2`, `x' = clip(x + (pbest - x) / 2)`.
pub fn restoration_move(state: &SwarmState, i: usize, bounds: &Bounds) -> Move {
    let x = &state.positions[i];
    let p = &state.pbest[i];
    let mut position: Vec<f64> = x.iter().zip(p).map(|(x, p)| x + 0.5 * (p - x)).collect();
    bounds.clip_in_place(&mut position);
    Move {
        position,
        velocity: state.velocities[i].iter().map(|v| 0.5 * v).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::{State, TransitionMatrix};
    use nalgebra::{DMatrix, DVector};

    fn bounds(d: usize) -> Bounds {
        Bounds::uniform(d, -100.0, 100.0).unwrap()
    }

    fn single(x: Vec<f64>, v: Vec<f64>, p: Vec<f64>, g: Vec<f64>) -> SwarmState {
        SwarmState {
            positions: vec![x],
            velocities: vec![v],
            pbest: vec![p],
            pbest_values: vec![0.0],
            gbest: g,
            gbest_value: 0.0,
            states: vec![State::new(0).unwrap()],
            transitions: TransitionMatrix::uniform(),
            eigen: None,
            no_improvement: 0,
            iteration: 0,
        }
    }

    #[test]
    fn inertia_schedule() {
        assert!((inertia_weight(0.0) - 0.9).abs() < 1e-15);
        assert!((inertia_weight(0.5) - 0.4).abs() < 1e-15);
        assert_eq!(inertia_weight(1.0), 0.1);
    }

    #[test]
    fn neutral_fixed_point() {
        let s = single(vec![1.0, 2.0], vec![0.0, 0.0], vec![1.0, 2.0], vec![1.0, 2.0]);
        let cfg = FcpoConfig::new(2, 10);
        let m = neutral_update(&s, 0, 0.3, &cfg, &bounds(2), &mut RngStream::new(1));
        assert_eq!(m.velocity, vec![0.0, 0.0]);
        assert_eq!(m.position, vec![1.0, 2.0]);
    }

    #[test]
    fn neutral_without_forces_is_stationary() {
        let s = single(vec![3.0], vec![5.0], vec![50.0], vec![-50.0]);
        let mut cfg = FcpoConfig::new(1, 10);
        cfg.c1 = 0.0;
        cfg.c2 = 0.0;
        // rho past the lockdown gives w = 0.
        let m = neutral_update(&s, 0, 0.99, &cfg, &bounds(1), &mut RngStream::new(1));
        assert_eq!(m.position, vec![3.0]);
        assert_eq!(m.velocity, vec![0.0]);
    }

    #[test]
    fn neutral_clamps_velocity() {
        let b = Bounds::new(vec![-100.0, 0.0, -1.0], vec![100.0, 1.0, 1.0]).unwrap();
        let cfg = FcpoConfig::new(3, 10);
        let mut rng = RngStream::new(2);
        for k in 0..200 {
            let far = if k % 2 == 0 { 1e9 } else { -1e9 };
            let s = single(vec![0.0, 0.5, 0.0], vec![far; 3], vec![far; 3], vec![-far; 3]);
            for rho in [0.0, 0.5, 0.97, 0.99] {
                let m = neutral_update(&s, 0, rho, &cfg, &b, &mut rng);
                let vmax = velocity_bound(&b, rho, &cfg);
                for d in 0..3 {
                    assert!(m.velocity[d].abs() <= vmax[d]);
                    assert!(m.velocity[d].abs() <= 0.2 * b.width(d));
                }
                assert!(b.contains(&m.position));
            }
        }
    }

    #[test]
    fn elite_jump_arithmetic() {
        let b = bounds(2);
        assert_eq!(elite_jump(&[0.0, 0.0], &[1.0, 0.0], 0.5, &b), vec![-0.5, 0.0]);
        assert_eq!(elite_jump(&[3.0, 4.0], &[-7.0, 1.0], 0.0, &b), vec![3.0, 4.0]);
        assert_eq!(elite_jump(&[3.0, 4.0], &[3.0, 4.0], 1.7, &b), vec![3.0, 4.0]);
    }

    #[test]
    fn zoomies_needs_distinct_elites() {
        let mut s = single(vec![0.0], vec![1.0], vec![2.0], vec![2.0]);
        s.pbest.push(vec![2.0]);
        s.pbest_values.push(1.0);
        s.positions.push(vec![0.0]);
        s.velocities.push(vec![0.0]);
        s.states.push(State::new(5).unwrap());
        assert!(zoomies_move(&s, &[0, 1], &bounds(1), &mut RngStream::new(0)).is_none());
        s.pbest[1] = vec![4.0];
        let m = zoomies_move(&s, &[0, 1], &bounds(1), &mut RngStream::new(0)).unwrap();
        assert_eq!(m.velocity, vec![0.0]);
    }

    #[test]
    fn purr_vanishes_at_end() {
        let eig = EigenSystem {
            vectors: DMatrix::identity(2, 2),
            values: DVector::from_vec(vec![2.0, 1.0]),
        };
        let d = purr_displacement(&eig, 1.0, &bounds(2), &mut RngStream::new(4));
        assert_eq!(d, vec![0.0, 0.0]);
        assert_eq!(purr_step(0.0), 0.02);
    }

    #[test]
    fn purr_isotropic_with_equal_eigenvalues() {
        let eig = EigenSystem {
            vectors: DMatrix::identity(3, 3),
            values: DVector::from_vec(vec![5.0, 5.0, 5.0]),
        };
        assert_eq!(eig.normalized_scales().as_slice(), &[1.0, 1.0, 1.0]);
        let b = bounds(3);
        let mut rng = RngStream::new(9);
        let mut reference = RngStream::new(9);
        let d = purr_displacement(&eig, 0.0, &b, &mut rng);
        for v in d {
            assert!((v - 0.02 * 200.0 * reference.normal()).abs() < 1e-12);
        }
    }

    #[test]
    fn purr_needs_eigensystem() {
        let s = single(vec![0.0], vec![0.0], vec![0.0], vec![0.0]);
        assert!(purr_move(&s, 0, 0.5, &bounds(1), &mut RngStream::new(0)).is_none());
    }

    #[test]
    fn restoration_examples() {
        let b = bounds(2);
        let s = single(vec![1.0, 1.0], vec![4.0, -4.0], vec![1.0, 1.0], vec![0.0, 0.0]);
        let m = restoration_move(&s, 0, &b);
        assert_eq!(m.position, vec![1.0, 1.0]);
        assert_eq!(m.velocity, vec![2.0, -2.0]);
        let s = single(vec![0.0, 0.0], vec![0.0, 0.0], vec![2.0, 2.0], vec![0.0, 0.0]);
        assert_eq!(restoration_move(&s, 0, &b).position, vec![1.0, 1.0]);
    }
}
