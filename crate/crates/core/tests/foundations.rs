use fcpo::linalg::{covariance, eigh, orthogonality_error, random_orthogonal};
use fcpo::markov::{State, TransitionMatrix, EXPLORATION_STATE, N_STATES};
use fcpo::sampling::{lhs, lhs_maximin_candidates};
use fcpo::{derive_run_seed, Bounds, RngStream};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn strata_hit_once(points: &[Vec<f64>], bounds: &Bounds) -> bool {
    let n = points.len();
    (0..bounds.dim()).all(|d| {
        let mut seen = vec![false; n];
        for p in points {
            let u = (p[d] - bounds.lower()[d]) / bounds.width(d);
            let k = ((u * n as f64) as usize).min(n - 1);
            if seen[k] {
                return false;
            }
            seen[k] = true;
        }
        true
    })
}

#[test]
fn lhs_is_stratified_on_skewed_boxes() {
    let bounds = Bounds::new(vec![-100.0, 0.0, 3.0], vec![100.0, 1e-3, 3.5]).unwrap();
    let mut rng = RngStream::new(17);
    for n in [1, 2, 7, 64] {
        let design = lhs(n, &bounds, &mut rng).unwrap();
        assert_eq!(design.len(), n);
        assert!(design.points.iter().all(|p| bounds.contains(p)));
        assert!(strata_hit_once(&design.points, &bounds));
    }
}

#[test]
fn maximin_keeps_the_most_spread_candidate() {
    let bounds = Bounds::uniform(4, 0.0, 1.0).unwrap();
    let (best, all) = lhs_maximin_candidates(12, &bounds, &mut RngStream::new(3), 8).unwrap();
    let scores: Vec<f64> = all.iter().map(|d| d.min_pairwise_distance()).collect();
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(scores[best], top);
    assert_eq!(scores.iter().position(|&s| s == top), Some(best));
}

#[test]
fn run_seeds_do_not_collide() {
    let mut seen = std::collections::HashSet::new();
    for master in [0, 1, u64::MAX] {
        for i in 0..2_000 {
            assert!(seen.insert(derive_run_seed(master, i)));
        }
    }
}

#[test]
fn stagnation_then_renormalize_matches_hand_value() {
    let a = TransitionMatrix::uniform().stagnation_bias().stagnation_bias();
    assert_eq!(a.get(0, EXPLORATION_STATE), 1.0 / 7.0 + 0.4 + 0.4);
    let b = a.renormalize_rows().unwrap();
    let expect = (1.0 / 7.0 + 0.8) / 1.8;
    for r in 0..N_STATES {
        assert!((b.get(r, EXPLORATION_STATE) - expect).abs() < 1e-15);
    }
}

#[test]
fn one_hot_rows_are_deterministic() {
    let mut rows = [[0.0; N_STATES]; N_STATES];
    for (r, row) in rows.iter_mut().enumerate() {
        row[(r + 3) % N_STATES] = 1.0;
    }
    let a = TransitionMatrix::from_rows(rows).unwrap();
    let current: Vec<State> = (0..50).map(|i| State::new(i % N_STATES).unwrap()).collect();
    let next = a.sample_states(&current, &mut RngStream::new(1));
    for (c, n) in current.iter().zip(&next) {
        assert_eq!(n.index(), (c.index() + 3) % N_STATES);
    }
}

#[test]
fn covariance_of_rotated_axes_has_known_spectrum() {
    // Points ±s_k along the columns of a rotation: sample covariance is
    // Q diag(2 s_k^2 / (n - 1)) Q^T with n = 2D.
    let d = 6;
    let q = random_orthogonal(d, &mut RngStream::new(8));
    let scales = [5.0, 4.0, 3.0, 2.0, 1.0, 0.5];
    let mut pts = DMatrix::zeros(2 * d, d);
    for k in 0..d {
        for (row, sign) in [(2 * k, 1.0), (2 * k + 1, -1.0)] {
            for j in 0..d {
                pts[(row, j)] = sign * scales[k] * q[(j, k)];
            }
        }
    }
    let e = eigh(&covariance(&pts).unwrap()).unwrap();
    for (k, s) in scales.iter().enumerate() {
        let expect = 2.0 * s * s / (2 * d - 1) as f64;
        assert!((e.values[k] - expect).abs() < 1e-10, "{k}");
        let dot: f64 = (0..d).map(|j| e.vectors[(j, k)] * q[(j, k)]).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #[test]
    fn eigh_recovers_planted_spectrum(seed in any::<u64>(), d in 1usize..12) {
        let mut rng = RngStream::new(seed);
        let q = random_orthogonal(d, &mut rng);
        prop_assert!(orthogonality_error(&q) < 1e-12);
        let mut lambda: Vec<f64> = (0..d).map(|_| rng.uniform_in(-10.0, 10.0)).collect();
        let s = &q * DMatrix::from_diagonal(&DVector::from_vec(lambda.clone())) * q.transpose();
        let e = eigh(&s).unwrap();
        lambda.sort_by(|a, b| b.total_cmp(a));
        for (got, want) in e.values.iter().zip(&lambda) {
            prop_assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn update_chains_stay_stochastic(ops in proptest::collection::vec((0usize..N_STATES, 0.0f64..=1.0, any::<bool>()), 1..60)) {
        let mut a = TransitionMatrix::uniform();
        for (s, eta, stagnate) in ops {
            a = a.reinforce_best(State::new(s).unwrap(), eta);
            if stagnate {
                a = a.stagnation_bias();
            }
            a = a.renormalize_rows().unwrap();
            prop_assert!(a.is_row_stochastic(1e-12));
        }
    }
}
