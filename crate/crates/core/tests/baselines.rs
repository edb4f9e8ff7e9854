use fcpo::baselines::{
    cmaes_run, cmaes_run_observed, de_run_observed, lshade_run, pso_run, shade_run,
    BaselineConfig, CmaesConfig, PsoConfig, ShadeConfig,
};
use fcpo::linalg::random_orthogonal;
use fcpo::problem::sphere;
use fcpo::{Bounds, Budget, Counting, FnObjective, Objective, RngStream, RunRecord};

fn sphere_objective(dim: usize) -> FnObjective<fn(&[f64]) -> f64> {
    FnObjective::new("sphere", Bounds::uniform(dim, -100.0, 100.0).unwrap(), sphere as fn(&[f64]) -> f64)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    0.5 * (v[(n - 1) / 2] + v[n / 2])
}

fn median_over_seeds(run: impl Fn(u64) -> RunRecord) -> f64 {
    median((0..30).map(|s| run(s).final_value).collect())
}

#[test]
fn pso_sphere() {
    let f = sphere_objective(5);
    let m = median_over_seeds(|s| {
        pso_run(&f, &PsoConfig::default(), Budget::new(10_000).unwrap(), &mut RngStream::new(s)).unwrap()
    });
    assert!(m <= 1e-2, "median {m}");
}

#[test]
fn shade_sphere() {
    let f = sphere_objective(5);
    let m = median_over_seeds(|s| {
        shade_run(&f, &ShadeConfig::shade(5), Budget::new(10_000).unwrap(), &mut RngStream::new(s)).unwrap()
    });
    assert!(m <= 1e-6, "median {m}");
}

#[test]
fn lshade_sphere() {
    let f = sphere_objective(10);
    let m = median_over_seeds(|s| lshade_run(&f, Budget::new(20_000).unwrap(), &mut RngStream::new(s)).unwrap());
    assert!(m <= 1e-6, "median {m}");
}

#[test]
fn cmaes_sphere() {
    let f = sphere_objective(5);
    let m = median_over_seeds(|s| {
        cmaes_run(&f, &CmaesConfig::default(), Budget::new(10_000).unwrap(), &mut RngStream::new(s)).unwrap()
    });
    assert!(m <= 1e-10, "median {m}");
}

#[test]
fn every_baseline_is_deterministic_and_honours_the_budget() {
    let dim = 6;
    for id in ["pso", "shade", "lshade", "cmaes"] {
        let cfg = BaselineConfig::for_id(id, dim).unwrap();
        assert_eq!(cfg.algorithm_id(), id);
        for budget in [150u64, 1_001, 3_000] {
            let f = Counting::new(sphere_objective(dim));
            let a = cfg.run(&f, Budget::new(budget).unwrap(), &mut RngStream::new(21)).unwrap();
            assert_eq!(a.nfe, f.calls(), "{id}");
            assert_eq!(a.nfe, budget, "{id} stops only when the budget is spent");
            assert!(a.trace_is_consistent(), "{id}");
            assert_eq!(a.algorithm_id, id);
            let b = cfg.run(&f, Budget::new(budget).unwrap(), &mut RngStream::new(21)).unwrap();
            assert!(a.same_outcome(&b), "{id}");
        }
    }
    assert!(BaselineConfig::for_id("cso", dim).is_none());
}

#[test]
fn budget_smaller_than_population_is_rejected() {
    let f = sphere_objective(4);
    assert!(pso_run(&f, &PsoConfig::default(), Budget::new(29).unwrap(), &mut RngStream::new(0)).is_err());
    assert!(shade_run(&f, &ShadeConfig::shade(4), Budget::new(39).unwrap(), &mut RngStream::new(0)).is_err());
    assert!(lshade_run(&f, Budget::new(71).unwrap(), &mut RngStream::new(0)).is_err());
}

#[test]
fn shade_memory_stays_in_unit_interval() {
    let f = sphere_objective(5);
    let mut generations = 0;
    for cfg in [ShadeConfig::shade(5), ShadeConfig::lshade(5)] {
        de_run_observed(&f, &cfg, Budget::new(8_000).unwrap(), &mut RngStream::new(4), &mut |g| {
            generations += 1;
            assert!(g.memory_f.iter().all(|m| (0.0..=1.0).contains(m)));
            assert!(g.memory_cr.iter().flatten().all(|m| (0.0..=1.0).contains(m)));
        })
        .unwrap();
    }
    assert!(generations > 0);
}

#[test]
fn lshade_population_shrinks_to_four() {
    let f = sphere_objective(10);
    let mut sizes = Vec::new();
    de_run_observed(&f, &ShadeConfig::lshade(10), Budget::new(20_000).unwrap(), &mut RngStream::new(2), &mut |g| {
        sizes.push(g.population);
        assert!(g.archive_len as f64 <= (2.6 * g.population as f64).round());
    })
    .unwrap();
    assert!(sizes.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(*sizes.last().unwrap(), 4);
    assert!(sizes[0] < 180);
}

#[test]
fn cmaes_covariance_stays_symmetric() {
    let f = sphere_objective(6);
    let mut gens = 0;
    cmaes_run_observed(&f, &CmaesConfig::default(), Budget::new(3_000).unwrap(), &mut RngStream::new(3), &mut |g| {
        gens += 1;
        let c = g.covariance;
        assert!((c - c.transpose()).amax() <= 1e-10);
        assert!(g.sigma > 0.0 && g.sigma.is_finite());
    })
    .unwrap();
    assert!(gens > 100);
}

#[test]
fn cmaes_beats_pso_on_rotated_ellipsoid() {
    let dim = 10;
    let rotation = random_orthogonal(dim, &mut RngStream::new(99));
    let f = FnObjective::new("ellipsoid", Bounds::uniform(dim, -100.0, 100.0).unwrap(), move |x: &[f64]| {
        (0..dim)
            .map(|i| {
                let z: f64 = (0..dim).map(|j| rotation[(i, j)] * x[j]).sum();
                10f64.powf(6.0 * i as f64 / (dim - 1) as f64) * z * z
            })
            .sum()
    });
    let cma = median_over_seeds(|s| {
        cmaes_run(&f, &CmaesConfig::default(), Budget::new(20_000).unwrap(), &mut RngStream::new(s)).unwrap()
    });
    let pso = median_over_seeds(|s| {
        pso_run(&f, &PsoConfig::default(), Budget::new(20_000).unwrap(), &mut RngStream::new(s)).unwrap()
    });
    assert!(cma < pso, "cma {cma} pso {pso}");
}

#[test]
fn pso_inertia_is_linear_in_spent_budget() {
    let c = PsoConfig::default();
    assert_eq!(c.inertia(0.0), 0.9);
    assert!((c.inertia(0.5) - 0.65).abs() < 1e-15);
    assert_eq!(c.inertia(1.0), 0.4);
    let f = sphere_objective(3);
    assert_eq!(f.dimension(), 3);
}
