mod common;

use common::*;
use rand::Rng;
use stackelberg_heat::follower::presets::standard_scenario;
use stackelberg_heat::follower::{gateaux_check, geometry_violations, verify_saddle, DenseOracle};
use stackelberg_heat::pde::{Region, SpaceTimeField};
use stackelberg_heat::{Configuration, Error, FollowerControls, Geometry, OptimalitySystem, ProblemData};

fn zero_data_system(c: Configuration, n: usize) -> OptimalitySystem {
    let mut cfg = standard_scenario(c, n, n).unwrap();
    cfg.data = ProblemData {
        initial: vec![0.0; cfg.space.n_nodes()],
        targets: cfg.data.targets.iter().map(|t| SpaceTimeField::zeros(t.space(), t.time())).collect(),
    };
    OptimalitySystem::new(cfg, params(10.0, 10.0)).unwrap()
}

#[test]
fn zero_problem_has_zero_equilibrium_at_first_iteration() {
    for c in ALL {
        let sys = zero_data_system(c, 10);
        let sol = sys.solve(&sys.zero_leader()).unwrap();
        assert_eq!(sol.controls.max_abs(), 0.0);
        assert_eq!(sol.state.max_abs(), 0.0);
        assert!(sol.iterations <= 1, "{c:?}: {}", sol.iterations);
        let costs = sys.evaluate_functional(&sol.controls, &sys.zero_leader(), &sol.state, sys.data()).unwrap();
        assert!(costs.iter().all(|j| *j == 0.0));
    }
}

#[test]
fn constant_target_cost_is_half_the_observed_area() {
    for n in [50, 100, 200] {
        let mut cfg = standard_scenario(Configuration::A, n, 20).unwrap();
        let mask = Region::new(0.4, 0.8).unwrap().mask(&cfg.space).unwrap();
        cfg.data = ProblemData {
            initial: vec![0.0; cfg.space.n_nodes()],
            targets: vec![SpaceTimeField::from_fn(cfg.space, cfg.time, |_, _| 1.0).masked(&mask)],
        };
        let sys = OptimalitySystem::new(cfg, params(10.0, 10.0)).unwrap();
        let zero = sys.zero_controls();
        let y = sys.state(&sys.zero_leader(), &zero, sys.data()).unwrap();
        let j = sys.evaluate_functional(&zero, &sys.zero_leader(), &y, sys.data()).unwrap()[0];
        assert!((j - 0.2).abs() <= sys.space().dx(), "n = {n}: {j}");
    }
}

/// Independent trapezoid quadrature of the robust functional of configuration A.
#[test]
fn functional_matches_direct_quadrature() {
    let mut r = rng(31);
    let cfg = random_scenario(Configuration::A, 7, 6, &mut r);
    let sys = OptimalitySystem::new(cfg.clone(), params(3.0, 4.0)).unwrap();
    let mut controls = sys.zero_controls();
    let values: Vec<f64> = (0..controls.to_vec().len()).map(|_| r.gen_range(-1.0..1.0)).collect();
    controls.set_from_slice(&values);
    let h = random_leader(&sys, &mut r);
    let y = sys.state(&h, &controls, sys.data()).unwrap();
    let got = sys.evaluate_functional(&controls, &h, &y, sys.data()).unwrap()[0];

    let (space, time) = (cfg.space, cfg.time);
    let (dx, dt) = (space.dx(), time.dt());
    let wt = |k: usize| if k == 0 || k == time.n_steps() { 0.5 * dt } else { dt };
    let wx = |i: usize| if i == 0 || i == space.n_nodes() - 1 { 0.5 * dx } else { dx };
    let FollowerControls::A { v, psi } = &controls else { unreachable!() };
    let mut expected = 0.0;
    for k in 0..time.n_levels() {
        for i in 1..=space.n_interior() {
            let x = space.x(i);
            if (0.4..=0.8).contains(&x) {
                let d = y.level(k)[i] - cfg.data.targets[0].level(k)[i];
                expected += 0.5 * wt(k) * dx * d * d;
            }
        }
        expected += 0.5 * 9.0 * wt(k) * (v.left[k].powi(2) + v.right[k].powi(2));
        for i in 0..space.n_nodes() {
            expected -= 0.5 * 16.0 * wt(k) * wx(i) * psi.level(k)[i].powi(2);
        }
    }
    assert!((got - expected).abs() <= 1e-12 * expected.abs().max(1.0), "{got} vs {expected}");
}

#[test]
fn inconsistent_state_is_rejected() {
    let mut r = rng(5);
    let sys = OptimalitySystem::new(random_scenario(Configuration::B, 8, 8, &mut r), params(10.0, 10.0)).unwrap();
    let h = random_leader(&sys, &mut r);
    let sol = sys.solve(&h).unwrap();
    let wrong = sol.state.scaled(1.5);
    let res = sys.evaluate_functional(&sol.controls, &h, &wrong, sys.data());
    if cfg!(debug_assertions) {
        assert!(matches!(res, Err(Error::InconsistentState { .. })));
    }
}

#[test]
fn dense_oracle_on_all_tiny_grids() {
    for c in ALL {
        for (n, k) in [(2, 8), (4, 4), (8, 2), (4, 16)] {
            let mut r = rng(n as u64 * 31 + k as u64);
            let mut cfg = random_scenario(c, n.max(4), k, &mut r);
            if matches!(c, Configuration::C | Configuration::D) {
                cfg.weights.s = 1e-3;
            }
            let p = params(4.0, 5.0);
            let oracle = DenseOracle::new(cfg.clone(), p).unwrap();
            let h = random_leader(oracle.system(), &mut r);
            let fixed = oracle.system().solve(&h).unwrap();
            let dense = oracle.solve(&h, &cfg.data).unwrap();
            let gap = max_abs_diff(fixed.state.values(), dense.state.values());
            assert!(gap <= 1e-10, "{c:?} {n}x{k}: {gap:.3e}");
        }
    }
}

#[test]
fn contraction_improves_with_mu() {
    let mut r = rng(77);
    let cfg = random_scenario(Configuration::A, 30, 30, &mut r);
    let h = random_leader(&OptimalitySystem::new(cfg.clone(), params(5.0, 5.0)).unwrap(), &mut r);
    let ratios: Vec<f64> = [5.0, 10.0, 20.0]
        .iter()
        .map(|&l| OptimalitySystem::new(cfg.clone(), params(l, l)).unwrap().solve(&h).unwrap().contraction_ratio().unwrap())
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] <= w[0]), "{ratios:?}");
}

#[test]
fn weak_penalties_are_reported_as_non_contracting() {
    let mut r = rng(8);
    let cfg = random_scenario(Configuration::A, 20, 20, &mut r);
    let sys = OptimalitySystem::new(cfg, params(0.02, 0.02)).unwrap();
    let h = random_leader(&sys, &mut r);
    match sys.solve(&h) {
        Err(Error::NonContraction { ratio, .. }) => assert!(ratio >= 1.0),
        other => panic!("expected non-contraction, got {:?}", other.map(|s| s.iterations)),
    }
}

#[test]
fn gateaux_derivative_starts_from_zero_and_zero_direction_is_trivial() {
    let mut r = rng(4);
    let sys = OptimalitySystem::new(random_scenario(Configuration::A, 12, 12, &mut r), params(10.0, 10.0)).unwrap();
    let zero = sys.zero_controls();
    let rep = gateaux_check(&sys, &sys.zero_leader(), &zero, &zero, sys.data(), &[1.0, 1e-3]).unwrap();
    assert_eq!(rep.derivative.max_abs(), 0.0);
    assert!(rep.discrepancies.iter().all(|d| *d == 0.0));

    let mut dir = sys.zero_controls();
    let values: Vec<f64> = (0..dir.to_vec().len()).map(|_| r.gen_range(-1.0..1.0)).collect();
    dir.set_from_slice(&values);
    let rep = gateaux_check(&sys, &sys.zero_leader(), &zero, &dir, &sys.zero_data(), &[1.0]).unwrap();
    let first = rep.derivative.level(0);
    assert!(sys.space().interior().all(|i| first[i] == 0.0));
}

/// With O(1) data the quotient at small steps is limited by cancellation, not by the scheme.
#[test]
fn gateaux_discrepancy_tracks_rounding_with_large_base_state() {
    let mut r = rng(12);
    let sys = OptimalitySystem::new(random_scenario(Configuration::A, 20, 20, &mut r), params(10.0, 10.0)).unwrap();
    let h = random_leader(&sys, &mut r);
    let base = sys.solve(&h).unwrap().controls;
    let mut dir = sys.zero_controls();
    let values: Vec<f64> = (0..dir.to_vec().len()).map(|_| r.gen_range(-1.0..1.0)).collect();
    dir.set_from_slice(&values);
    let rep = gateaux_check(&sys, &h, &base, &dir, sys.data(), &[1.0, 1e-3, 1e-6]).unwrap();
    let y0 = sys.state(&h, &base, sys.data()).unwrap().max_abs();
    for (lam, d) in rep.steps.iter().zip(&rep.discrepancies) {
        let floor = 64.0 * f64::EPSILON * (1.0 + y0 / (lam * rep.derivative.max_abs()));
        assert!(*d <= floor, "step {lam}: {d:.3e} above {floor:.3e}");
    }
}

#[test]
fn saddle_inequalities_and_concavity() {
    for c in [Configuration::A, Configuration::B] {
        let mut r = rng(21);
        let sys = OptimalitySystem::new(random_scenario(c, 20, 20, &mut r), params(10.0, 10.0)).unwrap();
        let h = random_leader(&sys, &mut r);
        let sol = sys.solve(&h).unwrap();
        let rep = verify_saddle(&sys, &sol, &h, sys.data(), 40, &mut r).unwrap();
        assert!(rep.passed(1e-8), "{c:?}: {rep:?}");
        assert!(rep.disturbance_second_difference.unwrap() <= 0.0);
        assert!(rep.disturbance_curvature.unwrap() < 0.0);
    }
}

#[test]
fn zero_equilibrium_is_strict() {
    let sys = zero_data_system(Configuration::A, 12);
    let sol = sys.solve(&sys.zero_leader()).unwrap();
    let rep = verify_saddle(&sys, &sol, &sys.zero_leader(), sys.data(), 30, &mut rng(1)).unwrap();
    assert!(rep.worst_min_violation < 0.0 && rep.worst_max_violation < 0.0);
}

#[test]
fn perturbed_equilibrium_is_rejected() {
    let mut r = rng(9);
    let sys = OptimalitySystem::new(random_scenario(Configuration::C, 16, 16, &mut r), params(10.0, 10.0)).unwrap();
    let h = random_leader(&sys, &mut r);
    let mut sol = sys.solve(&h).unwrap();
    let mut shifted = sol.controls.to_vec();
    let k = shifted.len() / 2 + 3;
    shifted[k] += 1e-3;
    sol.controls.set_from_slice(&shifted);
    sol.state = sys.state(&h, &sol.controls, sys.data()).unwrap();
    let rep = verify_saddle(&sys, &sol, &h, sys.data(), 20, &mut r).unwrap();
    assert!(!rep.passed(1e-8));
}

#[test]
fn geometry_rules() {
    let ok = standard_scenario(Configuration::A, 10, 10).unwrap();
    assert!(geometry_violations(&ok.geometry, ok.space.length()).is_empty());
    let Geometry::A { follower, .. } = ok.geometry else { unreachable!() };
    let bad = Geometry::A { omega: Region::new(0.1, 0.3).unwrap(), follower, observation: Region::new(0.5, 0.9).unwrap() };
    let v = geometry_violations(&bad, ok.space.length());
    assert_eq!(v.len(), 1);
    assert!(v[0].to_string().contains("ω ∩ O_d ≠ ∅"), "{}", v[0]);
}
