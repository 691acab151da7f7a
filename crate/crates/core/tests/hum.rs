mod common;

use common::*;
use stackelberg_heat::follower::presets::standard_scenario;
use stackelberg_heat::hum::{HumSettings, LeaderProblem};
use stackelberg_heat::pde::{h10_inner, SpaceTimeField};
use stackelberg_heat::{Configuration, LeaderControl, OptimalitySystem, ProblemData};

fn problem(c: Configuration, n: usize, eps: f64, seed: u64) -> LeaderProblem {
    let sys = OptimalitySystem::new(random_scenario(c, n, n, &mut rng(seed)), params(10.0, 10.0)).unwrap();
    LeaderProblem::new(sys, HumSettings::new(eps).unwrap()).unwrap()
}

#[test]
fn adjoint_pair_boundary_conditions() {
    for c in ALL {
        let p = problem(c, 12, 1e-4, 3);
        let phi_t = p.random_terminal(&mut rng(4));
        let pair = p.solve_adjoint(&phi_t).unwrap();
        assert_eq!(pair.terminal, phi_t);
        let space = p.system().space();
        assert!(pair.thetas.iter().all(|th| space.interior().all(|i| th.level(0)[i] == 0.0)));
        let zero = p.solve_adjoint(&vec![0.0; phi_t.len()]).unwrap();
        assert_eq!(zero.phi.max_abs(), 0.0);
        assert!(zero.thetas.iter().all(|t| t.max_abs() == 0.0));
        assert!(p.gram_apply(&vec![0.0; phi_t.len()]).unwrap().iter().all(|v| *v == 0.0));
    }
}

#[test]
fn gram_is_symmetric_positive_and_matches_observation_pairing() {
    for c in ALL {
        let p = problem(c, 16, 1e-4, 10);
        let space = p.system().space();
        let mut r = rng(11);
        for _ in 0..5 {
            let (a, b) = (p.random_terminal(&mut r), p.random_terminal(&mut r));
            let (ga, gb) = (p.gram_apply(&a).unwrap(), p.gram_apply(&b).unwrap());
            let (gab, gba) = (h10_inner(&space, &ga, &b), h10_inner(&space, &gb, &a));
            let ha = p.leader_from_adjoint(&p.solve_adjoint(&a).unwrap());
            let hb = p.leader_from_adjoint(&p.solve_adjoint(&b).unwrap());
            let pairing = p.leader_inner(&ha, &hb).unwrap();
            let scale = p.leader_norm_sq(&ha).unwrap().sqrt() * p.leader_norm_sq(&hb).unwrap().sqrt();
            assert!((gab - gba).abs() <= 1e-12 * scale.max(1e-300), "{c:?}");
            assert!((gab - pairing).abs() <= 1e-10 * scale.max(1e-300), "{c:?}: {gab} vs {pairing}");
            assert!(h10_inner(&space, &ga, &a) >= 0.0);
        }
    }
}

#[test]
fn functional_is_exactly_quadratic() {
    let p = problem(Configuration::B, 14, 1e-3, 2);
    let mut r = rng(3);
    let x = p.random_terminal(&mut r);
    let b = p.linear_term().unwrap();
    let d = p.random_terminal(&mut r);
    let fd = |t: f64| {
        let shift = |s: f64| x.iter().zip(&d).map(|(a, b)| a + s * b).collect::<Vec<_>>();
        (p.functional(&shift(t), &b).unwrap() - p.functional(&shift(-t), &b).unwrap()) / (2.0 * t)
    };
    let reference = fd(1.0);
    for t in [1e-1, 1e-2, 1e-3] {
        assert!((fd(t) - reference).abs() <= 1e-10 * reference.abs().max(1e-12), "step {t}");
    }
    let check = p.gradient_check(&x, 10, &[1e-4, 1e-5, 1e-6], &mut r).unwrap();
    assert!(check.max_relative_error <= 1e-6, "{check:?}");
}

#[test]
fn zero_data_gives_zero_control() {
    let mut cfg = standard_scenario(Configuration::A, 12, 12).unwrap();
    cfg.data = ProblemData {
        initial: vec![0.0; cfg.space.n_nodes()],
        targets: vec![SpaceTimeField::zeros(cfg.space, cfg.time)],
    };
    let p = LeaderProblem::new(OptimalitySystem::new(cfg, params(10.0, 10.0)).unwrap(), HumSettings::new(1e-4).unwrap()).unwrap();
    let r = p.minimize().unwrap();
    assert_eq!(r.cg_iterations, 0);
    assert!(r.terminal.iter().all(|v| *v == 0.0));
    assert_eq!(r.leader.max_abs(), 0.0);
    assert_eq!(r.terminal_residual, 0.0);
}

#[test]
fn certificate_and_leader_formula() {
    let p = problem(Configuration::A, 20, 1e-4, 6);
    let r = p.minimize().unwrap();
    let rel = (r.terminal_residual - r.internal_residual).abs() / r.terminal_residual;
    assert!(rel <= 1e-8, "{rel:.3e}");
    assert!(r.functional_trace.windows(2).all(|w| w[1] <= w[0] + 1e-15 * w[0].abs()));
    let pair = p.solve_adjoint(&r.terminal).unwrap();
    let expected = pair.phi.masked(p.system().omega_mask());
    let LeaderControl::Distributed(h) = &r.leader else { panic!("configuration A has a distributed leader") };
    assert_eq!(h.values(), expected.values());
}

#[test]
fn residual_shrinks_with_epsilon_and_floor_drops_under_refinement() {
    let residual = |n: usize, eps: f64| {
        let sys = OptimalitySystem::new(standard_scenario(Configuration::A, n, n).unwrap(), params(10.0, 10.0)).unwrap();
        LeaderProblem::new(sys, HumSettings::new(eps).unwrap()).unwrap().minimize().unwrap().terminal_residual
    };
    let coarse: Vec<f64> = [1e-2, 1e-4, 1e-6, 1e-8].iter().map(|e| residual(20, *e)).collect();
    assert!(coarse.windows(2).all(|w| w[1] < w[0]), "{coarse:?}");
    assert!(residual(40, 1e-8) < coarse[3]);
}

#[test]
fn probe_is_scale_invariant_and_skips_nothing_on_random_data() {
    let p = problem(Configuration::B, 16, 1e-4, 8);
    let mut r = rng(2);
    let phi = p.random_terminal(&mut r);
    let base = p.observability_sample(&phi).unwrap().ratio;
    let twice: Vec<f64> = phi.iter().map(|v| 2.0 * v).collect();
    assert!((p.observability_sample(&twice).unwrap().ratio / base - 1.0).abs() <= 1e-12);
    let rep = p.observability_probe(30, &mut r).unwrap();
    assert_eq!(rep.skipped, 0);
    assert!(rep.min <= rep.median && rep.median <= rep.max && rep.max <= rep.refined_max());
    assert!(rep.samples.iter().all(|s| s.ratio.is_finite() && s.ratio > 0.0));
    assert!(p.observability_probe(0, &mut r).is_err());
}
