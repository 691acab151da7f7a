#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stackelberg_heat::follower::presets::standard_scenario;
use stackelberg_heat::pde::{BoundaryPair, Side, SpaceTimeField};
use stackelberg_heat::{Configuration, LeaderControl, OptimalitySystem, ProblemData, RobustParams, ScenarioConfig};

pub const ALL: [Configuration; 4] = [Configuration::A, Configuration::B, Configuration::C, Configuration::D];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard geometry with random initial state and random targets on the observation sets.
pub fn random_scenario(c: Configuration, n: usize, k: usize, rng: &mut ChaCha8Rng) -> ScenarioConfig {
    let mut cfg = standard_scenario(c, n, k).unwrap();
    let (space, time) = (cfg.space, cfg.time);
    let mut initial: Vec<f64> = (0..space.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    initial[0] = 0.0;
    initial[space.n_nodes() - 1] = 0.0;
    let targets = cfg
        .geometry
        .observations()
        .iter()
        .map(|r| {
            let mask = r.mask(&space).unwrap();
            SpaceTimeField::from_fn(space, time, |_, _| rng.gen_range(-1.0..1.0)).masked(&mask)
        })
        .collect();
    cfg.data = ProblemData { initial, targets };
    cfg
}

pub fn random_leader(sys: &OptimalitySystem, rng: &mut ChaCha8Rng) -> LeaderControl {
    match sys.zero_leader() {
        LeaderControl::Distributed(f) => {
            let mut f = f;
            f.values_mut().iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
            LeaderControl::Distributed(f)
        }
        LeaderControl::Boundary(_) => {
            let mut b = BoundaryPair::zeros(sys.time());
            for s in Side::BOTH {
                b[s].values_mut().iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
            }
            LeaderControl::Boundary(b)
        }
    }
}

pub fn params(ell: f64, gamma: f64) -> RobustParams {
    RobustParams::new(ell, gamma).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
