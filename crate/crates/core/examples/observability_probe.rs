//! Sampled observability ratios for increasing follower penalties.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stackelberg_heat::follower::presets::standard_scenario;
use stackelberg_heat::hum::{HumSettings, LeaderProblem};
use stackelberg_heat::{Configuration, OptimalitySystem, RobustParams};

fn main() -> stackelberg_heat::Result<()> {
    let cfg = standard_scenario(Configuration::A, 30, 30)?;
    for ell in [10.0, 20.0, 40.0] {
        let sys = OptimalitySystem::new(cfg.clone(), RobustParams::new(ell, ell)?)?;
        let problem = LeaderProblem::new(sys, HumSettings::new(1e-4)?)?;
        let report = problem.observability_probe(100, &mut ChaCha8Rng::seed_from_u64(5))?;
        println!(
            "ell = gamma = {ell:>4}: ratio min {:.4e} median {:.4e} max {:.6e} refined {:.3e}",
            report.min,
            report.median,
            report.max,
            report.refined_max()
        );
    }
    Ok(())
}
