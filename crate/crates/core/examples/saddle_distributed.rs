//! Robust follower equilibrium with a distributed leader, checked by random perturbations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stackelberg_heat::experiment::random_leader;
use stackelberg_heat::follower::presets::standard_scenario;
use stackelberg_heat::follower::verify_saddle;
use stackelberg_heat::{Configuration, OptimalitySystem, RobustParams};

fn main() -> stackelberg_heat::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = standard_scenario(Configuration::A, 50, 50)?;
    for ell in [5.0, 10.0, 20.0] {
        let sys = OptimalitySystem::new(cfg.clone(), RobustParams::new(ell, ell)?)?;
        let h = random_leader(&sys, &mut rng);
        let sol = sys.solve(&h)?;
        let report = verify_saddle(&sys, &sol, &h, sys.data(), 100, &mut rng)?;
        println!(
            "ell = gamma = {ell:>4}: {} iterations, contraction {:.3e}, worst violations {:.2e} / {:.2e}, gradient {:.2e}",
            sol.iterations,
            sol.contraction_ratio().unwrap_or(0.0),
            report.worst_min_violation,
            report.worst_max_violation,
            report.gradient_relative,
        );
    }
    Ok(())
}
