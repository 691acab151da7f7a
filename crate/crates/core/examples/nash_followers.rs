//! Two followers in a Nash game: unilateral deviations and the dense space-time oracle.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stackelberg_heat::experiment::random_leader;
use stackelberg_heat::follower::presets::standard_scenario;
use stackelberg_heat::follower::{verify_saddle, DenseOracle};
use stackelberg_heat::{Configuration, OptimalitySystem, RobustParams};

fn main() -> stackelberg_heat::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = RobustParams::new(10.0, 10.0)?;

    let sys = OptimalitySystem::new(standard_scenario(Configuration::D, 50, 50)?, params)?;
    let h = random_leader(&sys, &mut rng);
    let sol = sys.solve(&h)?;
    let report = verify_saddle(&sys, &sol, &h, sys.data(), 50, &mut rng)?;
    println!("costs {:?}", sys.evaluate_functional(&sol.controls, &h, &sol.state, sys.data())?);
    println!("worst unilateral improvement {:.3e} (slack {:.0e})", report.worst_min_violation, report.slack);

    let cfg = standard_scenario(Configuration::D, 4, 4)?;
    let oracle = DenseOracle::new(cfg.clone(), params)?;
    let h = random_leader(oracle.system(), &mut rng);
    let fixed = oracle.system().solve(&h)?;
    let dense = oracle.solve(&h, &cfg.data)?;
    let gap = fixed.state.values().iter().zip(dense.state.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("{} unknowns, fixed point vs dense solve: {gap:.3e}", oracle.n_unknowns());
    Ok(())
}
