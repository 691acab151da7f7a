//! Leader and follower on opposite boundary points; the follower penalty is weighted by ρ⋆⁻².

use stackelberg_heat::follower::presets::standard_scenario;
use stackelberg_heat::hum::{HumSettings, LeaderProblem};
use stackelberg_heat::{Configuration, OptimalitySystem, RobustParams};

fn main() -> stackelberg_heat::Result<()> {
    let sys = OptimalitySystem::new(standard_scenario(Configuration::C, 50, 100)?, RobustParams::new(10.0, 10.0)?)?;
    let time = sys.time();
    let weight = sys.rho_inv_sq();
    let zeros = weight.iter().filter(|w| **w == 0.0).count();
    println!("rho*^-2 vanishes exactly on {zeros} of {} time levels", weight.len());
    for k in (0..time.n_levels()).step_by(10) {
        println!("t = {:.2}  rho*^-2 = {:.3e}", time.t(k), weight[k]);
    }
    let result = LeaderProblem::new(sys, HumSettings::new(1e-4)?)?.minimize()?;
    println!("terminal residual {:.6e}", result.terminal_residual);
    Ok(())
}
