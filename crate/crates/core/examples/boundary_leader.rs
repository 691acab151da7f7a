//! Leader acting through a Dirichlet boundary, followers and disturbance inside the domain.

use stackelberg_heat::follower::presets::standard_scenario;
use stackelberg_heat::hum::{leader_trace, HumSettings, LeaderProblem};
use stackelberg_heat::pde::Side;
use stackelberg_heat::{Configuration, OptimalitySystem, RobustParams};

fn main() -> stackelberg_heat::Result<()> {
    let sys = OptimalitySystem::new(standard_scenario(Configuration::B, 50, 50)?, RobustParams::new(10.0, 10.0)?)?;
    let problem = LeaderProblem::new(sys, HumSettings::new(1e-4)?)?;
    let result = problem.minimize()?;
    println!("terminal residual {:.6e} after {} CG iterations", result.terminal_residual, result.cg_iterations);
    let trace = leader_trace(&result.leader, Side::Left).unwrap_or_default();
    let time = problem.system().time();
    for k in (0..trace.len()).step_by(10) {
        println!("t = {:.2}  h = {:+.6e}", time.t(k), trace[k]);
    }
    Ok(())
}
