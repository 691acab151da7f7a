//! Terminal residual of the penalized controllability problem as ε decreases.

use stackelberg_heat::follower::presets::standard_scenario;
use stackelberg_heat::hum::{HumSettings, LeaderProblem};
use stackelberg_heat::{Configuration, OptimalitySystem, RobustParams};

fn main() -> stackelberg_heat::Result<()> {
    for c in [Configuration::A, Configuration::B] {
        let sys = OptimalitySystem::new(standard_scenario(c, 50, 50)?, RobustParams::new(10.0, 10.0)?)?;
        let base = LeaderProblem::new(sys, HumSettings::new(1e-2)?)?;
        let mut previous = None;
        for eps in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
            let r = base.with_epsilon(eps)?.minimize()?;
            let ratio = previous.map_or_else(String::new, |p: f64| format!("ratio {:.2}", p / r.terminal_residual));
            println!("{} eps {eps:.0e}: residual {:.6e}, {:>2} CG iterations {ratio}", c.letter(), r.terminal_residual, r.cg_iterations);
            previous = Some(r.terminal_residual);
        }
    }
    Ok(())
}
