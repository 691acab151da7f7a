//! Carleman weights of each configuration along the time axis.

use stackelberg_heat::follower::presets::standard_scenario;
use stackelberg_heat::weights::{rho_star_inv_sq, target_weight, EtaFunction};
use stackelberg_heat::pde::Side;
use stackelberg_heat::Configuration;

fn main() -> stackelberg_heat::Result<()> {
    let bar = EtaFunction::bar(1.0, Side::Left);
    for c in [Configuration::A, Configuration::B, Configuration::C] {
        let spec = standard_scenario(c, 20, 20)?.weights;
        println!("configuration {}", c.letter());
        for t in [0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99] {
            let w = target_weight(&spec, t)?;
            print!("  t = {t:<5} log target weight {:>12.4}", w.weight.log_value);
            if c == Configuration::C {
                print!("  rho*^-2 {:.3e}", rho_star_inv_sq(&spec, &bar, t)?);
            }
            println!();
        }
    }
    Ok(())
}
