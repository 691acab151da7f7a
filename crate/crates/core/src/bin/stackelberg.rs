use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stackelberg_heat::experiment::{self, fmt_f64, parse_config, ExperimentSpec, Status};

#[derive(Parser)]
#[command(name = "stackelberg", version, about = "Robust leader-follower control of the 1D heat equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reference equilibrium, leader synthesis and verification.
    Run(Common),
    /// Heat-solver orders, penalization sweep and dense-oracle comparison.
    Converge(Common),
    /// Observability ratio samples at (ell, gamma) and at twice those values.
    Probe(Common),
    /// Terminal residual for every epsilon of the ladder.
    SweepEps(Common),
}

#[derive(Args)]
struct Common {
    config: PathBuf,
    /// Output directory, overriding [output] dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed, overriding [output] seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

impl Common {
    fn spec(&self) -> stackelberg_heat::Result<ExperimentSpec> {
        let mut spec = parse_config(&self.config)?;
        if let Some(dir) = &self.out {
            spec.output.dir = dir.clone();
        }
        if let Some(seed) = self.seed {
            spec.output.seed = seed;
        }
        Ok(spec)
    }
}

fn execute(command: &Command) -> stackelberg_heat::Result<bool> {
    match command {
        Command::Run(c) => {
            let report = experiment::run_experiment(&c.spec()?)?;
            if !c.quiet {
                for (stage, d) in &report.timings {
                    println!("{stage:<18} {:>10.3} s", d.as_secs_f64());
                }
                println!("terminal residual  {}", fmt_f64(report.hum.terminal_residual));
                for v in &report.verdicts {
                    println!("{:<8} {:<22} {}", v.status.as_str(), v.name, v.reason);
                }
            }
            Ok(report.verdicts.iter().all(|v| v.status != Status::Fail))
        }
        Command::Converge(c) => {
            let t = experiment::convergence_study(&c.spec()?)?;
            if !c.quiet {
                for r in &t.heat {
                    println!("heat n={:<4} error {:.6e} order {}", r.n_interior, r.max_error, r.order.map_or("-".into(), |o| format!("{o:.3}")));
                }
                for r in &t.epsilon {
                    println!("eps {:.0e} residual {:.6e} cg {}", r.epsilon, r.terminal_residual, r.cg_iterations);
                }
                for r in &t.oracle {
                    let d = r.discrepancy.map_or("skipped".into(), |d| format!("{d:.3e}"));
                    println!("oracle n={:<4} unknowns {:<6} discrepancy {d}", r.n_interior, r.unknowns);
                }
            }
            Ok(true)
        }
        Command::Probe(c) => {
            let p = experiment::probe_study(&c.spec()?)?;
            if !c.quiet {
                for (label, r) in [("base", &p.base), ("doubled", &p.doubled)] {
                    println!("{label:<8} min {:.6e} median {:.6e} max {:.6e} refined {:.6e}", r.min, r.median, r.max, r.refined_max());
                }
            }
            Ok(true)
        }
        Command::SweepEps(c) => {
            let (rows, _) = experiment::sweep_eps(&c.spec()?)?;
            if !c.quiet {
                for r in &rows {
                    println!("eps {:.0e} residual {:.6e} cg {}", r.epsilon, r.terminal_residual, r.cg_iterations);
                }
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
