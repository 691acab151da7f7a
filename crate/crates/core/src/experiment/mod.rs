//! Configuration files, experiment orchestration and CSV output.

mod config;
mod output;
mod run;

pub use config::{nearest, parse_config, parse_config_str, ConfigError, DataSettings, ExperimentSpec, GridSettings, OutputSettings};
pub use output::{fmt_f64, ManifestEntry, OutputDir};
pub use run::{
    convergence_study, epsilon_sweep, heat_order_study, matched_steps, oracle_study, probe_study, random_leader, run_experiment,
    sweep_eps, ConvergenceTable, EpsRow, HeatRow, HumSummary, OracleRow, ProbeStudy, RunReport, SaddleSummary, Status, Verdict,
};
