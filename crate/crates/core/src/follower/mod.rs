//! Follower equilibria for a fixed leader control.

pub mod controls;
pub mod dense;
pub mod presets;
pub mod scenario;
pub mod system;
pub mod verify;

pub use controls::{FollowerControls, LeaderControl, Part, PartMut};
pub use dense::{DenseOracle, DenseSolution};
pub use scenario::{geometry_violations, validate_config, Configuration, Geometry, ProblemData, ScenarioConfig};
pub use system::{OptimalitySystem, RobustParams, SaddleSolution};
pub use verify::{gateaux_check, verify_saddle, GateauxReport, SaddleReport, SADDLE_SLACK};
