//! Robust hierarchic control of the one-dimensional heat equation.
//!
//! A leader drives the state to zero at the final time while followers play a robust
//! (min-max) or Nash game on a tracking cost. The crate provides the discretization, the
//! Carleman-type weights, the follower equilibrium solvers, the leader's controllability
//! solver and a small experiment runner.

pub mod error;
pub mod experiment;
pub mod follower;
pub mod hum;
pub mod pde;
pub mod weights;

pub use error::{Error, GeometryViolation, Result};
pub use follower::{
    Configuration, FollowerControls, Geometry, LeaderControl, OptimalitySystem, ProblemData, RobustParams, SaddleSolution,
    ScenarioConfig,
};
