//! Finite-difference heat solver on a uniform 1D grid, its exact discrete transpose, and the
//! quadratures used by every functional in the crate.

mod field;
mod grid;
mod norms;
mod scheme;
mod tridiag;

pub use field::{BoundaryPair, BoundaryTrace, Forcing, SpaceTimeField};
pub use grid::{BoundarySet, Region, Side, SpatialGrid, TimeGrid};
pub use norms::{h10_inner, h10_norm, hminus1_norm, inverse_laplacian, l2_boundary, l2_q, l2_region, l2_space};
pub(crate) use norms::l2_masked;
pub use scheme::{dirichlet, normal_derivative, normal_derivative_two_point, ThetaScheme, TransposeImage};
pub use tridiag::ConstTridiag;
