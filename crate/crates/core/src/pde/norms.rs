use crate::error::{Error, Result};
use crate::pde::field::{BoundaryPair, SpaceTimeField};
use crate::pde::grid::{BoundarySet, Region, Side, SpatialGrid};
use crate::pde::tridiag::ConstTridiag;

/// `∬_Q f g` with the trapezoid rule in space and time.
pub fn l2_q(f: &SpaceTimeField, g: &SpaceTimeField) -> Result<f64> {
    f.check_grid(g)?;
    let (space, time) = (f.space(), f.time());
    Ok((0..time.n_levels())
        .map(|k| {
            let inner: f64 = f.level(k).iter().zip(g.level(k)).enumerate().map(|(i, (a, b))| space.weight(i) * a * b).sum();
            time.weight(k) * inner
        })
        .sum())
}

/// `∬_{R×(0,T)} f g`: weight `dx` on interior nodes inside the closed region, trapezoid in time.
pub fn l2_region(f: &SpaceTimeField, g: &SpaceTimeField, region: &Region) -> Result<f64> {
    f.check_grid(g)?;
    let mask = region.mask(&f.space())?;
    Ok(l2_masked(f, g, &mask))
}

pub(crate) fn l2_masked(f: &SpaceTimeField, g: &SpaceTimeField, mask: &[f64]) -> f64 {
    let (space, time) = (f.space(), f.time());
    let dx = space.dx();
    (0..time.n_levels())
        .map(|k| {
            let inner: f64 = f.level(k).iter().zip(g.level(k)).zip(mask).map(|((a, b), m)| m * a * b).sum();
            time.weight(k) * dx * inner
        })
        .sum()
}

/// `∫_0^T Σ_{sides in B} u w` with the trapezoid rule in time.
pub fn l2_boundary(u: &BoundaryPair, w: &BoundaryPair, set: &BoundarySet) -> Result<f64> {
    let time = u.time();
    if time != w.time() {
        return Err(Error::Dimension("boundary traces on different time grids".into()));
    }
    Ok(set
        .sides()
        .map(|s: Side| (0..time.n_levels()).map(|k| time.weight(k) * u[s][k] * w[s][k]).sum::<f64>())
        .sum())
}

/// Discrete `L²(0, L)` pairing of two nodal vectors (trapezoid rule).
pub fn l2_space(grid: &SpatialGrid, u: &[f64], w: &[f64]) -> f64 {
    u.iter().zip(w).enumerate().map(|(i, (a, b))| grid.weight(i) * a * b).sum()
}

/// `(Σ dx |(u_{i+1} - u_i)/dx|²)^{1/2}` over all cells, boundary values included.
pub fn h10_norm(grid: &SpatialGrid, u: &[f64]) -> f64 {
    h10_inner(grid, u, u).sqrt()
}

pub fn h10_inner(grid: &SpatialGrid, u: &[f64], w: &[f64]) -> f64 {
    let dx = grid.dx();
    u.windows(2).zip(w.windows(2)).map(|(a, b)| (a[1] - a[0]) * (b[1] - b[0])).sum::<f64>() / dx
}

/// Solves `-Δ_h z = u` on the interior with `z = 0` on the boundary.
pub fn inverse_laplacian(grid: &SpatialGrid, u: &[f64]) -> Result<Vec<f64>> {
    let n = grid.n_interior();
    if u.len() != grid.n_nodes() {
        return Err(Error::Dimension(format!("expected {} nodal values, got {}", grid.n_nodes(), u.len())));
    }
    let dx2 = grid.dx() * grid.dx();
    let lap = ConstTridiag::new(n, 2.0 / dx2, -1.0 / dx2)?;
    let mut z = vec![0.0; n + 2];
    z[1..=n].copy_from_slice(&u[1..=n]);
    lap.solve_in_place(&mut z[1..=n]);
    Ok(z)
}

/// `‖u‖_{H⁻¹} = ‖z‖_{H¹₀}` with `-Δ_h z = u`; boundary entries of `u` are ignored.
pub fn hminus1_norm(grid: &SpatialGrid, u: &[f64]) -> Result<f64> {
    Ok(h10_norm(grid, &inverse_laplacian(grid, u)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::{SpaceTimeField, TimeGrid};
    use std::f64::consts::PI;

    #[test]
    fn zero_argument_pairs_to_zero() {
        let (s, t) = (SpatialGrid::new(1.0, 10).unwrap(), TimeGrid::new(1.0, 10).unwrap());
        let g = SpaceTimeField::from_fn(s, t, |x, t| x + t);
        assert_eq!(l2_q(&SpaceTimeField::zeros(s, t), &g).unwrap(), 0.0);
    }

    #[test]
    fn region_area() {
        for n in [49, 99, 199] {
            let (s, t) = (SpatialGrid::new(1.0, n).unwrap(), TimeGrid::new(1.0, 20).unwrap());
            let one = SpaceTimeField::from_fn(s, t, |_, _| 1.0);
            let v = l2_region(&one, &one, &Region::new(0.4, 0.8).unwrap()).unwrap();
            assert!((v - 0.4).abs() <= 1.01 * s.dx(), "n = {n}: {v}");
        }
    }

    #[test]
    fn hminus1_of_first_eigenfunction() {
        let exact = 1.0 / (PI * 2f64.sqrt());
        let err = |n: usize| {
            let g = SpatialGrid::new(1.0, n).unwrap();
            let u: Vec<f64> = (0..g.n_nodes()).map(|i| (PI * g.x(i)).sin()).collect();
            (hminus1_norm(&g, &u).unwrap() - exact).abs()
        };
        let (e1, e2) = (err(40), err(80));
        assert!(e1 < 1e-3 && (e1 / e2).log2() > 1.9, "{e1} {e2}");
    }

    #[test]
    fn h10_of_hat_function() {
        let g = SpatialGrid::new(1.0, 1 + 2 * 4).unwrap();
        let u: Vec<f64> = (0..g.n_nodes()).map(|i| 0.5 - (g.x(i) - 0.5).abs()).collect();
        assert!((h10_norm(&g, &u) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn boundary_pairing_respects_set() {
        let t = TimeGrid::new(2.0, 8).unwrap();
        let mut u = BoundaryPair::zeros(t);
        u.left.values_mut().fill(1.0);
        u.right.values_mut().fill(3.0);
        assert!((l2_boundary(&u, &u, &BoundarySet::LEFT).unwrap() - 2.0).abs() < 1e-14);
        assert!((l2_boundary(&u, &u, &BoundarySet::ALL).unwrap() - 20.0).abs() < 1e-13);
    }
}
