use crate::error::{Error, Result};

/// Uniform nodes `x_i = i * dx`, `i = 0..=n_interior + 1`, on `[0, length]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    length: f64,
    n_interior: usize,
}

impl SpatialGrid {
    pub fn new(length: f64, n_interior: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        if n_interior < 2 {
            return Err(Error::InvalidGrid(format!("at least two interior nodes are required, got {n_interior}")));
        }
        Ok(Self { length, n_interior })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn n_nodes(&self) -> usize {
        self.n_interior + 2
    }

    pub fn dx(&self) -> f64 {
        self.length / (self.n_interior + 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.n_interior + 1 {
            self.length
        } else {
            i as f64 * self.dx()
        }
    }

    /// Trapezoid weight of node `i`: `dx/2` at the two boundary nodes, `dx` elsewhere.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n_interior + 1 {
            0.5 * self.dx()
        } else {
            self.dx()
        }
    }

    pub fn interior(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n_interior
    }
}

/// Uniform levels `t_k = k * dt`, `k = 0..=n_steps`, on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, n_steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidGrid(format!("horizon must be positive, got {horizon}")));
        }
        if n_steps < 2 {
            return Err(Error::InvalidGrid(format!("at least two time steps are required, got {n_steps}")));
        }
        Ok(Self { horizon, n_steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn n_levels(&self) -> usize {
        self.n_steps + 1
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_steps as f64
    }

    pub fn t(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.horizon
        } else {
            k as f64 * self.dt()
        }
    }

    /// Trapezoid weight of level `k`.
    pub fn weight(&self, k: usize) -> f64 {
        if k == 0 || k == self.n_steps {
            0.5 * self.dt()
        } else {
            self.dt()
        }
    }
}

/// An endpoint of the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

/// A subset of `{left, right}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BoundarySet {
    pub left: bool,
    pub right: bool,
}

impl BoundarySet {
    pub const NONE: Self = Self { left: false, right: false };
    pub const LEFT: Self = Self { left: true, right: false };
    pub const RIGHT: Self = Self { left: false, right: true };
    pub const ALL: Self = Self { left: true, right: true };

    pub fn contains(&self, side: Side) -> bool {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }

    pub fn indicator(&self, side: Side) -> f64 {
        if self.contains(side) {
            1.0
        } else {
            0.0
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.left && !self.right
    }

    pub fn intersects(&self, other: &Self) -> bool {
        (self.left && other.left) || (self.right && other.right)
    }

    pub fn sides(&self) -> impl Iterator<Item = Side> + '_ {
        Side::BOTH.into_iter().filter(|s| self.contains(*s))
    }
}

/// An open subinterval `(a, b)` of the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub a: f64,
    pub b: f64,
}

impl Region {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidParameter(format!("region needs a < b, got ({a}, {b})")));
        }
        Ok(Self { a, b })
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    /// Open intervals share points.
    pub fn overlaps(&self, other: &Region) -> bool {
        self.a.max(other.a) < self.b.min(other.b)
    }

    /// Closures share points.
    pub fn closure_meets(&self, other: &Region) -> bool {
        self.a.max(other.a) <= self.b.min(other.b)
    }

    /// Indicator on the nodes of `grid`: interior nodes whose coordinate lies in `[a, b]`.
    pub fn mask(&self, grid: &SpatialGrid) -> Result<Vec<f64>> {
        let tol = 1e-9 * grid.dx();
        let mut m = vec![0.0; grid.n_nodes()];
        for i in grid.interior() {
            let x = grid.x(i);
            if x >= self.a - tol && x <= self.b + tol {
                m[i] = 1.0;
            }
        }
        if m.iter().all(|&v| v == 0.0) {
            return Err(Error::EmptyRegion { a: self.a, b: self.b });
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_and_levels() {
        let g = SpatialGrid::new(2.0, 3).unwrap();
        assert_eq!(g.n_nodes(), 5);
        assert_eq!(g.dx(), 0.5);
        assert_eq!((g.x(0), g.x(2), g.x(4)), (0.0, 1.0, 2.0));
        let t = TimeGrid::new(1.0, 4).unwrap();
        assert_eq!((t.n_levels(), t.t(1), t.t(4)), (5, 0.25, 1.0));
        let total: f64 = (0..t.n_levels()).map(|k| t.weight(k)).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_grids_rejected() {
        assert!(SpatialGrid::new(1.0, 1).is_err());
        assert!(SpatialGrid::new(0.0, 5).is_err());
        assert!(SpatialGrid::new(f64::NAN, 5).is_err());
        assert!(TimeGrid::new(1.0, 1).is_err());
        assert!(TimeGrid::new(-1.0, 5).is_err());
    }

    #[test]
    fn region_masks() {
        let g = SpatialGrid::new(1.0, 9).unwrap();
        let m = Region::new(0.2, 0.5).unwrap().mask(&g).unwrap();
        assert_eq!(m, vec![0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(Region::new(0.41, 0.49).unwrap().mask(&g), Err(Error::EmptyRegion { .. })));
        assert!(Region::new(0.5, 0.5).is_err());
        let (a, b, c) = (Region::new(0.0, 0.3).unwrap(), Region::new(0.3, 0.6).unwrap(), Region::new(0.2, 0.4).unwrap());
        assert!(!a.overlaps(&b) && a.closure_meets(&b) && a.overlaps(&c));
    }

    #[test]
    fn boundary_sets() {
        assert!(BoundarySet::LEFT.intersects(&BoundarySet::ALL));
        assert!(!BoundarySet::LEFT.intersects(&BoundarySet::RIGHT));
        assert_eq!(BoundarySet::ALL.sides().collect::<Vec<_>>(), Side::BOTH.to_vec());
        assert!(BoundarySet::NONE.is_empty());
    }
}
