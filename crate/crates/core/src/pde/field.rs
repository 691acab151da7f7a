use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::pde::grid::{Side, SpatialGrid, TimeGrid};

/// Nodal values on every time level, stored level by level.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    space: SpatialGrid,
    time: TimeGrid,
    values: Vec<f64>,
}

impl SpaceTimeField {
    pub fn zeros(space: SpatialGrid, time: TimeGrid) -> Self {
        Self { space, time, values: vec![0.0; space.n_nodes() * time.n_levels()] }
    }

    pub fn from_fn(space: SpatialGrid, time: TimeGrid, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut out = Self::zeros(space, time);
        for k in 0..time.n_levels() {
            let t = time.t(k);
            for (i, v) in out.level_mut(k).iter_mut().enumerate() {
                *v = f(space.x(i), t);
            }
        }
        out
    }

    pub fn from_values(space: SpatialGrid, time: TimeGrid, values: Vec<f64>) -> Result<Self> {
        let expected = space.n_nodes() * time.n_levels();
        if values.len() != expected {
            return Err(Error::Dimension(format!("field needs {expected} values, got {}", values.len())));
        }
        Ok(Self { space, time, values })
    }

    pub fn space(&self) -> SpatialGrid {
        self.space
    }

    pub fn time(&self) -> TimeGrid {
        self.time
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn level(&self, k: usize) -> &[f64] {
        let n = self.space.n_nodes();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn level_mut(&mut self, k: usize) -> &mut [f64] {
        let n = self.space.n_nodes();
        &mut self.values[k * n..(k + 1) * n]
    }

    pub fn terminal(&self) -> &[f64] {
        self.level(self.time.n_steps())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.space == other.space && self.time == other.time
    }

    pub(crate) fn check_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::Dimension("fields live on different grids".into()))
        }
    }

    /// `self += a * other`.
    pub fn add_scaled(&mut self, a: f64, other: &Self) {
        debug_assert!(self.same_grid(other));
        self.values.iter_mut().zip(&other.values).for_each(|(s, o)| *s += a * o);
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= a);
        out
    }

    /// Multiplies every level by the nodal weights `w`.
    pub fn masked(&self, w: &[f64]) -> Self {
        let mut out = self.clone();
        for k in 0..self.time.n_levels() {
            out.level_mut(k).iter_mut().zip(w).for_each(|(v, m)| *v *= m);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(-1.0, other);
        out
    }

    /// Zeroes the two boundary columns.
    pub fn clear_boundary(&mut self) {
        let last = self.space.n_interior() + 1;
        for k in 0..self.time.n_levels() {
            let l = self.level_mut(k);
            l[0] = 0.0;
            l[last] = 0.0;
        }
    }

    pub fn boundary_trace(&self, side: Side) -> BoundaryTrace {
        let i = match side {
            Side::Left => 0,
            Side::Right => self.space.n_interior() + 1,
        };
        BoundaryTrace::from_values(self.time, (0..self.time.n_levels()).map(|k| self.level(k)[i]).collect())
    }
}

/// Values at one endpoint on every time level.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    time: TimeGrid,
    values: Vec<f64>,
}

impl BoundaryTrace {
    pub fn zeros(time: TimeGrid) -> Self {
        Self { time, values: vec![0.0; time.n_levels()] }
    }

    pub fn from_fn(time: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        Self { time, values: (0..time.n_levels()).map(|k| f(time.t(k))).collect() }
    }

    pub(crate) fn from_values(time: TimeGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), time.n_levels());
        Self { time, values }
    }

    pub fn time(&self) -> TimeGrid {
        self.time
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

impl Index<usize> for BoundaryTrace {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.values[k]
    }
}

impl IndexMut<usize> for BoundaryTrace {
    fn index_mut(&mut self, k: usize) -> &mut f64 {
        &mut self.values[k]
    }
}

/// Traces on both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPair {
    pub left: BoundaryTrace,
    pub right: BoundaryTrace,
}

impl BoundaryPair {
    pub fn zeros(time: TimeGrid) -> Self {
        Self { left: BoundaryTrace::zeros(time), right: BoundaryTrace::zeros(time) }
    }

    pub fn time(&self) -> TimeGrid {
        self.left.time
    }

    pub fn add_scaled(&mut self, a: f64, other: &Self) {
        for s in Side::BOTH {
            self[s].values.iter_mut().zip(&other[s].values).for_each(|(x, y)| *x += a * y);
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        for s in Side::BOTH {
            out[s].values.iter_mut().for_each(|v| *v *= a);
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        Side::BOTH.iter().all(|&s| self[s].values.iter().all(|v| v.is_finite()))
    }

    pub fn max_abs(&self) -> f64 {
        Side::BOTH
            .iter()
            .flat_map(|&s| self[s].values.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<Side> for BoundaryPair {
    type Output = BoundaryTrace;
    fn index(&self, side: Side) -> &BoundaryTrace {
        match side {
            Side::Left => &self.left,
            Side::Right => &self.right,
        }
    }
}

impl IndexMut<Side> for BoundaryPair {
    fn index_mut(&mut self, side: Side) -> &mut BoundaryTrace {
        match side {
            Side::Left => &mut self.left,
            Side::Right => &mut self.right,
        }
    }
}

/// Right-hand side of the heat equation: interior source plus Dirichlet data.
#[derive(Debug, Clone, PartialEq)]
pub struct Forcing {
    pub source: SpaceTimeField,
    pub boundary: BoundaryPair,
}

impl Forcing {
    pub fn zeros(space: SpatialGrid, time: TimeGrid) -> Self {
        Self { source: SpaceTimeField::zeros(space, time), boundary: BoundaryPair::zeros(time) }
    }

    pub fn add_scaled(&mut self, a: f64, other: &Self) {
        self.source.add_scaled(a, &other.source);
        self.boundary.add_scaled(a, &other.boundary);
    }

    pub fn is_finite(&self) -> bool {
        self.source.is_finite() && self.boundary.is_finite()
    }
}
