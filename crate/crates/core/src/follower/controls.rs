use crate::pde::{BoundaryPair, Side, SpaceTimeField};

/// Control of the leader: distributed on `ω` (configuration A) or a boundary trace.
#[derive(Debug, Clone, PartialEq)]
pub enum LeaderControl {
    Distributed(SpaceTimeField),
    Boundary(BoundaryPair),
}

impl LeaderControl {
    pub fn max_abs(&self) -> f64 {
        match self {
            Self::Distributed(f) => f.max_abs(),
            Self::Boundary(b) => b.max_abs(),
        }
    }
}

/// Follower strategies, one variant per configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum FollowerControls {
    /// Boundary control `v` (entering as `v ρ_Γ`) and distributed disturbance `ψ`.
    A { v: BoundaryPair, psi: SpaceTimeField },
    /// Control `v` on `B₁` and disturbance `ψ` on `B₂`.
    B { v: SpaceTimeField, psi: SpaceTimeField },
    /// Boundary control on `Γ₂`.
    C { v: BoundaryPair },
    /// Boundary controls of the two Nash followers.
    D { v: [BoundaryPair; 2] },
}

/// Borrowed view of one control component.
#[derive(Debug, Clone, Copy)]
pub enum Part<'a> {
    Field(&'a SpaceTimeField),
    Trace(&'a BoundaryPair),
}

pub enum PartMut<'a> {
    Field(&'a mut SpaceTimeField),
    Trace(&'a mut BoundaryPair),
}

impl FollowerControls {
    pub fn parts(&self) -> Vec<Part<'_>> {
        match self {
            Self::A { v, psi } => vec![Part::Trace(v), Part::Field(psi)],
            Self::B { v, psi } => vec![Part::Field(v), Part::Field(psi)],
            Self::C { v } => vec![Part::Trace(v)],
            Self::D { v } => vec![Part::Trace(&v[0]), Part::Trace(&v[1])],
        }
    }

    pub fn parts_mut(&mut self) -> Vec<PartMut<'_>> {
        match self {
            Self::A { v, psi } => vec![PartMut::Trace(v), PartMut::Field(psi)],
            Self::B { v, psi } => vec![PartMut::Field(v), PartMut::Field(psi)],
            Self::C { v } => vec![PartMut::Trace(v)],
            Self::D { v } => {
                let (a, b) = v.split_at_mut(1);
                vec![PartMut::Trace(&mut a[0]), PartMut::Trace(&mut b[0])]
            }
        }
    }

    /// Flattened values, parts in order; traces list the left side then the right side.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for p in self.parts() {
            match p {
                Part::Field(f) => out.extend_from_slice(f.values()),
                Part::Trace(b) => {
                    for s in Side::BOTH {
                        out.extend_from_slice(b[s].values());
                    }
                }
            }
        }
        out
    }

    /// Inverse of [`Self::to_vec`] on a template of the same shape.
    pub fn set_from_slice(&mut self, data: &[f64]) {
        let mut pos = 0;
        for p in self.parts_mut() {
            match p {
                PartMut::Field(f) => {
                    let n = f.values().len();
                    f.values_mut().copy_from_slice(&data[pos..pos + n]);
                    pos += n;
                }
                PartMut::Trace(b) => {
                    for s in Side::BOTH {
                        let n = b[s].values().len();
                        b[s].values_mut().copy_from_slice(&data[pos..pos + n]);
                        pos += n;
                    }
                }
            }
        }
        debug_assert_eq!(pos, data.len());
    }

    pub fn add_scaled(&mut self, a: f64, other: &Self) {
        let o = other.to_vec();
        let mut s = self.to_vec();
        s.iter_mut().zip(&o).for_each(|(x, y)| *x += a * y);
        self.set_from_slice(&s);
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        let n = z.to_vec().len();
        z.set_from_slice(&vec![0.0; n]);
        z
    }

    pub fn max_abs(&self) -> f64 {
        self.to_vec().iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
