use crate::error::{Error, Result};
use crate::pde::{BoundarySet, Region, Side, SpatialGrid};

/// A single Carleman profile on `[0, L]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaFunction {
    /// `η⁰`: zero on `vanishing`, positive inside. One side: `x(2L - x)/L²` measured from that side;
    /// both sides: `4x(L - x)/L²`.
    Eta0 { length: f64, vanishing: BoundarySet },
    /// `η̄ = 1 - x/L` measured from `origin`.
    Bar { length: f64, origin: Side },
}

fn from_side(x: f64, length: f64, side: Side) -> f64 {
    match side {
        Side::Left => x,
        Side::Right => length - x,
    }
}

impl EtaFunction {
    pub fn eta0(length: f64, vanishing: BoundarySet) -> Result<Self> {
        if vanishing.is_empty() {
            return Err(Error::InvalidParameter("η⁰ needs a nonempty vanishing boundary set".into()));
        }
        Ok(Self::Eta0 { length, vanishing })
    }

    pub fn bar(length: f64, origin: Side) -> Self {
        Self::Bar { length, origin }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Self::Eta0 { length, .. } | Self::Bar { length, .. } => length,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Eta0 { length, vanishing } => {
                if vanishing.left && vanishing.right {
                    4.0 * x * (length - x) / (length * length)
                } else {
                    let side = if vanishing.left { Side::Left } else { Side::Right };
                    let y = from_side(x, length, side);
                    y * (2.0 * length - y) / (length * length)
                }
            }
            Self::Bar { length, origin } => 1.0 - from_side(x, length, origin) / length,
        }
    }

    /// `‖η‖_∞` on `[0, L]`.
    pub fn sup_norm(&self) -> f64 {
        1.0
    }

    /// `min η` on `[0, L]`, attained at a boundary node.
    pub fn min_value(&self) -> f64 {
        0.0
    }

    /// Samples the profile invariants on the nodes of `grid`.
    pub fn check(&self, grid: &SpatialGrid) -> Result<()> {
        let n = grid.n_interior();
        let vals: Vec<f64> = (0..grid.n_nodes()).map(|i| self.eval(grid.x(i))).collect();
        if vals[1..=n].iter().any(|&v| v <= 0.0) {
            return Err(Error::InvalidParameter("η must be positive in the interior".into()));
        }
        if let Self::Eta0 { vanishing, .. } = *self {
            for s in vanishing.sides() {
                let i = if s == Side::Left { 0 } else { n + 1 };
                if vals[i].abs() > 1e-14 {
                    return Err(Error::InvalidParameter(format!("η⁰ must vanish on the {} side", s.name())));
                }
            }
        }
        Ok(())
    }
}

/// The pair `(η₁, η₂)`: `η₂ = 1 - ξ/L` and `η₁ = η₂ + (b/L) S((c - ξ)/(c - b))` with the quintic
/// smoothstep `S` clamped to `[0, 1]`, where `ξ` is the distance to `gamma`, the control blocks lie
/// in `ξ < b` and the observation set in `ξ > c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaPair {
    pub length: f64,
    pub gamma: Side,
    pub b: f64,
    pub c: f64,
}

impl EtaPair {
    pub fn new(length: f64, gamma: Side, b: f64, c: f64) -> Result<Self> {
        if !(0.0 < b && b < c && c < length) {
            return Err(Error::InvalidParameter(format!("η pair needs 0 < b < c < L, got b = {b}, c = {c}")));
        }
        Ok(Self { length, gamma, b, c })
    }

    /// Builds the pair from the control blocks and the observation set, measured from `gamma`.
    pub fn for_geometry(length: f64, gamma: Side, blocks: &[Region], observation: &Region) -> Result<Self> {
        let far = |r: &Region| match gamma {
            Side::Left => r.b,
            Side::Right => length - r.a,
        };
        let near = |r: &Region| match gamma {
            Side::Left => r.a,
            Side::Right => length - r.b,
        };
        let b = blocks.iter().map(far).fold(0.0, f64::max);
        Self::new(length, gamma, b, near(observation))
    }

    pub fn eta2(&self, x: f64) -> f64 {
        1.0 - from_side(x, self.length, self.gamma) / self.length
    }

    pub fn eta1(&self, x: f64) -> f64 {
        let y = from_side(x, self.length, self.gamma);
        let u = ((self.c - y) / (self.c - self.b)).clamp(0.0, 1.0);
        let bump = (self.b / self.length) * u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
        self.eta2(x) + bump
    }

    pub fn eta(&self, i: usize, x: f64) -> f64 {
        if i == 1 {
            self.eta1(x)
        } else {
            self.eta2(x)
        }
    }

    /// `(‖η₁‖_∞, ‖η₂‖_∞)`, both attained at `gamma`.
    pub fn sup_norms(&self) -> (f64, f64) {
        let x0 = match self.gamma {
            Side::Left => 0.0,
            Side::Right => self.length,
        };
        (self.eta1(x0), 1.0)
    }

    /// `min η₂` on `[0, L]`, attained at the far end.
    pub fn min_eta2(&self) -> f64 {
        0.0
    }

    /// Samples positivity, ordering, agreement on the observation set and dominance on the blocks.
    pub fn check(&self, grid: &SpatialGrid, blocks: &[Region], observation: &Region) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("η pair: {m}")));
        let n = grid.n_interior();
        for i in 1..=n {
            let x = grid.x(i);
            let (e1, e2) = (self.eta1(x), self.eta2(x));
            if e1 <= 0.0 || e2 <= 0.0 {
                return bad("profiles must be positive in the interior");
            }
            if e1 < e2 {
                return bad("η₁ ≥ η₂ fails");
            }
            if x > observation.a && x < observation.b && (e1 - e2).abs() > 1e-14 {
                return bad("η₁ = η₂ fails on the observation set");
            }
        }
        for blk in blocks {
            let inside: Vec<f64> = (0..grid.n_nodes()).map(|i| grid.x(i)).filter(|&x| x >= blk.a && x <= blk.b).collect();
            let top = inside.iter().map(|&x| self.eta2(x)).fold(f64::NEG_INFINITY, f64::max);
            if inside.iter().any(|&x| self.eta1(x) < top - 1e-14) {
                return bad("η₁ ≥ max η₂ fails on a control block");
            }
        }
        Ok(())
    }
}
