use crate::error::{Error, Result};
use crate::pde::field::{BoundaryPair, BoundaryTrace, Forcing, SpaceTimeField};
use crate::pde::grid::{Side, SpatialGrid, TimeGrid};
use crate::pde::tridiag::ConstTridiag;

/// θ-scheme for `u_t - u_xx = f` with Dirichlet data, one tridiagonal solve per step.
///
/// With `A` the interior Dirichlet Laplacian, `M = I - θ dt A` and `P = I + (1-θ) dt A`,
/// a forward step reads `M u^{k+1} = P u^k + dt [θ s^{k+1} + (1-θ) s^k]` where
/// `s^k = f^k + B g^k` collects the interior source and the boundary data.
#[derive(Debug, Clone)]
pub struct ThetaScheme {
    space: SpatialGrid,
    time: TimeGrid,
    theta: f64,
    implicit: ConstTridiag,
}

/// Output of [`ThetaScheme::transpose`]: sensitivities of `⟨c, u⟩` with respect to the inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct TransposeImage {
    /// Gradient with respect to the initial nodal values (boundary entries are zero).
    pub initial: Vec<f64>,
    /// Gradient with respect to the interior source (boundary columns zero) and Dirichlet data.
    pub forcing: Forcing,
}

impl ThetaScheme {
    pub fn new(space: SpatialGrid, time: TimeGrid, theta: f64) -> Result<Self> {
        if !(0.5..=1.0).contains(&theta) {
            return Err(Error::InvalidParameter(format!("theta must lie in [1/2, 1], got {theta}")));
        }
        let r = time.dt() / (space.dx() * space.dx());
        let implicit = ConstTridiag::new(space.n_interior(), 1.0 + 2.0 * theta * r, -theta * r)?;
        Ok(Self { space, time, theta, implicit })
    }

    pub fn crank_nicolson(space: SpatialGrid, time: TimeGrid) -> Result<Self> {
        Self::new(space, time, 0.5)
    }

    pub fn space(&self) -> SpatialGrid {
        self.space
    }

    pub fn time(&self) -> TimeGrid {
        self.time
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    fn ratio(&self) -> f64 {
        self.time.dt() / (self.space.dx() * self.space.dx())
    }

    fn check_inputs(&self, data: &[f64], forcing: &Forcing) -> Result<()> {
        if data.len() != self.space.n_nodes() {
            return Err(Error::Dimension(format!(
                "nodal data has {} entries, grid has {} nodes",
                data.len(),
                self.space.n_nodes()
            )));
        }
        if forcing.source.space() != self.space
            || forcing.source.time() != self.time
            || forcing.boundary.time() != self.time
        {
            return Err(Error::Dimension("forcing lives on a different grid".into()));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("nodal data"));
        }
        if !forcing.is_finite() {
            return Err(Error::NonFinite("forcing"));
        }
        Ok(())
    }

    /// Marches from level `from` to level `to` (adjacent), `from` already filled.
    /// The implicit level carries weight θ, the explicit one `1 - θ`.
    fn step(&self, u: &mut SpaceTimeField, forcing: &Forcing, from: usize, to: usize, rhs: &mut [f64]) {
        let n = self.space.n_interior();
        let dt = self.time.dt();
        let r = self.ratio();
        let th = self.theta;
        let (gl, gr) = (forcing.boundary.left[to], forcing.boundary.right[to]);
        {
            let prev = u.level(from);
            let f_new = forcing.source.level(to);
            let f_old = forcing.source.level(from);
            for i in 1..=n {
                let lap = prev[i - 1] - 2.0 * prev[i] + prev[i + 1];
                rhs[i - 1] = prev[i] + (1.0 - th) * r * lap + dt * (th * f_new[i] + (1.0 - th) * f_old[i]);
            }
        }
        rhs[0] += th * r * gl;
        rhs[n - 1] += th * r * gr;
        self.implicit.solve_in_place(rhs);
        let next = u.level_mut(to);
        next[0] = gl;
        next[1..=n].copy_from_slice(rhs);
        next[n + 1] = gr;
    }

    /// Marches forward from the interior values of `y0`; boundary columns follow the Dirichlet data.
    pub fn solve_forward(&self, y0: &[f64], forcing: &Forcing) -> Result<SpaceTimeField> {
        self.check_inputs(y0, forcing)?;
        let n = self.space.n_interior();
        let mut u = SpaceTimeField::zeros(self.space, self.time);
        {
            let l0 = u.level_mut(0);
            l0[1..=n].copy_from_slice(&y0[1..=n]);
            l0[0] = forcing.boundary.left[0];
            l0[n + 1] = forcing.boundary.right[0];
        }
        let mut rhs = vec![0.0; n];
        for k in 0..self.time.n_steps() {
            self.step(&mut u, forcing, k, k + 1, &mut rhs);
        }
        finite(u)
    }

    /// Marches `-q_t - q_xx = g` backward from the interior values of `terminal` at `t = T`.
    pub fn solve_backward(&self, terminal: &[f64], forcing: &Forcing) -> Result<SpaceTimeField> {
        self.check_inputs(terminal, forcing)?;
        let n = self.space.n_interior();
        let last = self.time.n_steps();
        let mut q = SpaceTimeField::zeros(self.space, self.time);
        {
            let lk = q.level_mut(last);
            lk[1..=n].copy_from_slice(&terminal[1..=n]);
            lk[0] = forcing.boundary.left[last];
            lk[n + 1] = forcing.boundary.right[last];
        }
        let mut rhs = vec![0.0; n];
        for k in (0..last).rev() {
            self.step(&mut q, forcing, k + 1, k, &mut rhs);
        }
        finite(q)
    }

    /// `v + (1-θ) dt A v` for an interior vector with homogeneous boundary values.
    fn apply_explicit(&self, v: &[f64], out: &mut [f64]) {
        let c = (1.0 - self.theta) * self.ratio();
        let n = v.len();
        for i in 0..n {
            let l = if i > 0 { v[i - 1] } else { 0.0 };
            let rr = if i + 1 < n { v[i + 1] } else { 0.0 };
            out[i] = v[i] + c * (l - 2.0 * v[i] + rr);
        }
    }

    /// Euclidean transpose of the map `(y0, f, g) ↦ u` realized by [`Self::solve_forward`].
    ///
    /// For every cotangent field `c`, `Σ c·u = initial·y0 + Σ forcing.source·f + Σ forcing.boundary·g`
    /// holds to rounding, all sums being plain sums over nodes and levels.
    pub fn transpose(&self, cotangent: &SpaceTimeField) -> Result<TransposeImage> {
        if cotangent.space() != self.space || cotangent.time() != self.time {
            return Err(Error::Dimension("cotangent lives on a different grid".into()));
        }
        if !cotangent.is_finite() {
            return Err(Error::NonFinite("cotangent"));
        }
        let n = self.space.n_interior();
        let big_k = self.time.n_steps();
        let dt = self.time.dt();
        let th = self.theta;
        let inv_dx2 = self.ratio() / dt;

        // a[k] for k = 1..=K, with a[0] and a[K+1] kept at zero.
        let mut a = vec![vec![0.0; n]; big_k + 2];
        let mut buf = vec![0.0; n];
        for k in (1..=big_k).rev() {
            self.apply_explicit(&a[k + 1], &mut buf);
            let c = &cotangent.level(k)[1..=n];
            buf.iter_mut().zip(c).for_each(|(b, ci)| *b += ci);
            self.implicit.solve_in_place(&mut buf);
            a[k].copy_from_slice(&buf);
        }
        let mut initial = vec![0.0; n + 2];
        self.apply_explicit(&a[1], &mut buf);
        for i in 1..=n {
            initial[i] = buf[i - 1] + cotangent.level(0)[i];
        }

        let mut forcing = Forcing::zeros(self.space, self.time);
        for k in 0..=big_k {
            let lev = forcing.source.level_mut(k);
            for i in 1..=n {
                lev[i] = dt * (th * a[k][i - 1] + (1.0 - th) * a[k + 1][i - 1]);
            }
            let (s1, sn) = (lev[1], lev[n]);
            let ck = cotangent.level(k);
            forcing.boundary.left[k] = s1 * inv_dx2 + ck[0];
            forcing.boundary.right[k] = sn * inv_dx2 + ck[n + 1];
        }
        Ok(TransposeImage { initial, forcing })
    }
}

fn finite(u: SpaceTimeField) -> Result<SpaceTimeField> {
    if u.is_finite() {
        Ok(u)
    } else {
        Err(Error::NonFinite("solution"))
    }
}

/// Second-order one-sided outward normal derivative on each level.
pub fn normal_derivative(u: &SpaceTimeField, side: Side) -> BoundaryTrace {
    let g = u.space();
    let dx = g.dx();
    let last = g.n_interior() + 1;
    BoundaryTrace::from_values(
        u.time(),
        (0..u.time().n_levels())
            .map(|k| {
                let l = u.level(k);
                match side {
                    Side::Left if last >= 2 => (3.0 * l[0] - 4.0 * l[1] + l[2]) / (2.0 * dx),
                    Side::Right if last >= 2 => (3.0 * l[last] - 4.0 * l[last - 1] + l[last - 2]) / (2.0 * dx),
                    Side::Left => (l[0] - l[1]) / dx,
                    Side::Right => (l[last] - l[last - 1]) / dx,
                }
            })
            .collect(),
    )
}

/// Two-point outward normal derivative, the stencil that is dual to boundary data in the scheme.
pub fn normal_derivative_two_point(u: &SpaceTimeField, side: Side) -> BoundaryTrace {
    let dx = u.space().dx();
    let last = u.space().n_interior() + 1;
    BoundaryTrace::from_values(
        u.time(),
        (0..u.time().n_levels())
            .map(|k| {
                let l = u.level(k);
                match side {
                    Side::Left => (l[0] - l[1]) / dx,
                    Side::Right => (l[last] - l[last - 1]) / dx,
                }
            })
            .collect(),
    )
}

/// Dirichlet data from two closures of time.
pub fn dirichlet(time: TimeGrid, left: impl Fn(f64) -> f64, right: impl Fn(f64) -> f64) -> BoundaryPair {
    BoundaryPair { left: BoundaryTrace::from_fn(time, left), right: BoundaryTrace::from_fn(time, right) }
}
