use crate::error::{Error, Result};
use crate::follower::controls::{FollowerControls, LeaderControl};
use crate::follower::scenario::{validate_config, Configuration, Geometry, ProblemData, ScenarioConfig};
use crate::pde::{l2_q, BoundaryPair, BoundarySet, Forcing, Side, SpaceTimeField, SpatialGrid, ThetaScheme, TimeGrid};
use crate::weights::{rho_star_inv_sq, EtaFunction, WeightProfile};

/// Follower penalty weights and fixed-point controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobustParams {
    pub ell: f64,
    pub gamma: f64,
    /// Stop when successive adjoints differ by less than this, relative to the first correction.
    pub tol: f64,
    pub max_iterations: usize,
}

impl RobustParams {
    pub const DEFAULT_TOL: f64 = 1e-13;
    pub const DEFAULT_MAX_ITERATIONS: usize = 500;

    pub fn new(ell: f64, gamma: f64) -> Result<Self> {
        Self { ell, gamma, tol: Self::DEFAULT_TOL, max_iterations: Self::DEFAULT_MAX_ITERATIONS }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.ell > 0.0 && self.ell.is_finite() && self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("ell and gamma must be positive, got {} and {}", self.ell, self.gamma)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 || self.max_iterations == 0 {
            return Err(Error::InvalidParameter("fixed-point tolerance and iteration cap must be positive".into()));
        }
        Ok(self)
    }

    /// `μ = min(ℓ², γ²)`.
    pub fn mu(&self) -> f64 {
        (self.ell * self.ell).min(self.gamma * self.gamma)
    }
}

/// Converged follower equilibrium for a fixed leader control.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSolution {
    pub controls: FollowerControls,
    pub state: SpaceTimeField,
    /// Adjoint density of each follower (zero on the boundary columns).
    pub adjoints: Vec<SpaceTimeField>,
    pub iterations: usize,
    /// Last adjoint correction relative to the first one.
    pub residual: f64,
    /// Ratios of successive adjoint corrections.
    pub ratios: Vec<f64>,
}

impl SaddleSolution {
    /// Contraction rate measured before rounding dominates the corrections.
    pub fn contraction_ratio(&self) -> Option<f64> {
        asymptotic_ratio(&self.ratios)
    }
}

pub(crate) fn asymptotic_ratio(ratios: &[f64]) -> Option<f64> {
    // Ratios are recorded only while corrections are well above rounding; the last one is the
    // closest to the asymptotic regime.
    ratios.last().copied()
}

/// Records the Picard history and applies the stopping and non-contraction rules.
pub(crate) struct Picard {
    tol: f64,
    max_iterations: usize,
    first: f64,
    prev: f64,
    pub ratios: Vec<f64>,
    growth_streak: usize,
    pub residual: f64,
}

pub(crate) enum Step {
    Continue,
    Converged,
}

impl Picard {
    const STREAK: usize = 5;

    pub fn new(tol: f64, max_iterations: usize) -> Self {
        Self { tol, max_iterations, first: 0.0, prev: 0.0, ratios: Vec::new(), growth_streak: 0, residual: 0.0 }
    }

    pub fn record(&mut self, iteration: usize, diff: f64, size: f64) -> Result<Step> {
        if iteration == 1 {
            self.first = diff;
            self.prev = diff;
            self.residual = if diff == 0.0 { 0.0 } else { 1.0 };
            if diff == 0.0 {
                return Ok(Step::Converged);
            }
            return Ok(Step::Continue);
        }
        let ratio = if self.prev > 0.0 { diff / self.prev } else { 0.0 };
        self.residual = diff / self.first;
        let floor = 64.0 * f64::EPSILON * size;
        if diff > 1e3 * floor {
            self.ratios.push(ratio);
        }
        if self.residual <= self.tol || diff <= floor {
            return Ok(Step::Converged);
        }
        self.growth_streak = if ratio >= 1.0 { self.growth_streak + 1 } else { 0 };
        if self.growth_streak >= Self::STREAK {
            return Err(Error::NonContraction { ratio, iterations: iteration });
        }
        if iteration >= self.max_iterations {
            return Err(Error::NoConvergence { iterations: iteration, residual: self.residual });
        }
        self.prev = diff;
        Ok(Step::Continue)
    }
}

pub(crate) fn l2q_distance(a: &[SpaceTimeField], b: &[SpaceTimeField]) -> Result<f64> {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x.sub(y);
        s += l2_q(&d, &d)?;
    }
    Ok(s.sqrt())
}

pub(crate) fn l2q_size(a: &[SpaceTimeField]) -> Result<f64> {
    let mut s = 0.0;
    for x in a {
        s += l2_q(x, x)?;
    }
    Ok(s.sqrt())
}

/// The discrete optimality system of one scenario: state equation with follower feedback and the
/// follower adjoints obtained as exact transposes of the discrete state map.
#[derive(Debug, Clone)]
pub struct OptimalitySystem {
    cfg: ScenarioConfig,
    params: RobustParams,
    scheme: ThetaScheme,
    observation_masks: Vec<Vec<f64>>,
    omega_mask: Vec<f64>,
    control_mask: Vec<f64>,
    disturbance_mask: Vec<f64>,
    rho_inv_sq: Vec<f64>,
}

impl OptimalitySystem {
    pub fn new(cfg: ScenarioConfig, params: RobustParams) -> Result<Self> {
        validate_config(&cfg)?;
        let params = params.validated()?;
        let scheme = ThetaScheme::new(cfg.space, cfg.time, cfg.theta)?;
        let observation_masks =
            cfg.geometry.observations().iter().map(|r| r.mask(&cfg.space)).collect::<Result<Vec<_>>>()?;
        let zeros = vec![0.0; cfg.space.n_nodes()];
        let (mut omega_mask, mut control_mask, mut disturbance_mask) = (zeros.clone(), zeros.clone(), zeros);
        match &cfg.geometry {
            Geometry::A { omega, .. } => omega_mask = omega.mask(&cfg.space)?,
            Geometry::B { control, disturbance, .. } => {
                control_mask = control.mask(&cfg.space)?;
                disturbance_mask = disturbance.mask(&cfg.space)?;
            }
            _ => {}
        }
        let time = cfg.time;
        let rho_inv_sq = match cfg.configuration() {
            Configuration::C | Configuration::D => {
                let bar = match cfg.weights.profile {
                    WeightProfile::Bar(e) => e,
                    _ => EtaFunction::bar(cfg.space.length(), Side::Left),
                };
                (0..time.n_levels()).map(|k| rho_star_inv_sq(&cfg.weights, &bar, time.t(k))).collect::<Result<_>>()?
            }
            _ => vec![1.0; time.n_levels()],
        };
        Ok(Self { cfg, params, scheme, observation_masks, omega_mask, control_mask, disturbance_mask, rho_inv_sq })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn params(&self) -> &RobustParams {
        &self.params
    }

    pub fn scheme(&self) -> &ThetaScheme {
        &self.scheme
    }

    pub fn space(&self) -> SpatialGrid {
        self.cfg.space
    }

    pub fn time(&self) -> TimeGrid {
        self.cfg.time
    }

    pub fn configuration(&self) -> Configuration {
        self.cfg.configuration()
    }

    pub fn n_followers(&self) -> usize {
        self.configuration().n_followers()
    }

    pub fn data(&self) -> &ProblemData {
        &self.cfg.data
    }

    pub fn zero_data(&self) -> ProblemData {
        ProblemData::zeros(self.space(), self.time(), self.n_followers())
    }

    pub fn observation_mask(&self, j: usize) -> &[f64] {
        &self.observation_masks[j]
    }

    pub fn omega_mask(&self) -> &[f64] {
        &self.omega_mask
    }

    pub fn control_mask(&self) -> &[f64] {
        &self.control_mask
    }

    pub fn disturbance_mask(&self) -> &[f64] {
        &self.disturbance_mask
    }

    /// `ρ⋆(t_k)^{-2}` on each level (all ones in A and B).
    pub fn rho_inv_sq(&self) -> &[f64] {
        &self.rho_inv_sq
    }

    /// Boundary set on which follower `j` acts (`ρ_Γ` is its indicator).
    pub fn follower_boundary(&self, j: usize) -> BoundarySet {
        match &self.cfg.geometry {
            Geometry::A { follower, .. } | Geometry::C { follower, .. } => *follower,
            Geometry::D { followers, .. } => followers[j],
            Geometry::B { .. } => BoundarySet::NONE,
        }
    }

    /// Leader control with every entry zero.
    pub fn zero_leader(&self) -> LeaderControl {
        match self.configuration() {
            Configuration::A => LeaderControl::Distributed(SpaceTimeField::zeros(self.space(), self.time())),
            _ => LeaderControl::Boundary(BoundaryPair::zeros(self.time())),
        }
    }

    /// Follower controls with every entry zero.
    pub fn zero_controls(&self) -> FollowerControls {
        let (s, t) = (self.space(), self.time());
        match self.configuration() {
            Configuration::A => FollowerControls::A { v: BoundaryPair::zeros(t), psi: SpaceTimeField::zeros(s, t) },
            Configuration::B => FollowerControls::B { v: SpaceTimeField::zeros(s, t), psi: SpaceTimeField::zeros(s, t) },
            Configuration::C => FollowerControls::C { v: BoundaryPair::zeros(t) },
            Configuration::D => FollowerControls::D { v: [BoundaryPair::zeros(t), BoundaryPair::zeros(t)] },
        }
    }

    /// Forcing produced by the leader: `h χ_ω` in A, `h χ_Γ` otherwise.
    pub fn leader_forcing(&self, h: &LeaderControl) -> Result<Forcing> {
        let mut out = Forcing::zeros(self.space(), self.time());
        match (self.configuration(), h) {
            (Configuration::A, LeaderControl::Distributed(f)) => {
                out.source = f.masked(&self.omega_mask);
            }
            (Configuration::A, _) => return Err(Error::InvalidParameter("configuration A needs a distributed leader".into())),
            (_, LeaderControl::Boundary(b)) => {
                let set = self.cfg.geometry.leader_boundary();
                for s in set.sides() {
                    out.boundary[s] = b[s].clone();
                }
            }
            _ => return Err(Error::InvalidParameter("this configuration needs a boundary leader".into())),
        }
        Ok(out)
    }

    /// Forcing produced by the follower strategies (open loop).
    pub fn control_forcing(&self, c: &FollowerControls) -> Forcing {
        let mut out = Forcing::zeros(self.space(), self.time());
        let add_traces = |out: &mut Forcing, v: &BoundaryPair, set: BoundarySet| {
            for s in set.sides() {
                out.boundary[s].values_mut().iter_mut().zip(v[s].values()).for_each(|(o, x)| *o += x);
            }
        };
        match c {
            FollowerControls::A { v, psi } => {
                out.source = psi.clone();
                out.source.clear_boundary();
                add_traces(&mut out, v, self.follower_boundary(0));
            }
            FollowerControls::B { v, psi } => {
                out.source = v.masked(&self.control_mask);
                out.source.add_scaled(1.0, &psi.masked(&self.disturbance_mask));
            }
            FollowerControls::C { v } => add_traces(&mut out, v, self.follower_boundary(0)),
            FollowerControls::D { v } => {
                add_traces(&mut out, &v[0], self.follower_boundary(0));
                add_traces(&mut out, &v[1], self.follower_boundary(1));
            }
        }
        out
    }

    /// Two-point outward normal derivative of an adjoint density (zero boundary columns).
    pub fn density_normal_derivative(&self, q: &SpaceTimeField, side: Side) -> Vec<f64> {
        let n = self.space().n_interior();
        let dx = self.space().dx();
        let i = if side == Side::Left { 1 } else { n };
        (0..self.time().n_levels()).map(|k| -q.level(k)[i] / dx).collect()
    }

    /// Boundary feedback `ρ_Γ ρ⋆^{-2} ∂q/∂n / ℓ²` of follower `j` (the `ρ⋆` factor only in C and D).
    fn boundary_feedback(&self, j: usize, q: &SpaceTimeField) -> BoundaryPair {
        let ell2 = self.params.ell * self.params.ell;
        let mut v = BoundaryPair::zeros(self.time());
        for s in self.follower_boundary(j).sides() {
            let dn = self.density_normal_derivative(q, s);
            for (k, d) in dn.into_iter().enumerate() {
                v[s][k] = self.rho_inv_sq[k] * d / ell2;
            }
        }
        v
    }

    /// Follower strategies given by the adjoint densities (the first-order conditions).
    pub fn controls_from_adjoints(&self, qs: &[SpaceTimeField]) -> FollowerControls {
        let (ell2, gam2) = (self.params.ell.powi(2), self.params.gamma.powi(2));
        match self.configuration() {
            Configuration::A => FollowerControls::A { v: self.boundary_feedback(0, &qs[0]), psi: qs[0].scaled(1.0 / gam2) },
            Configuration::B => FollowerControls::B {
                v: qs[0].masked(&self.control_mask).scaled(-1.0 / ell2),
                psi: qs[0].masked(&self.disturbance_mask).scaled(1.0 / gam2),
            },
            Configuration::C => FollowerControls::C { v: self.boundary_feedback(0, &qs[0]) },
            Configuration::D => FollowerControls::D { v: [self.boundary_feedback(0, &qs[0]), self.boundary_feedback(1, &qs[1])] },
        }
    }

    /// Feedback forcing of follower `j` alone, driven by the density `q`.
    pub fn feedback_forcing(&self, j: usize, q: &SpaceTimeField) -> Forcing {
        let zero = SpaceTimeField::zeros(self.space(), self.time());
        let qs: Vec<SpaceTimeField> = (0..self.n_followers()).map(|i| if i == j { q.clone() } else { zero.clone() }).collect();
        self.control_forcing(&self.controls_from_adjoints(&qs))
    }

    /// Riesz density of a source cotangent: divides by the quadrature weight `w_k dx`.
    pub fn density(&self, source_cotangent: &SpaceTimeField) -> SpaceTimeField {
        let (space, time) = (self.space(), self.time());
        let mut q = SpaceTimeField::zeros(space, time);
        let dx = space.dx();
        for k in 0..time.n_levels() {
            let w = time.weight(k) * dx;
            let (src, dst) = (source_cotangent.level(k), q.level_mut(k));
            for i in space.interior() {
                dst[i] = src[i] / w;
            }
        }
        q
    }

    /// `W_j (u - y_d)`: tracking residual weighted by the quadrature of the observation set.
    pub fn tracking_cotangent(&self, j: usize, u: &SpaceTimeField, target: &SpaceTimeField) -> SpaceTimeField {
        let (space, time) = (self.space(), self.time());
        let dx = space.dx();
        let mut c = u.sub(target).masked(&self.observation_masks[j]);
        for k in 0..time.n_levels() {
            let w = time.weight(k) * dx;
            c.level_mut(k).iter_mut().for_each(|v| *v *= w);
        }
        c
    }

    /// Adjoint density of every follower for the state `u`.
    pub fn adjoint_densities(&self, u: &SpaceTimeField, data: &ProblemData) -> Result<Vec<SpaceTimeField>> {
        (0..self.n_followers())
            .map(|j| {
                let img = self.scheme.transpose(&self.tracking_cotangent(j, u, &data.targets[j]))?;
                Ok(self.density(&img.forcing.source))
            })
            .collect()
    }

    /// State for given leader and follower strategies.
    pub fn state(&self, h: &LeaderControl, controls: &FollowerControls, data: &ProblemData) -> Result<SpaceTimeField> {
        let mut f = self.leader_forcing(h)?;
        f.add_scaled(1.0, &self.control_forcing(controls));
        self.scheme.solve_forward(&data.initial, &f)
    }

    /// Picard iteration on the optimality system for the scenario data.
    pub fn solve(&self, h: &LeaderControl) -> Result<SaddleSolution> {
        self.solve_with(h, &self.cfg.data)
    }

    /// Picard iteration on the optimality system for explicit data.
    pub fn solve_with(&self, h: &LeaderControl, data: &ProblemData) -> Result<SaddleSolution> {
        let base = self.leader_forcing(h)?;
        let zero = SpaceTimeField::zeros(self.space(), self.time());
        let mut qs = vec![zero; self.n_followers()];
        let forward = |qs: &[SpaceTimeField]| -> Result<SpaceTimeField> {
            let mut f = base.clone();
            f.add_scaled(1.0, &self.control_forcing(&self.controls_from_adjoints(qs)));
            self.scheme.solve_forward(&data.initial, &f)
        };
        let mut u = forward(&qs)?;
        let mut picard = Picard::new(self.params.tol, self.params.max_iterations);
        let mut it = 0;
        loop {
            it += 1;
            let next = self.adjoint_densities(&u, data)?;
            let diff = l2q_distance(&next, &qs)?;
            let size = l2q_size(&next)?;
            qs = next;
            u = forward(&qs)?;
            if let Step::Converged = picard.record(it, diff, size)? {
                break;
            }
        }
        Ok(SaddleSolution {
            controls: self.controls_from_adjoints(&qs),
            state: u,
            adjoints: qs,
            iterations: it,
            residual: picard.residual,
            ratios: picard.ratios,
        })
    }
}
