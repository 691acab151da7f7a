//! Leader null control by penalized HUM on the coupled leader–follower system.
//!
//! The terminal map `h ↦ y(T)` of the follower-coupled state is linear, and its exact discrete
//! transpose is realized by a backward/forward adjoint pair `(φ, θ)`. The leader minimizes
//! `F_ε(φᵀ) = ½ ‖L♯φᵀ‖² + (ε/2) ‖φᵀ‖²_{H¹₀} + ⟨b, φᵀ⟩` by conjugate gradient in `H¹₀`.

mod cg;
mod probe;

pub use cg::{conjugate_gradient, CgOutcome};
pub use probe::{ProbeReport, ProbeSample};

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::follower::system::{l2q_distance, l2q_size, Picard, Step};
use crate::follower::{Configuration, LeaderControl, OptimalitySystem, ProblemData, SaddleSolution};
use crate::pde::{h10_inner, h10_norm, hminus1_norm, inverse_laplacian, l2_boundary, l2_masked, BoundaryPair, Side, SpaceTimeField};

/// Penalization of the terminal datum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PenaltyKind {
    /// `(ε/2) ‖φᵀ‖²_{H¹₀}`.
    #[default]
    SquaredNorm,
}

/// Settings of the penalized HUM minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HumSettings {
    pub epsilon: f64,
    pub cg_tol: f64,
    pub cg_max_iterations: usize,
    pub penalty: PenaltyKind,
}

impl HumSettings {
    pub fn new(epsilon: f64) -> Result<Self> {
        Self { epsilon, cg_tol: 1e-10, cg_max_iterations: 1000, penalty: PenaltyKind::SquaredNorm }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.cg_tol.is_nan() || self.cg_tol <= 0.0 || self.cg_max_iterations == 0 {
            return Err(Error::InvalidParameter("CG tolerance and iteration cap must be positive".into()));
        }
        Ok(self)
    }
}

/// Adjoint pair generated by a terminal datum.
///
/// `phi` is the density of the exact discrete transpose, so its last level is the discrete
/// image of `terminal` rather than `terminal` itself; `terminal` keeps the datum.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjointPair {
    pub terminal: Vec<f64>,
    pub phi: SpaceTimeField,
    /// `φ(0)` as a nodal vector.
    pub phi_initial: Vec<f64>,
    /// One forward component per follower, zero at level 0.
    pub thetas: Vec<SpaceTimeField>,
    /// Cotangent of the initial state (Euclidean), used for the data pairing.
    pub initial_cotangent: Vec<f64>,
    pub iterations: usize,
    pub ratios: Vec<f64>,
}

/// Minimizer of `F_ε` and its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct HumResult {
    pub terminal: Vec<f64>,
    pub leader: LeaderControl,
    /// `‖y(T)‖_{H⁻¹}` from a fresh solve of the optimality system with the synthesized leader.
    pub terminal_residual: f64,
    /// The same quantity predicted from the CG residual, `‖εφᵀ + r‖_{H¹₀}`.
    pub internal_residual: f64,
    pub cg_iterations: usize,
    pub functional_value: f64,
    pub functional_trace: Vec<f64>,
    pub residual_trace: Vec<f64>,
    pub equilibrium: SaddleSolution,
}

/// Comparison of the assembled gradient of `F_ε` with central differences.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheck {
    pub steps: Vec<f64>,
    /// Worst relative discrepancy over the directions, one entry per step.
    pub relative_errors: Vec<f64>,
    pub max_relative_error: f64,
}

/// The leader's penalized HUM problem for one scenario.
#[derive(Debug, Clone)]
pub struct LeaderProblem {
    sys: OptimalitySystem,
    settings: HumSettings,
}

impl LeaderProblem {
    pub fn new(sys: OptimalitySystem, settings: HumSettings) -> Result<Self> {
        Ok(Self { sys, settings: settings.validated()? })
    }

    pub fn system(&self) -> &OptimalitySystem {
        &self.sys
    }

    pub fn settings(&self) -> &HumSettings {
        &self.settings
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.sys.clone(), HumSettings { epsilon, ..self.settings })
    }

    fn check_terminal(&self, terminal: &[f64]) -> Result<()> {
        if terminal.len() != self.sys.space().n_nodes() {
            return Err(Error::Dimension(format!(
                "terminal datum has {} entries, grid has {} nodes",
                terminal.len(),
                self.sys.space().n_nodes()
            )));
        }
        if !terminal.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("terminal datum"));
        }
        Ok(())
    }

    /// Observation weight `w_k dx χ_O` applied to `θ`.
    fn observe(&self, j: usize, theta: &SpaceTimeField) -> SpaceTimeField {
        let zero = SpaceTimeField::zeros(self.sys.space(), self.sys.time());
        self.sys.tracking_cotangent(j, theta, &zero)
    }

    /// Adjoint pair of `φᵀ` by Picard iteration on the `θ` components.
    pub fn solve_adjoint(&self, terminal: &[f64]) -> Result<AdjointPair> {
        self.check_terminal(terminal)?;
        let (space, time) = (self.sys.space(), self.sys.time());
        let n = space.n_interior();
        let dx = space.dx();
        let mut base = SpaceTimeField::zeros(space, time);
        {
            let last = base.level_mut(time.n_steps());
            for i in 1..=n {
                last[i] = dx * terminal[i];
            }
        }
        let zero_y0 = vec![0.0; space.n_nodes()];
        let backward = |thetas: &[SpaceTimeField]| -> Result<(SpaceTimeField, Vec<f64>)> {
            let mut c = base.clone();
            for (j, th) in thetas.iter().enumerate() {
                c.add_scaled(1.0, &self.observe(j, th));
            }
            let img = self.sys.scheme().transpose(&c)?;
            Ok((self.sys.density(&img.forcing.source), img.initial))
        };
        let forward = |phi: &SpaceTimeField| -> Result<Vec<SpaceTimeField>> {
            (0..self.sys.n_followers())
                .map(|j| self.sys.scheme().solve_forward(&zero_y0, &self.sys.feedback_forcing(j, phi)))
                .collect()
        };
        let mut thetas = vec![SpaceTimeField::zeros(space, time); self.sys.n_followers()];
        let (mut phi, _) = backward(&thetas)?;
        let mut picard = Picard::new(self.sys.params().tol, self.sys.params().max_iterations);
        let mut it = 0;
        let initial = loop {
            it += 1;
            let next = forward(&phi)?;
            let diff = l2q_distance(&next, &thetas)?;
            let size = l2q_size(&next)?;
            thetas = next;
            let (p, initial) = backward(&thetas)?;
            phi = p;
            if let Step::Converged = picard.record(it, diff, size)? {
                break initial;
            }
        };
        let phi_initial = initial.iter().map(|v| v / dx).collect();
        Ok(AdjointPair {
            terminal: terminal.to_vec(),
            phi,
            phi_initial,
            thetas,
            initial_cotangent: initial,
            iterations: it,
            ratios: picard.ratios,
        })
    }

    /// Leader control `L♯φᵀ`: `φ χ_ω` in A, `-∂φ/∂n` on the leader boundary otherwise.
    pub fn leader_from_adjoint(&self, pair: &AdjointPair) -> LeaderControl {
        let sys = &self.sys;
        match sys.configuration() {
            Configuration::A => LeaderControl::Distributed(pair.phi.masked(sys.omega_mask())),
            _ => {
                let mut h = BoundaryPair::zeros(sys.time());
                for s in sys.config().geometry.leader_boundary().sides() {
                    for (k, d) in sys.density_normal_derivative(&pair.phi, s).into_iter().enumerate() {
                        h[s][k] = -d;
                    }
                }
                LeaderControl::Boundary(h)
            }
        }
    }

    /// Squared norm of a leader control in its observation space.
    pub fn leader_norm_sq(&self, h: &LeaderControl) -> Result<f64> {
        self.leader_inner(h, h)
    }

    pub fn leader_inner(&self, a: &LeaderControl, b: &LeaderControl) -> Result<f64> {
        match (a, b) {
            (LeaderControl::Distributed(f), LeaderControl::Distributed(g)) => Ok(l2_masked(f, g, self.sys.omega_mask())),
            (LeaderControl::Boundary(f), LeaderControl::Boundary(g)) => {
                l2_boundary(f, g, &self.sys.config().geometry.leader_boundary())
            }
            _ => Err(Error::InvalidParameter("leader controls of different kinds".into())),
        }
    }

    /// Terminal state of the coupled system driven by `h` alone.
    fn terminal_response(&self, h: &LeaderControl, data: &ProblemData) -> Result<Vec<f64>> {
        Ok(self.sys.solve_with(h, data)?.state.terminal().to_vec())
    }

    /// `H¹₀` Riesz representative of `b ↦ ⟨L♯a, L♯b⟩`.
    pub fn gram_apply(&self, terminal: &[f64]) -> Result<Vec<f64>> {
        let h = self.leader_from_adjoint(&self.solve_adjoint(terminal)?);
        let y_t = self.terminal_response(&h, &self.sys.zero_data())?;
        inverse_laplacian(&self.sys.space(), &y_t)
    }

    /// `H¹₀` Riesz representative of `φᵀ ↦ ⟨y_free(T), φᵀ⟩_{L²}`, where `y_free` is the coupled
    /// state with the scenario data and no leader.
    pub fn linear_term(&self) -> Result<Vec<f64>> {
        let y_t = self.terminal_response(&self.sys.zero_leader(), self.sys.data())?;
        inverse_laplacian(&self.sys.space(), &y_t)
    }

    /// The data pairing computed through the adjoint pair:
    /// `⟨y₀, φ(0)⟩ - Σⱼ ∬_{Oⱼ} θⱼ y_{d,j}`.
    pub fn data_pairing(&self, pair: &AdjointPair) -> f64 {
        let data = self.sys.data();
        let init: f64 = data.initial.iter().zip(&pair.initial_cotangent).map(|(a, b)| a * b).sum();
        let track: f64 = pair
            .thetas
            .iter()
            .enumerate()
            .map(|(j, th)| {
                let w = self.observe(j, th);
                w.values().iter().zip(data.targets[j].values()).map(|(a, b)| a * b).sum::<f64>()
            })
            .sum();
        init - track
    }

    /// `F_ε(φᵀ)` evaluated from the observation norm, without the Gram operator.
    pub fn functional(&self, terminal: &[f64], linear: &[f64]) -> Result<f64> {
        let space = self.sys.space();
        let pair = self.solve_adjoint(terminal)?;
        let obs = self.leader_norm_sq(&self.leader_from_adjoint(&pair))?;
        Ok(0.5 * obs + 0.5 * self.settings.epsilon * h10_norm(&space, terminal).powi(2) + h10_inner(&space, linear, terminal))
    }

    /// `H¹₀` gradient `Gram φᵀ + ε φᵀ + b`.
    pub fn gradient(&self, terminal: &[f64], linear: &[f64]) -> Result<Vec<f64>> {
        let g = self.gram_apply(terminal)?;
        Ok(g.iter().zip(terminal).zip(linear).map(|((g, p), b)| g + self.settings.epsilon * p + b).collect())
    }

    /// Minimizes `F_ε` and certifies the terminal residual with an independent solve.
    pub fn minimize(&self) -> Result<HumResult> {
        let space = self.sys.space();
        let eps = self.settings.epsilon;
        let b = self.linear_term()?;
        let rhs: Vec<f64> = b.iter().map(|v| -v).collect();
        let dot = |u: &[f64], v: &[f64]| h10_inner(&space, u, v);
        let mut apply = |p: &[f64]| -> Result<Vec<f64>> {
            let g = self.gram_apply(p)?;
            Ok(g.iter().zip(p).map(|(g, p)| g + eps * p).collect())
        };
        let cg = conjugate_gradient(&mut apply, &dot, &rhs, self.settings.cg_tol, self.settings.cg_max_iterations)?;
        let terminal = cg.solution;
        let leader = self.leader_from_adjoint(&self.solve_adjoint(&terminal)?);
        let equilibrium = self.sys.solve(&leader)?;
        let terminal_residual = hminus1_norm(&space, equilibrium.state.terminal())?;
        let predicted: Vec<f64> = terminal.iter().zip(&cg.residual).map(|(p, r)| eps * p + r).collect();
        let functional_value = *cg.energy_trace.last().unwrap_or(&0.0);
        Ok(HumResult {
            terminal,
            leader,
            terminal_residual,
            internal_residual: h10_norm(&space, &predicted),
            cg_iterations: cg.iterations,
            functional_value,
            functional_trace: cg.energy_trace,
            residual_trace: cg.residual_trace,
            equilibrium,
        })
    }

    /// Random terminal datum: Gaussian interior values normalized in `H¹₀`.
    pub fn random_terminal(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let space = self.sys.space();
        let n = space.n_interior();
        let mut v = vec![0.0; space.n_nodes()];
        for x in &mut v[1..=n] {
            *x = StandardNormal.sample(rng);
        }
        let norm = h10_norm(&space, &v);
        v.iter_mut().for_each(|x| *x /= norm);
        v
    }

    /// Compares `⟨∇F_ε(φᵀ), δ⟩_{H¹₀}` with central differences of `F_ε` along random `δ`.
    pub fn gradient_check(
        &self,
        terminal: &[f64],
        n_directions: usize,
        steps: &[f64],
        rng: &mut ChaCha8Rng,
    ) -> Result<GradientCheck> {
        let space = self.sys.space();
        let b = self.linear_term()?;
        let grad = self.gradient(terminal, &b)?;
        let mut relative_errors = vec![0.0f64; steps.len()];
        for _ in 0..n_directions {
            let dir = self.random_terminal(rng);
            let exact = h10_inner(&space, &grad, &dir);
            for (e, &t) in relative_errors.iter_mut().zip(steps) {
                let shift = |s: f64| terminal.iter().zip(&dir).map(|(p, d)| p + s * d).collect::<Vec<_>>();
                let fd = (self.functional(&shift(t), &b)? - self.functional(&shift(-t), &b)?) / (2.0 * t);
                let scale = exact.abs().max(f64::MIN_POSITIVE);
                *e = e.max((fd - exact).abs() / scale);
            }
        }
        let max_relative_error = relative_errors.iter().copied().fold(0.0, f64::max);
        Ok(GradientCheck { steps: steps.to_vec(), relative_errors, max_relative_error })
    }
}

/// Nodal values of a leader boundary trace on one side, for reporting.
pub fn leader_trace(h: &LeaderControl, side: Side) -> Option<Vec<f64>> {
    match h {
        LeaderControl::Boundary(b) => Some(b[side].values().to_vec()),
        LeaderControl::Distributed(_) => None,
    }
}
