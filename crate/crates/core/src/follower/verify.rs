use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::follower::controls::{FollowerControls, LeaderControl, PartMut};
use crate::follower::scenario::{Configuration, ProblemData};
use crate::follower::system::{OptimalitySystem, SaddleSolution};
use crate::pde::{l2_boundary, l2_masked, l2_q, BoundarySet, BoundaryPair, Side, SpaceTimeField};

/// Absolute slack (scaled by `max(1, |J|)`) allowed in the equilibrium inequalities.
pub const SADDLE_SLACK: f64 = 1e-9;

/// `(ℓ²/2) Σ_k w_k Σ_sides ρ⋆² v²`, with `ρ⋆²v² = 0` for `v = 0` and `+∞` where `ρ⋆^{-2}` vanishes.
fn weighted_boundary_penalty(sys: &OptimalitySystem, v: &BoundaryPair) -> f64 {
    let time = sys.time();
    let ell2 = sys.params().ell.powi(2);
    let mut acc = 0.0;
    for s in Side::BOTH {
        for k in 0..time.n_levels() {
            let x = v[s][k];
            if x == 0.0 {
                continue;
            }
            let inv = sys.rho_inv_sq()[k];
            acc += if inv == 0.0 { f64::INFINITY } else { time.weight(k) * x * x / inv };
        }
    }
    0.5 * ell2 * acc
}

impl OptimalitySystem {
    /// Cost of each follower at the given strategies and state.
    ///
    /// In debug builds the state is recomputed and compared with the one supplied.
    pub fn evaluate_functional(
        &self,
        controls: &FollowerControls,
        h: &LeaderControl,
        state: &SpaceTimeField,
        data: &ProblemData,
    ) -> Result<Vec<f64>> {
        if cfg!(debug_assertions) {
            let fresh = self.state(h, controls, data)?;
            let scale = fresh.max_abs().max(1e-300);
            let mismatch = fresh.sub(state).max_abs() / scale;
            if mismatch > 1e-9 {
                return Err(Error::InconsistentState { mismatch });
            }
        }
        self.costs(controls, state, data)
    }

    pub(crate) fn costs(&self, controls: &FollowerControls, state: &SpaceTimeField, data: &ProblemData) -> Result<Vec<f64>> {
        let (ell2, gam2) = (self.params().ell.powi(2), self.params().gamma.powi(2));
        let tracking = |j: usize| {
            let d = state.sub(&data.targets[j]);
            0.5 * l2_masked(&d, &d, self.observation_mask(j))
        };
        Ok(match controls {
            FollowerControls::A { v, psi } => {
                vec![tracking(0) + 0.5 * (ell2 * l2_boundary(v, v, &BoundarySet::ALL)? - gam2 * l2_q(psi, psi)?)]
            }
            FollowerControls::B { v, psi } => vec![
                tracking(0)
                    + 0.5 * (ell2 * l2_masked(v, v, self.control_mask()) - gam2 * l2_masked(psi, psi, self.disturbance_mask())),
            ],
            FollowerControls::C { v } => vec![tracking(0) + weighted_boundary_penalty(self, v)],
            FollowerControls::D { v } => {
                vec![tracking(0) + weighted_boundary_penalty(self, &v[0]), tracking(1) + weighted_boundary_penalty(self, &v[1])]
            }
        })
    }

    /// `ρ⋆(t_k)^{-1}`, the change of variables `v = ρ⋆^{-1} ṽ` used in C and D.
    fn rho_inv(&self) -> Vec<f64> {
        self.rho_inv_sq().iter().map(|v| v.sqrt()).collect()
    }

    /// Riesz gradient of each follower's cost with respect to its own strategy, split into the
    /// tracking and penalty contributions. In C and D the gradient is taken in `ṽ = ρ⋆ v`.
    pub fn cost_gradient(
        &self,
        h: &LeaderControl,
        controls: &FollowerControls,
        data: &ProblemData,
    ) -> Result<(FollowerControls, FollowerControls)> {
        let u = self.state(h, controls, data)?;
        let qs = self.adjoint_densities(&u, data)?;
        let (ell2, gam2) = (self.params().ell.powi(2), self.params().gamma.powi(2));
        let time = self.time();
        let boundary_track = |j: usize, scale: &[f64]| {
            let mut g = BoundaryPair::zeros(time);
            for s in self.follower_boundary(j).sides() {
                for (k, d) in self.density_normal_derivative(&qs[j], s).into_iter().enumerate() {
                    g[s][k] = -scale[k] * d;
                }
            }
            g
        };
        let ones = vec![1.0; time.n_levels()];
        let rho_inv = self.rho_inv();
        let tilde = |v: &BoundaryPair| {
            let mut out = v.clone();
            for s in Side::BOTH {
                for k in 0..time.n_levels() {
                    out[s][k] = if rho_inv[k] == 0.0 { 0.0 } else { v[s][k] / rho_inv[k] };
                }
            }
            out.scaled(ell2)
        };
        Ok(match controls {
            FollowerControls::A { v, psi } => {
                let mut q = qs[0].clone();
                q.clear_boundary();
                (FollowerControls::A { v: boundary_track(0, &ones), psi: q }, FollowerControls::A {
                    v: v.scaled(ell2),
                    psi: psi.scaled(-gam2),
                })
            }
            FollowerControls::B { v, psi } => (
                FollowerControls::B { v: qs[0].masked(self.control_mask()), psi: qs[0].masked(self.disturbance_mask()) },
                FollowerControls::B {
                    v: v.masked(self.control_mask()).scaled(ell2),
                    psi: psi.masked(self.disturbance_mask()).scaled(-gam2),
                },
            ),
            FollowerControls::C { v } => {
                (FollowerControls::C { v: boundary_track(0, &rho_inv) }, FollowerControls::C { v: tilde(v) })
            }
            FollowerControls::D { v } => (
                FollowerControls::D { v: [boundary_track(0, &rho_inv), boundary_track(1, &rho_inv)] },
                FollowerControls::D { v: [tilde(&v[0]), tilde(&v[1])] },
            ),
        })
    }

    /// Norm of a control in the inner product of its own space.
    pub fn control_norm(&self, c: &FollowerControls) -> Result<f64> {
        Ok(self.control_inner(c, c)?.sqrt())
    }

    pub fn control_inner(&self, a: &FollowerControls, b: &FollowerControls) -> Result<f64> {
        Ok(match (a, b) {
            (FollowerControls::A { v: v1, psi: p1 }, FollowerControls::A { v: v2, psi: p2 }) => {
                l2_boundary(v1, v2, &BoundarySet::ALL)? + l2_q(p1, p2)?
            }
            (FollowerControls::B { v: v1, psi: p1 }, FollowerControls::B { v: v2, psi: p2 }) => {
                l2_masked(v1, v2, self.control_mask()) + l2_masked(p1, p2, self.disturbance_mask())
            }
            (FollowerControls::C { v: v1 }, FollowerControls::C { v: v2 }) => l2_boundary(v1, v2, &BoundarySet::ALL)?,
            (FollowerControls::D { v: v1 }, FollowerControls::D { v: v2 }) => {
                l2_boundary(&v1[0], &v2[0], &BoundarySet::ALL)? + l2_boundary(&v1[1], &v2[1], &BoundarySet::ALL)?
            }
            _ => return Err(Error::InvalidParameter("controls of different configurations".into())),
        })
    }
}

/// Outcome of [`verify_saddle`].
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleReport {
    pub perturbations: usize,
    /// Largest `J(equilibrium) - J(perturbed)` over perturbations of a minimizing strategy.
    pub worst_min_violation: f64,
    /// Largest `J(perturbed) - J(equilibrium)` over perturbations of the disturbance (A, B).
    pub worst_max_violation: f64,
    /// `‖∇J‖ / (‖tracking part‖ + ‖penalty part‖)` at the equilibrium.
    pub gradient_relative: f64,
    /// Largest central-difference directional derivative over 20 unit directions, same scale.
    pub directional_relative: f64,
    /// Second difference of `ψ ↦ J` along the line through `ψ̄` (A, B).
    pub disturbance_second_difference: Option<f64>,
    /// `∬|y'|² - γ²‖ψ'‖²` for a random disturbance direction (A, B).
    pub disturbance_curvature: Option<f64>,
    pub slack: f64,
    pub offending: Option<String>,
}

impl SaddleReport {
    pub fn passed(&self, gradient_tol: f64) -> bool {
        self.offending.is_none() && self.gradient_relative <= gradient_tol && self.directional_relative <= gradient_tol
    }
}

/// Which strategy a perturbation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Player {
    /// Minimizing strategy of follower `j` (its own cost is checked).
    Min(usize),
    /// Maximizing disturbance.
    Max,
}

fn players(cfg: Configuration) -> Vec<Player> {
    match cfg {
        Configuration::A | Configuration::B => vec![Player::Min(0), Player::Max],
        Configuration::C => vec![Player::Min(0)],
        Configuration::D => vec![Player::Min(0), Player::Min(1)],
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

impl OptimalitySystem {
    /// Random unit direction moving only `player`'s strategy. In C and D the direction has unit
    /// norm in the weighted variable `ṽ = ρ⋆ v`.
    fn random_direction(&self, player: Player, rng: &mut ChaCha8Rng) -> Result<FollowerControls> {
        let mut d = self.zero_controls();
        let time = self.time();
        let trace = |rng: &mut ChaCha8Rng| {
            let mut b = BoundaryPair::zeros(time);
            for s in Side::BOTH {
                b[s].values_mut().iter_mut().for_each(|v| *v = gaussian(rng));
            }
            b
        };
        let field = |rng: &mut ChaCha8Rng, mask: &[f64]| {
            let mut f = SpaceTimeField::zeros(self.space(), time);
            f.values_mut().iter_mut().for_each(|v| *v = gaussian(rng));
            f.masked(mask)
        };
        let n = self.space().n_interior();
        let interior: Vec<f64> = (0..self.space().n_nodes()).map(|i| if i == 0 || i == n + 1 { 0.0 } else { 1.0 }).collect();
        match (&mut d, player) {
            (FollowerControls::A { v, .. }, Player::Min(_)) => *v = trace(rng),
            (FollowerControls::A { psi, .. }, Player::Max) => *psi = field(rng, &interior),
            (FollowerControls::B { v, .. }, Player::Min(_)) => *v = field(rng, self.control_mask()),
            (FollowerControls::B { psi, .. }, Player::Max) => *psi = field(rng, self.disturbance_mask()),
            (FollowerControls::C { v }, _) => *v = trace(rng),
            (FollowerControls::D { v }, Player::Min(j)) => v[j] = trace(rng),
            _ => unreachable!("player does not exist in this configuration"),
        }
        let norm = self.control_norm(&d)?;
        let mut out = d.zeros_like();
        if norm > 0.0 {
            out.add_scaled(1.0 / norm, &d);
        }
        if matches!(self.configuration(), Configuration::C | Configuration::D) {
            let rho_inv = self.rho_inv();
            for p in out.parts_mut() {
                if let PartMut::Trace(b) = p {
                    for s in Side::BOTH {
                        b[s].values_mut().iter_mut().zip(&rho_inv).for_each(|(v, r)| *v *= r);
                    }
                }
            }
        }
        Ok(out)
    }

    fn cost_of(&self, h: &LeaderControl, c: &FollowerControls, data: &ProblemData, j: usize) -> Result<f64> {
        let u = self.state(h, c, data)?;
        Ok(self.costs(c, &u, data)?[j])
    }
}

/// Checks the equilibrium inequalities along random perturbations, plus stationarity.
pub fn verify_saddle(
    sys: &OptimalitySystem,
    sol: &SaddleSolution,
    h: &LeaderControl,
    data: &ProblemData,
    n_perturbations: usize,
    rng: &mut ChaCha8Rng,
) -> Result<SaddleReport> {
    let cfg = sys.configuration();
    let base_costs = sys.costs(&sol.controls, &sol.state, data)?;
    let mut report = SaddleReport {
        perturbations: 0,
        worst_min_violation: f64::NEG_INFINITY,
        worst_max_violation: f64::NEG_INFINITY,
        gradient_relative: 0.0,
        directional_relative: 0.0,
        disturbance_second_difference: None,
        disturbance_curvature: None,
        slack: SADDLE_SLACK,
        offending: None,
    };
    for player in players(cfg) {
        let j = match player {
            Player::Min(j) => j,
            Player::Max => 0,
        };
        let base = base_costs[j];
        let slack = SADDLE_SLACK * base.abs().max(1.0);
        for i in 0..n_perturbations {
            let dir = sys.random_direction(player, rng)?;
            let magnitude = 10f64.powf(-3.0 * rng.gen::<f64>());
            let mut c = sol.controls.clone();
            c.add_scaled(magnitude, &dir);
            let value = sys.cost_of(h, &c, data, j)?;
            let violation = match player {
                Player::Min(_) => base - value,
                Player::Max => value - base,
            };
            match player {
                Player::Min(_) => report.worst_min_violation = report.worst_min_violation.max(violation),
                Player::Max => report.worst_max_violation = report.worst_max_violation.max(violation),
            }
            report.perturbations += 1;
            if violation > slack && report.offending.is_none() {
                report.offending = Some(format!(
                    "{player:?} perturbation {i} of magnitude {magnitude:.3e} changes the cost by {:.3e}",
                    -violation
                ));
            }
        }
    }

    let (track, pen) = sys.cost_gradient(h, &sol.controls, data)?;
    let mut grad = track.clone();
    grad.add_scaled(1.0, &pen);
    let scale = sys.control_norm(&track)? + sys.control_norm(&pen)?;
    report.gradient_relative = if scale > 0.0 { sys.control_norm(&grad)? / scale } else { 0.0 };

    let all = players(cfg);
    for i in 0..20 {
        let player = all[i % all.len()];
        let j = if let Player::Min(j) = player { j } else { 0 };
        let dir = sys.random_direction(player, rng)?;
        let step = 1e-2;
        let eval = |s: f64| -> Result<f64> {
            let mut c = sol.controls.clone();
            c.add_scaled(s, &dir);
            sys.cost_of(h, &c, data, j)
        };
        let dd = (eval(step)? - eval(-step)?) / (2.0 * step);
        let rel = if scale > 0.0 { dd.abs() / scale } else { dd.abs() };
        report.directional_relative = report.directional_relative.max(rel);
    }

    if matches!(cfg, Configuration::A | Configuration::B) {
        let dir = sys.random_direction(Player::Max, rng)?;
        let eval = |s: f64| -> Result<f64> {
            let mut c = sol.controls.clone();
            c.add_scaled(s, &dir);
            sys.cost_of(h, &c, data, 0)
        };
        let t = 0.5;
        report.disturbance_second_difference = Some(eval(t)? - 2.0 * base_costs[0] + eval(-t)?);
        let zero = sys.zero_data();
        let y1 = sys.state(&sys.zero_leader(), &dir, &zero)?;
        let track = l2_masked(&y1, &y1, sys.observation_mask(0));
        let gam2 = sys.params().gamma.powi(2);
        report.disturbance_curvature = Some(track - gam2 * sys.control_inner(&dir, &dir)?);
    }
    Ok(report)
}

/// Difference quotient versus linearized state, for each step.
#[derive(Debug, Clone, PartialEq)]
pub struct GateauxReport {
    pub steps: Vec<f64>,
    /// `max|quotient - y'| / max|y'|` (absolute when `y' = 0`).
    pub discrepancies: Vec<f64>,
    pub derivative: SpaceTimeField,
}

/// Compares `(y(c + λd) - y(c))/λ` with the solution of the linearized system driven by `d`.
pub fn gateaux_check(
    sys: &OptimalitySystem,
    h: &LeaderControl,
    base: &FollowerControls,
    direction: &FollowerControls,
    data: &ProblemData,
    steps: &[f64],
) -> Result<GateauxReport> {
    let zero = sys.zero_data();
    let derivative = sys.scheme().solve_forward(&zero.initial, &sys.control_forcing(direction))?;
    let y0 = sys.state(h, base, data)?;
    let scale = derivative.max_abs();
    let mut discrepancies = Vec::with_capacity(steps.len());
    for &lam in steps {
        let mut c = base.clone();
        c.add_scaled(lam, direction);
        let y1 = sys.state(h, &c, data)?;
        let mut q = y1.sub(&y0).scaled(1.0 / lam);
        q.add_scaled(-1.0, &derivative);
        discrepancies.push(if scale > 0.0 { q.max_abs() / scale } else { q.max_abs() });
    }
    Ok(GateauxReport { steps: steps.to_vec(), discrepancies, derivative })
}
