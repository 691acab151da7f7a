//! Direct solution of the follower equilibrium from the assembled space-time system.
//!
//! The state map is built by block forward substitution with dense matrices, and the
//! equilibrium is the solution of the stacked first-order conditions of every player.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::follower::controls::{FollowerControls, LeaderControl};
use crate::follower::scenario::{Configuration, ProblemData, ScenarioConfig};
use crate::follower::system::{OptimalitySystem, RobustParams};
use crate::pde::{Forcing, Side, SpaceTimeField};

/// One unknown of the equilibrium: where it enters the state equation and how it is penalized.
#[derive(Debug, Clone, Copy)]
enum Slot {
    Source { level: usize, node: usize },
    Boundary { level: usize, side: Side },
}

#[derive(Debug, Clone)]
struct Block {
    player: usize,
    slots: Vec<Slot>,
    /// Scale from the unknown to the physical input (`ρ⋆^{-1}` for weighted boundary controls).
    input_scale: Vec<f64>,
    penalty: Vec<f64>,
}

/// Equilibrium computed by the dense solver.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution {
    pub controls: FollowerControls,
    pub state: SpaceTimeField,
}

/// Dense reference solver, practical for a few thousand unknowns.
pub struct DenseOracle {
    sys: OptimalitySystem,
    implicit: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    explicit: DMatrix<f64>,
    blocks: Vec<Block>,
}

impl DenseOracle {
    pub fn new(cfg: ScenarioConfig, params: RobustParams) -> Result<Self> {
        let sys = OptimalitySystem::new(cfg, params)?;
        let (space, time) = (sys.space(), sys.time());
        let n = space.n_interior();
        let (dt, dx, th) = (time.dt(), space.dx(), sys.config().theta);
        let lap = DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => -2.0 / (dx * dx),
            1 => 1.0 / (dx * dx),
            _ => 0.0,
        });
        let eye = DMatrix::<f64>::identity(n, n);
        let implicit = (&eye - &lap * (th * dt)).lu();
        let explicit = &eye + &lap * ((1.0 - th) * dt);
        let blocks = build_blocks(&sys);
        Ok(Self { sys, implicit, explicit, blocks })
    }

    pub fn system(&self) -> &OptimalitySystem {
        &self.sys
    }

    /// Number of scalar unknowns in the equilibrium system.
    pub fn n_unknowns(&self) -> usize {
        self.blocks.iter().map(|b| b.slots.len()).sum()
    }

    /// Interior state on every level, stacked, for the interior data `y0` and the per-level
    /// interior sources `s` (boundary data already folded in). Levels before `start` are zero.
    fn propagate(&self, y0: &DVector<f64>, s: &[DVector<f64>], start: usize) -> Vec<DVector<f64>> {
        let time = self.sys.time();
        let (dt, th) = (time.dt(), self.sys.config().theta);
        let mut out = vec![DVector::zeros(y0.len()); time.n_levels()];
        out[start] = y0.clone();
        for k in start..time.n_steps() {
            let rhs = &self.explicit * &out[k] + (&s[k + 1] * th + &s[k] * (1.0 - th)) * dt;
            out[k + 1] = self.implicit.solve(&rhs).expect("implicit matrix is nonsingular");
        }
        out
    }

    fn sources(&self, f: &Forcing) -> Vec<DVector<f64>> {
        let space = self.sys.space();
        let (n, dx2) = (space.n_interior(), space.dx().powi(2));
        (0..self.sys.time().n_levels())
            .map(|k| {
                let lvl = f.source.level(k);
                let mut v = DVector::from_fn(n, |i, _| lvl[i + 1]);
                v[0] += f.boundary.left[k] / dx2;
                v[n - 1] += f.boundary.right[k] / dx2;
                v
            })
            .collect()
    }

    /// State response to a unit input in `slot`.
    fn response(&self, slot: Slot) -> Vec<DVector<f64>> {
        let space = self.sys.space();
        let n = space.n_interior();
        let levels = self.sys.time().n_levels();
        let mut s = vec![DVector::zeros(n); levels];
        let level = match slot {
            Slot::Source { level, node } => {
                s[level][node - 1] = 1.0;
                level
            }
            Slot::Boundary { level, side } => {
                let i = if side == Side::Left { 0 } else { n - 1 };
                s[level][i] = 1.0 / space.dx().powi(2);
                level
            }
        };
        // A unit input at level k feeds the step k-1 -> k and the step k -> k+1.
        let start = level.saturating_sub(1);
        self.propagate(&DVector::zeros(n), &s, start)
    }

    /// Equilibrium for the leader control `h` and the data.
    pub fn solve(&self, h: &LeaderControl, data: &ProblemData) -> Result<DenseSolution> {
        let (space, time) = (self.sys.space(), self.sys.time());
        let n = space.n_interior();
        let levels = time.n_levels();
        let rows = n * levels;
        let stack = |v: &[DVector<f64>]| DVector::from_iterator(rows, v.iter().flat_map(|x| x.iter().copied()));

        let lead = self.sys.leader_forcing(h)?;
        let y0 = DVector::from_fn(n, |i, _| data.initial[i + 1]);
        let base = stack(&self.propagate(&y0, &self.sources(&lead), 0));

        let total = self.n_unknowns();
        let mut resp = DMatrix::<f64>::zeros(rows, total);
        let mut col = 0;
        for b in &self.blocks {
            for (slot, scale) in b.slots.iter().zip(&b.input_scale) {
                let r = stack(&self.response(*slot)) * *scale;
                resp.set_column(col, &r);
                col += 1;
            }
        }

        let weights: Vec<DVector<f64>> = (0..self.sys.n_followers())
            .map(|p| {
                let mask = self.sys.observation_mask(p);
                DVector::from_fn(rows, |r, _| {
                    let (k, i) = (r / n, r % n + 1);
                    time.weight(k) * space.dx() * mask[i]
                })
            })
            .collect();
        let targets: Vec<DVector<f64>> = data
            .targets
            .iter()
            .map(|t| DVector::from_fn(rows, |r, _| t.level(r / n)[r % n + 1]))
            .collect();

        let mut kkt = DMatrix::<f64>::zeros(total, total);
        let mut rhs = DVector::<f64>::zeros(total);
        let mut row = 0;
        for b in &self.blocks {
            let w = &weights[b.player];
            let residual = (&base - &targets[b.player]).component_mul(w);
            let weighted = DMatrix::from_fn(rows, total, |r, c| w[r] * resp[(r, c)]);
            for pen in &b.penalty {
                let ub = resp.column(row);
                let line = ub.transpose() * &weighted;
                kkt.row_mut(row).copy_from(&line);
                kkt[(row, row)] += pen;
                rhs[row] = -ub.dot(&residual);
                row += 1;
            }
        }
        let z = kkt.lu().solve(&rhs).ok_or_else(|| Error::InvalidParameter("equilibrium system is singular".into()))?;
        if !z.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("dense equilibrium"));
        }

        let mut controls = self.sys.zero_controls();
        let mut col = 0;
        for (bi, b) in self.blocks.iter().enumerate() {
            for (slot, scale) in b.slots.iter().zip(&b.input_scale) {
                write_slot(&mut controls, bi, *slot, z[col] * scale);
                col += 1;
            }
        }
        let state = self.sys.state(h, &controls, data)?;
        let mut dense_state = state.clone();
        let u = base + resp * z;
        for k in 0..levels {
            dense_state.level_mut(k)[1..=n].copy_from_slice(&u.as_slice()[k * n..(k + 1) * n]);
        }
        Ok(DenseSolution { controls, state: dense_state })
    }
}

fn write_slot(c: &mut FollowerControls, block: usize, slot: Slot, value: f64) {
    match (c, slot) {
        (FollowerControls::A { v, .. }, Slot::Boundary { level, side }) => v[side][level] = value,
        (FollowerControls::A { psi, .. }, Slot::Source { level, node }) => psi.level_mut(level)[node] = value,
        (FollowerControls::B { v, psi }, Slot::Source { level, node }) => {
            let target = if block == 0 { v } else { psi };
            target.level_mut(level)[node] = value;
        }
        (FollowerControls::C { v }, Slot::Boundary { level, side }) => v[side][level] = value,
        (FollowerControls::D { v }, Slot::Boundary { level, side }) => v[block][side][level] = value,
        _ => unreachable!("slot kind does not match the configuration"),
    }
}

fn build_blocks(sys: &OptimalitySystem) -> Vec<Block> {
    let (space, time) = (sys.space(), sys.time());
    let (ell2, gam2) = (sys.params().ell.powi(2), sys.params().gamma.powi(2));
    let dx = space.dx();
    let levels = 0..time.n_levels();
    let boundary_block = |player: usize, weighted: bool| {
        let mut b = Block { player, slots: Vec::new(), input_scale: Vec::new(), penalty: Vec::new() };
        for side in sys.follower_boundary(player).sides() {
            for k in levels.clone() {
                let scale = if weighted { sys.rho_inv_sq()[k].sqrt() } else { 1.0 };
                if scale == 0.0 {
                    continue;
                }
                b.slots.push(Slot::Boundary { level: k, side });
                b.input_scale.push(scale);
                b.penalty.push(ell2 * time.weight(k));
            }
        }
        b
    };
    let source_block = |mask: &[f64], pen: f64| {
        let mut b = Block { player: 0, slots: Vec::new(), input_scale: Vec::new(), penalty: Vec::new() };
        for k in levels.clone() {
            for i in space.interior() {
                if mask[i] != 0.0 {
                    b.slots.push(Slot::Source { level: k, node: i });
                    b.input_scale.push(1.0);
                    b.penalty.push(pen * time.weight(k) * dx * mask[i]);
                }
            }
        }
        b
    };
    let interior: Vec<f64> = (0..space.n_nodes()).map(|i| if space.interior().contains(&i) { 1.0 } else { 0.0 }).collect();
    match sys.configuration() {
        Configuration::A => vec![boundary_block(0, false), source_block(&interior, -gam2)],
        Configuration::B => vec![source_block(sys.control_mask(), ell2), source_block(sys.disturbance_mask(), -gam2)],
        Configuration::C => vec![boundary_block(0, true)],
        Configuration::D => vec![boundary_block(0, true), boundary_block(1, true)],
    }
}
