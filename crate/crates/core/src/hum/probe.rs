use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hum::{AdjointPair, LeaderProblem};
use crate::pde::{h10_norm, SpaceTimeField};
use crate::weights::target_weight;

/// One sampled observability ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSample {
    /// `‖φ(0)‖²_{H¹₀} + Σⱼ ∬ ϱ⁻² |θⱼ|²`.
    pub lhs: f64,
    /// Squared observation norm `‖L♯φᵀ‖²`.
    pub rhs: f64,
    pub ratio: f64,
}

/// Eigenvalues of the observation form below this fraction of the largest one are treated as zero
/// in the refinement.
pub const PSEUDO_INVERSE_CUTOFF: f64 = 1e-12;

/// Empirical constants of the observability inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub samples: Vec<ProbeSample>,
    /// Samples whose observation vanished numerically.
    pub skipped: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub argmax: usize,
    /// Rayleigh quotients of 20 power-iteration steps started from the worst sample.
    pub refinement: Vec<f64>,
}

impl ProbeReport {
    pub fn refined_max(&self) -> f64 {
        self.refinement.last().copied().unwrap_or(self.max).max(self.max)
    }
}

impl LeaderProblem {
    /// `ϱ(t_k)^{-2}` on every level, zero at `t = T`.
    fn target_inv_sq(&self) -> Result<Vec<f64>> {
        let time = self.system().time();
        (0..time.n_levels())
            .map(|k| if k == time.n_steps() { Ok(0.0) } else { Ok(target_weight(&self.system().config().weights, time.t(k))?.inv_sq) })
            .collect()
    }

    fn weighted_theta_sq(&self, pair: &AdjointPair, inv_sq: &[f64]) -> f64 {
        let (space, time) = (self.system().space(), self.system().time());
        pair.thetas
            .iter()
            .map(|th: &SpaceTimeField| {
                (0..time.n_levels())
                    .map(|k| {
                        let lvl: f64 = th.level(k).iter().enumerate().map(|(i, v)| space.weight(i) * v * v).sum();
                        time.weight(k) * inv_sq[k] * lvl
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    /// Both sides of the observability inequality for one terminal datum.
    pub fn observability_sample(&self, terminal: &[f64]) -> Result<ProbeSample> {
        let inv_sq = self.target_inv_sq()?;
        let pair = self.solve_adjoint(terminal)?;
        let lhs = h10_norm(&self.system().space(), &pair.phi_initial).powi(2) + self.weighted_theta_sq(&pair, &inv_sq);
        let rhs = self.leader_norm_sq(&self.leader_from_adjoint(&pair))?;
        Ok(ProbeSample { lhs, rhs, ratio: lhs / rhs })
    }

    /// Samples the ratio on random `H¹₀`-normalized data, then refines the maximum by power
    /// iteration on the assembled quadratic forms.
    pub fn observability_probe(&self, n_samples: usize, rng: &mut ChaCha8Rng) -> Result<ProbeReport> {
        if n_samples == 0 {
            return Err(Error::InvalidParameter("the probe needs at least one sample".into()));
        }
        let mut samples = Vec::with_capacity(n_samples);
        let mut data = Vec::with_capacity(n_samples);
        let mut skipped = 0;
        for _ in 0..n_samples {
            let t = self.random_terminal(rng);
            let s = self.observability_sample(&t)?;
            if s.rhs.is_nan() || s.rhs <= f64::MIN_POSITIVE * 1e10 || !s.ratio.is_finite() {
                skipped += 1;
                continue;
            }
            samples.push(s);
            data.push(t);
        }
        if samples.is_empty() {
            return Err(Error::InvalidParameter("every sample has a vanishing observation".into()));
        }
        let mut ratios: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
        let argmax = ratios.iter().enumerate().fold(0, |best, (i, r)| if *r > ratios[best] { i } else { best });
        ratios.sort_by(f64::total_cmp);
        let median = ratios[ratios.len() / 2];
        let refinement = self.refine(&data[argmax])?;
        Ok(ProbeReport {
            min: ratios[0],
            max: *ratios.last().expect("nonempty"),
            median,
            argmax,
            samples,
            skipped,
            refinement,
        })
    }

    /// Matrices of both quadratic forms in interior coordinates, then 20 steps of power
    /// iteration on `B⁺A` from `start`, `B⁺` being the pseudo-inverse of the observation form.
    fn refine(&self, start: &[f64]) -> Result<Vec<f64>> {
        let space = self.system().space();
        let n = space.n_interior();
        let inv_sq = self.target_inv_sq()?;
        let mut lhs_cols = Vec::with_capacity(n);
        let mut rhs_cols = Vec::with_capacity(n);
        for i in 1..=n {
            let mut e = vec![0.0; space.n_nodes()];
            e[i] = 1.0;
            let pair = self.solve_adjoint(&e)?;
            lhs_cols.push(self.lhs_features(&pair, &inv_sq));
            rhs_cols.push(self.rhs_features(&pair));
        }
        let a_f = DMatrix::from_columns(&lhs_cols);
        let b_f = DMatrix::from_columns(&rhs_cols);
        let a = a_f.transpose() * &a_f;
        let b = b_f.transpose() * &b_f;
        let eig = b.clone().symmetric_eigen();
        let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let inv = eig.eigenvalues.map(|l| if l > PSEUDO_INVERSE_CUTOFF * top { 1.0 / l } else { 0.0 });
        let b_pinv = &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose();
        let mut x = DVector::from_iterator(n, start[1..=n].iter().copied());
        let mut out = Vec::with_capacity(20);
        for _ in 0..20 {
            let y = &b_pinv * (&a * &x);
            let norm = y.norm();
            if !(norm > 0.0 && norm.is_finite()) {
                break;
            }
            x = y / norm;
            out.push(x.dot(&(&a * &x)) / x.dot(&(&b * &x)));
        }
        Ok(out)
    }

    /// Vector whose squared Euclidean norm is the left-hand side.
    fn lhs_features(&self, pair: &AdjointPair, inv_sq: &[f64]) -> DVector<f64> {
        let (space, time) = (self.system().space(), self.system().time());
        let dx = space.dx();
        let mut f: Vec<f64> = pair.phi_initial.windows(2).map(|w| (w[1] - w[0]) / dx.sqrt()).collect();
        for th in &pair.thetas {
            for (k, w) in inv_sq.iter().enumerate() {
                let c = (time.weight(k) * w).sqrt();
                for (i, v) in th.level(k).iter().enumerate() {
                    f.push(c * space.weight(i).sqrt() * v);
                }
            }
        }
        DVector::from_vec(f)
    }

    /// Vector whose squared Euclidean norm is the observation norm.
    fn rhs_features(&self, pair: &AdjointPair) -> DVector<f64> {
        let sys = self.system();
        let (space, time) = (sys.space(), sys.time());
        let mut f = Vec::new();
        match self.leader_from_adjoint(pair) {
            crate::follower::LeaderControl::Distributed(h) => {
                for k in 0..time.n_levels() {
                    for (v, m) in h.level(k).iter().zip(sys.omega_mask()) {
                        f.push((time.weight(k) * space.dx() * m).sqrt() * v);
                    }
                }
            }
            crate::follower::LeaderControl::Boundary(h) => {
                for s in sys.config().geometry.leader_boundary().sides() {
                    for k in 0..time.n_levels() {
                        f.push(time.weight(k).sqrt() * h[s][k]);
                    }
                }
            }
        }
        DVector::from_vec(f)
    }
}
