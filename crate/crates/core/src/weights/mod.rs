//! Carleman-type space–time weights, evaluated in log-space with saturation.

mod cutoff;
mod eta;

pub use cutoff::{bubble, l_bar, l_of_t, l_tilde};
pub use eta::{EtaFunction, EtaPair};

use crate::error::{Error, Result};
use crate::pde::{SpaceTimeField, TimeGrid};

/// Largest value ever returned; larger weights are reported as saturated.
pub const WEIGHT_CAP: f64 = 1e300;

fn log_cap() -> f64 {
    WEIGHT_CAP.ln()
}

/// `ln(e^a - e^b)` for `b ≤ a`, without forming either exponential.
fn log_gap(a: f64, b: f64) -> f64 {
    a + (-(b - a).exp_m1()).ln()
}

/// Profile used by a weight family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightProfile {
    Eta0(EtaFunction),
    Pair(EtaPair),
    Bar(EtaFunction),
}

/// Carleman parameters `(λ, s, m)` on the horizon `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec {
    pub lambda: f64,
    pub s: f64,
    pub m: u32,
    pub horizon: f64,
    pub profile: WeightProfile,
}

impl WeightSpec {
    pub fn new(lambda: f64, s: f64, m: u32, horizon: f64, profile: WeightProfile) -> Result<Self> {
        if !(lambda >= 1.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!("lambda must be at least 1, got {lambda}")));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!("s must be positive, got {s}")));
        }
        if m < 2 {
            return Err(Error::InvalidParameter(format!("m must be at least 2, got {m}")));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
        }
        Ok(Self { lambda, s, m, horizon, profile })
    }
}

/// A positive weight with its logarithm; `value` is capped at [`WEIGHT_CAP`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightValue {
    pub value: f64,
    pub log_value: f64,
    pub saturated: bool,
}

impl WeightValue {
    pub fn from_log(log_value: f64) -> Self {
        let cap = log_cap();
        if log_value > cap {
            Self { value: WEIGHT_CAP, log_value, saturated: true }
        } else {
            Self { value: log_value.exp(), log_value, saturated: false }
        }
    }
}

fn interior_time(t: f64, horizon: f64) -> Result<()> {
    if t > 0.0 && t < horizon {
        Ok(())
    } else {
        Err(Error::SingularTime { t })
    }
}

/// `α`, `ξ` and their extremal companions over the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaXi {
    pub alpha: WeightValue,
    pub xi: WeightValue,
    pub alpha_star: WeightValue,
    pub xi_star: WeightValue,
}

/// `α = (e^{2λ‖η‖} - e^{λη(x)}) / l^m(t)` and `ξ = e^{λη(x)} / l^m(t)`.
pub fn alpha_xi(spec: &WeightSpec, eta: &EtaFunction, x: f64, t: f64) -> Result<AlphaXi> {
    interior_time(t, spec.horizon)?;
    let log_den = spec.m as f64 * l_of_t(t, spec.horizon)?.ln();
    let lam = spec.lambda;
    let top = 2.0 * lam * eta.sup_norm();
    Ok(AlphaXi {
        alpha: WeightValue::from_log(log_gap(top, lam * eta.eval(x)) - log_den),
        xi: WeightValue::from_log(lam * eta.eval(x) - log_den),
        alpha_star: WeightValue::from_log(log_gap(top, lam * eta.min_value()) - log_den),
        xi_star: WeightValue::from_log(lam * eta.min_value() - log_den),
    })
}

/// `β`, `φ` built with `l̄⁴`, and their extremal companions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaPhi {
    pub beta: WeightValue,
    pub phi: WeightValue,
    pub beta_star: WeightValue,
    pub phi_star: WeightValue,
}

pub fn beta_weights(spec: &WeightSpec, eta: &EtaFunction, x: f64, t: f64) -> Result<BetaPhi> {
    if !(0.0..spec.horizon).contains(&t) {
        return Err(Error::SingularTime { t });
    }
    let log_den = 4.0 * l_bar(t, spec.horizon)?.ln();
    let lam = spec.lambda;
    let top = 2.0 * lam * eta.sup_norm();
    Ok(BetaPhi {
        beta: WeightValue::from_log(log_gap(top, lam * eta.eval(x)) - log_den),
        phi: WeightValue::from_log(lam * eta.eval(x) - log_den),
        beta_star: WeightValue::from_log(log_gap(top, lam * eta.min_value()) - log_den),
        phi_star: WeightValue::from_log(lam * eta.min_value() - log_den),
    })
}

/// `α̃ᵢ = (e^{λ(‖η₁‖+‖η₂‖)} - e^{ληᵢ}) / (t²(T-t)²)` and `ξ̃ᵢ = e^{ληᵢ} / (t²(T-t)²)`, `i = 1, 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairWeights {
    pub alpha: [WeightValue; 2],
    pub xi: [WeightValue; 2],
}

pub fn section3_weights(spec: &WeightSpec, pair: &EtaPair, x: f64, t: f64) -> Result<PairWeights> {
    interior_time(t, spec.horizon)?;
    let log_den = bubble(t, spec.horizon)?.ln();
    let lam = spec.lambda;
    let (n1, n2) = pair.sup_norms();
    let top = lam * (n1 + n2);
    let e = [pair.eta1(x), pair.eta2(x)];
    Ok(PairWeights {
        alpha: e.map(|v| WeightValue::from_log(log_gap(top, lam * v) - log_den)),
        xi: e.map(|v| WeightValue::from_log(lam * v - log_den)),
    })
}

/// `s ᾱ*(t)`; infinite at the endpoints.
fn rho_exponent(spec: &WeightSpec, eta_bar: &EtaFunction, t: f64) -> Result<f64> {
    let den = bubble(t, spec.horizon)?;
    let lam = spec.lambda;
    let num = log_gap(2.0 * lam * eta_bar.sup_norm(), lam * eta_bar.min_value()).exp();
    Ok(if den == 0.0 { f64::INFINITY } else { spec.s * num / den })
}

/// `ρ⋆(t) = exp(s ᾱ*(t) / 2)`, saturated near the endpoints.
pub fn rho_star(spec: &WeightSpec, eta_bar: &EtaFunction, t: f64) -> Result<WeightValue> {
    Ok(WeightValue::from_log(0.5 * rho_exponent(spec, eta_bar, t)?))
}

/// `ρ⋆(t)^{-2} = exp(-s ᾱ*(t))`, exactly zero on underflow and at the endpoints.
pub fn rho_star_inv_sq(spec: &WeightSpec, eta_bar: &EtaFunction, t: f64) -> Result<f64> {
    Ok((-rho_exponent(spec, eta_bar, t)?).exp())
}

/// Target weight `ϱ(t)` and its inverse square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetWeight {
    pub weight: WeightValue,
    pub inv_sq: f64,
}

/// `ϱ₁ = e^{sβ*}` for the `η⁰` profile, `ϱ₂ = e^{sβ̃₂*}` for the pair, `ϱ₃` (built like `ρ⋆` with the
/// `l̃` truncation) for `η̄`.
pub fn target_weight(spec: &WeightSpec, t: f64) -> Result<TargetWeight> {
    if !(0.0..spec.horizon).contains(&t) {
        return Err(Error::SingularTime { t });
    }
    let lam = spec.lambda;
    let exponent = match &spec.profile {
        WeightProfile::Eta0(eta) => {
            let num = log_gap(2.0 * lam * eta.sup_norm(), lam * eta.min_value()).exp();
            spec.s * num / l_bar(t, spec.horizon)?.powi(4)
        }
        WeightProfile::Pair(pair) => {
            let (n1, n2) = pair.sup_norms();
            let num = log_gap(lam * (n1 + n2), lam * pair.min_eta2()).exp();
            spec.s * num / l_tilde(t, spec.horizon)?
        }
        WeightProfile::Bar(eta) => {
            let num = log_gap(2.0 * lam * eta.sup_norm(), lam * eta.min_value()).exp();
            spec.s * num / l_tilde(t, spec.horizon)?
        }
    };
    Ok(TargetWeight { weight: WeightValue::from_log(exponent), inv_sq: (-2.0 * exponent).exp() })
}

/// `ln ∬ ϱ² |y_d|²` over the masked nodes, computed with log-sum-exp; `-∞` for a zero target.
/// The level `t = T`, where `ϱ` is infinite, contributes `+∞` unless the target vanishes there.
/// Levels where the stored target has underflowed to zero are dropped; use
/// [`log_weighted_separable`] when the target is known in log form.
pub fn log_weighted_target(spec: &WeightSpec, target: &SpaceTimeField, mask: &[f64]) -> Result<f64> {
    let time: TimeGrid = target.time();
    let dx = target.space().dx();
    let masses = (0..time.n_levels()).map(|k| {
        let mass: f64 = target.level(k).iter().zip(mask).map(|(v, m)| m * v * v).sum::<f64>() * dx;
        mass.ln()
    });
    weighted_sum(spec, time, masses)
}

/// Same integral for `y_d(x, t) = g(t)` on a set of measure `e^{log_area}`, given `ln|g|`.
pub fn log_weighted_separable(spec: &WeightSpec, time: TimeGrid, log_area: f64, log_amplitude: impl Fn(f64) -> f64) -> Result<f64> {
    weighted_sum(spec, time, (0..time.n_levels()).map(|k| log_area + 2.0 * log_amplitude(time.t(k))))
}

/// Log-sum-exp of `ϱ(t_k)² e^{m_k} w_k` from per-level log masses `m_k`.
fn weighted_sum(spec: &WeightSpec, time: TimeGrid, log_masses: impl Iterator<Item = f64>) -> Result<f64> {
    let last = time.n_steps();
    let mut terms = Vec::with_capacity(time.n_levels());
    for (k, m) in log_masses.enumerate() {
        if m == f64::NEG_INFINITY {
            continue;
        }
        if k == last {
            return Ok(f64::INFINITY);
        }
        let w = target_weight(spec, time.t(k))?;
        terms.push(2.0 * w.weight.log_value + m + time.weight(k).ln());
    }
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Ok(top);
    }
    Ok(top + terms.iter().map(|v| (v - top).exp()).sum::<f64>().ln())
}

/// Weighted target integral on a ladder of time refinements.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub n_steps: Vec<usize>,
    pub log_integrals: Vec<f64>,
    /// Every refinement is finite and the last change in log-space is below `ADMISSIBILITY_LOG_TOL`
    /// or has contracted by `ADMISSIBILITY_CONTRACTION` relative to the one before.
    pub admissible: bool,
}

/// Tolerance on the change of `ln ∬ ϱ²|y_d|²` between the last two refinements.
pub const ADMISSIBILITY_LOG_TOL: f64 = 0.05;

/// Largest ratio of successive log-space changes accepted as convergence.
pub const ADMISSIBILITY_CONTRACTION: f64 = 0.75;

/// Classifies a target from its log weighted integral on each number of time steps in `ladder`.
pub fn admissibility(ladder: &[usize], log_integral_at: impl FnMut(usize) -> Result<f64>) -> Result<AdmissibilityReport> {
    let log_integrals = ladder.iter().copied().map(log_integral_at).collect::<Result<Vec<_>>>()?;
    let admissible = match log_integrals.as_slice() {
        [.., b] if *b == f64::NEG_INFINITY => true,
        v if v.iter().any(|x| !x.is_finite()) => false,
        [.., a, b, c] => {
            let (before, last) = ((b - a).abs(), (c - b).abs());
            last <= ADMISSIBILITY_LOG_TOL || last <= ADMISSIBILITY_CONTRACTION * before
        }
        [a, b] => (b - a).abs() <= ADMISSIBILITY_LOG_TOL,
        [only] => *only < f64::INFINITY,
        [] => false,
    };
    Ok(AdmissibilityReport { n_steps: ladder.to_vec(), log_integrals, admissible })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::{BoundarySet, Side};

    fn spec(profile: WeightProfile) -> WeightSpec {
        WeightSpec::new(1.0, 1.0, 4, 1.0, profile).unwrap()
    }

    fn eta0() -> EtaFunction {
        EtaFunction::eta0(1.0, BoundarySet::LEFT).unwrap()
    }

    #[test]
    fn alpha_on_gamma_at_unit_cutoff() {
        let eta = eta0();
        let sp = WeightSpec::new(1.0, 1.0, 4, 4.0, WeightProfile::Eta0(eta)).unwrap();
        let w = alpha_xi(&sp, &eta, 0.0, 1.0).unwrap();
        assert!((w.alpha.value - (1f64.exp().powi(2) - 1.0)).abs() < 1e-13);
        assert!((w.xi.value - 1.0).abs() < 1e-14);
        assert_eq!(w.alpha.value, w.alpha_star.value);
    }

    #[test]
    fn endpoints_rejected_and_saturation_flagged() {
        let eta = eta0();
        let sp = spec(WeightProfile::Eta0(eta));
        assert!(alpha_xi(&sp, &eta, 0.3, 0.0).is_err());
        assert!(alpha_xi(&sp, &eta, 0.3, 1.0).is_err());
        let w = alpha_xi(&sp, &eta, 0.3, 1e-90).unwrap();
        assert!(w.alpha.saturated && w.alpha.value == WEIGHT_CAP);
        let b = beta_weights(&sp, &eta, 0.3, 1.0 - 1e-15).unwrap();
        assert!(b.beta.value > 1e50 && !b.beta.saturated);
        assert!(beta_weights(&sp, &eta, 0.3, 1.0).is_err());
    }

    #[test]
    fn beta_constant_on_first_half_and_below_alpha() {
        let eta = eta0();
        let sp = spec(WeightProfile::Eta0(eta));
        let b0 = beta_weights(&sp, &eta, 0.4, 0.0).unwrap().beta.value;
        for i in 1..=50 {
            let t = 0.5 * i as f64 / 50.0;
            assert_eq!(beta_weights(&sp, &eta, 0.4, t).unwrap().beta.value, b0);
        }
        for i in 1..200 {
            let t = i as f64 / 200.0;
            for j in 0..=20 {
                let x = j as f64 / 20.0;
                let a = alpha_xi(&sp, &eta, x, t).unwrap().alpha.log_value;
                let b = beta_weights(&sp, &eta, x, t).unwrap().beta.log_value;
                assert!(b <= a + 1e-12, "t={t} x={x}");
            }
        }
    }

    #[test]
    fn pair_weights_ordering() {
        let pair = EtaPair::new(1.0, Side::Left, 0.3, 0.4).unwrap();
        let sp = spec(WeightProfile::Pair(pair));
        let w = section3_weights(&sp, &pair, 0.6, 0.5).unwrap();
        assert_eq!(w.alpha[0].value, w.alpha[1].value);
        let w = section3_weights(&sp, &pair, 0.1, 0.5).unwrap();
        assert!(w.alpha[0].value < w.alpha[1].value);
        assert!(w.xi[1].value <= w.xi[0].value);
        assert!((bubble(0.5, 1.0).unwrap() - 1.0 / 16.0).abs() < 1e-16);
    }

    #[test]
    fn rho_star_limits_and_symmetry() {
        let bar = EtaFunction::bar(1.0, Side::Left);
        let sp = spec(WeightProfile::Bar(bar));
        assert_eq!(rho_star_inv_sq(&sp, &bar, 0.0).unwrap(), 0.0);
        assert_eq!(rho_star_inv_sq(&sp, &bar, 1.0).unwrap(), 0.0);
        for i in 1..50 {
            let t = i as f64 / 100.0;
            let a = rho_star_inv_sq(&sp, &bar, t).unwrap();
            let b = rho_star_inv_sq(&sp, &bar, 1.0 - t).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
        }
        let mid = rho_star(&sp, &bar, 0.5).unwrap();
        let expect = 0.5 * (1f64.exp().powi(2) - 1.0) * 16.0;
        assert!(!mid.saturated && (mid.log_value - expect).abs() < 1e-12);
        assert!(rho_star(&sp, &bar, 0.0).unwrap().saturated);
    }

    #[test]
    fn target_weight_a_constant_then_blowing_up() {
        let sp = spec(WeightProfile::Eta0(eta0()));
        let w0 = target_weight(&sp, 0.0).unwrap();
        assert!(w0.weight.value.is_finite() && !w0.weight.saturated);
        assert_eq!(target_weight(&sp, 0.37).unwrap().weight.value, w0.weight.value);
        assert!(target_weight(&sp, 0.999).unwrap().weight.saturated);
        assert!(target_weight(&sp, 1.0).is_err());
    }

    fn ladder_report(profile: WeightProfile, kappa: f64) -> AdmissibilityReport {
        use crate::follower::presets::vanishing_log_amplitude;
        let sp = spec(profile);
        admissibility(&[40, 80, 160], |n| {
            log_weighted_separable(&sp, TimeGrid::new(1.0, n)?, 0.4f64.ln(), vanishing_log_amplitude(0.5, kappa, 1.0))
        })
        .unwrap()
    }

    #[test]
    fn admissibility_separates_targets_around_the_threshold() {
        let threshold = 1f64.exp().powi(2) - 1.0;
        assert!(ladder_report(WeightProfile::Eta0(eta0()), 1.05 * threshold).admissible);
        let bad = ladder_report(WeightProfile::Eta0(eta0()), 0.5 * threshold);
        assert!(!bad.admissible, "{bad:?}");
        let bar = WeightProfile::Bar(EtaFunction::bar(1.0, Side::Left));
        assert!(ladder_report(bar, 0.1 * threshold).admissible);
    }

    #[test]
    fn separable_and_nodal_integrals_agree() {
        use crate::follower::presets::{vanishing_log_amplitude, vanishing_target};
        use crate::pde::{Region, SpatialGrid};
        let sp = spec(WeightProfile::Eta0(eta0()));
        let (space, time) = (SpatialGrid::new(1.0, 20).unwrap(), TimeGrid::new(1.0, 30).unwrap());
        let region = Region::new(0.4, 0.8).unwrap();
        let mask = region.mask(&space).unwrap();
        let kappa = 2.0 * (1f64.exp().powi(2) - 1.0);
        let nodal = log_weighted_target(&sp, &vanishing_target(space, time, &region, 0.5, kappa).unwrap(), &mask).unwrap();
        let area = (mask.iter().sum::<f64>() * space.dx()).ln();
        let separable = log_weighted_separable(&sp, time, area, vanishing_log_amplitude(0.5, kappa, 1.0)).unwrap();
        assert!((nodal - separable).abs() < 1e-12, "{nodal} vs {separable}");
    }
}
