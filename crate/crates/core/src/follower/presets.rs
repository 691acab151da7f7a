//! Ready-made scenarios on `Ω = (0, L)` used by the examples, the demo configs and the tests.

use crate::error::Result;
use crate::follower::scenario::{Configuration, Geometry, ProblemData, ScenarioConfig};
use crate::pde::{BoundarySet, Region, Side, SpaceTimeField, SpatialGrid, TimeGrid};
use crate::weights::{EtaFunction, EtaPair, WeightProfile, WeightSpec};

fn region(length: f64, a: f64, b: f64) -> Region {
    Region { a: a * length, b: b * length }
}

/// Standard geometry of each configuration, with regions given as fractions of `length`.
///
/// | | leader | follower(s) | observation |
/// |---|---|---|---|
/// | A | `ω = (0.2, 0.5)` | left end, disturbance in `Ω` | `(0.4, 0.8)` |
/// | B | left end | `B₁ = (0, 0.3)`, `B₂ = (0, 0.2)` | `(0.6, 0.9)` |
/// | C | left end | right end | `(0.4, 0.8)` |
/// | D | left end | right end, twice | `(0.3, 0.6)`, `(0.5, 0.9)` |
pub fn standard_geometry(configuration: Configuration, length: f64) -> Geometry {
    let r = |a, b| region(length, a, b);
    match configuration {
        Configuration::A => Geometry::A { omega: r(0.2, 0.5), follower: BoundarySet::LEFT, observation: r(0.4, 0.8) },
        Configuration::B => Geometry::B {
            leader: BoundarySet::LEFT,
            control: r(0.0, 0.3),
            disturbance: r(0.0, 0.2),
            observation: r(0.6, 0.9),
        },
        Configuration::C => Geometry::C { leader: BoundarySet::LEFT, follower: BoundarySet::RIGHT, observation: r(0.4, 0.8) },
        Configuration::D => Geometry::D {
            leader: BoundarySet::LEFT,
            followers: [BoundarySet::RIGHT, BoundarySet::RIGHT],
            observations: [r(0.3, 0.6), r(0.5, 0.9)],
        },
    }
}

/// Weight profile matching a geometry: `η⁰` vanishing on the follower boundary (A), the
/// `(η₁, η₂)` pair built from the blocks (B), `η̄` measured from the leader end (C, D).
pub fn standard_profile(geometry: &Geometry, length: f64) -> Result<WeightProfile> {
    let origin = |set: &BoundarySet| if set.contains(Side::Left) { Side::Left } else { Side::Right };
    Ok(match geometry {
        Geometry::A { follower, .. } => WeightProfile::Eta0(EtaFunction::eta0(length, *follower)?),
        Geometry::B { leader, control, disturbance, observation } => {
            WeightProfile::Pair(EtaPair::for_geometry(length, origin(leader), &[*control, *disturbance], observation)?)
        }
        Geometry::C { leader, .. } | Geometry::D { leader, .. } => WeightProfile::Bar(EtaFunction::bar(length, origin(leader))),
    })
}

/// `a · exp(κ (T^{-4} - (T-t)^{-4}))` on the region and zero elsewhere; equals `a` at `t = 0` and
/// vanishes to all orders at `t = T`.
pub fn vanishing_target(space: SpatialGrid, time: TimeGrid, region: &Region, amplitude: f64, kappa: f64) -> Result<SpaceTimeField> {
    let mask = region.mask(&space)?;
    let log_g = vanishing_log_amplitude(amplitude, kappa, time.horizon());
    let sign = amplitude.signum();
    Ok(SpaceTimeField::from_fn(space, time, |_, t| sign * log_g(t).exp()).masked(&mask))
}

/// `ln|a| + κ (T^{-4} - (T-t)^{-4})`, the logarithm of the [`vanishing_target`] profile, with `-∞` at `t = T`.
pub fn vanishing_log_amplitude(amplitude: f64, kappa: f64, horizon: f64) -> impl Fn(f64) -> f64 {
    let base = amplitude.abs().ln();
    move |t| {
        let rest = horizon - t;
        if rest <= 0.0 {
            f64::NEG_INFINITY
        } else {
            base + kappa * (horizon.powi(-4) - rest.powi(-4))
        }
    }
}

/// Smallest `κ` for which [`vanishing_target`] is weighted-admissible at `(λ, s)`, namely
/// `s (e^{2λ} - 1)`; any larger value works.
pub fn admissible_kappa(lambda: f64, s: f64) -> f64 {
    s * ((2.0 * lambda).exp() - 1.0)
}

/// Standard scenario with `y₀ = sin(πx/L)`, admissible vanishing targets of amplitude 0.5,
/// Crank–Nicolson and `(λ, s, m) = (1, 1, 4)`.
pub fn standard_scenario(configuration: Configuration, n_interior: usize, n_steps: usize) -> Result<ScenarioConfig> {
    let space = SpatialGrid::new(1.0, n_interior)?;
    let time = TimeGrid::new(1.0, n_steps)?;
    let geometry = standard_geometry(configuration, space.length());
    let weights = WeightSpec::new(1.0, 1.0, 4, time.horizon(), standard_profile(&geometry, space.length())?)?;
    let kappa = 1.05 * admissible_kappa(weights.lambda, weights.s);
    let initial = (0..space.n_nodes()).map(|i| (std::f64::consts::PI * space.x(i) / space.length()).sin()).collect();
    let targets = geometry
        .observations()
        .iter()
        .map(|r| vanishing_target(space, time, r, 0.5, kappa))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScenarioConfig { geometry, space, time, theta: 0.5, data: ProblemData { initial, targets }, weights })
}
