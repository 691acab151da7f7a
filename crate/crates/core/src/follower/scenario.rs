use crate::error::{Error, GeometryViolation, Result};
use crate::pde::{BoundarySet, Region, SpaceTimeField, SpatialGrid, TimeGrid};
use crate::weights::WeightSpec;

/// The four leader/follower arrangements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Configuration {
    /// Distributed leader on `ω`, boundary follower with a distributed disturbance.
    A,
    /// Boundary leader, follower and disturbance on interior blocks.
    B,
    /// Boundary leader and boundary follower, no disturbance.
    C,
    /// Boundary leader and two boundary followers in Nash equilibrium.
    D,
}

impl Configuration {
    pub fn letter(self) -> &'static str {
        match self {
            Self::A => "A",
            Self::B => "B",
            Self::C => "C",
            Self::D => "D",
        }
    }

    pub fn n_followers(self) -> usize {
        if self == Self::D {
            2
        } else {
            1
        }
    }
}

/// Regions and boundary sets of one configuration on `Ω = (0, L)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    A { omega: Region, follower: BoundarySet, observation: Region },
    B { leader: BoundarySet, control: Region, disturbance: Region, observation: Region },
    C { leader: BoundarySet, follower: BoundarySet, observation: Region },
    D { leader: BoundarySet, followers: [BoundarySet; 2], observations: [Region; 2] },
}

impl Geometry {
    pub fn configuration(&self) -> Configuration {
        match self {
            Self::A { .. } => Configuration::A,
            Self::B { .. } => Configuration::B,
            Self::C { .. } => Configuration::C,
            Self::D { .. } => Configuration::D,
        }
    }

    /// Observation set of each follower.
    pub fn observations(&self) -> Vec<Region> {
        match self {
            Self::A { observation, .. } | Self::B { observation, .. } | Self::C { observation, .. } => vec![*observation],
            Self::D { observations, .. } => observations.to_vec(),
        }
    }

    /// Leader boundary set (empty for the distributed leader).
    pub fn leader_boundary(&self) -> BoundarySet {
        match self {
            Self::A { .. } => BoundarySet::NONE,
            Self::B { leader, .. } | Self::C { leader, .. } | Self::D { leader, .. } => *leader,
        }
    }
}

/// Initial state and follower targets.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemData {
    pub initial: Vec<f64>,
    pub targets: Vec<SpaceTimeField>,
}

impl ProblemData {
    pub fn zeros(space: SpatialGrid, time: TimeGrid, n_followers: usize) -> Self {
        Self { initial: vec![0.0; space.n_nodes()], targets: vec![SpaceTimeField::zeros(space, time); n_followers] }
    }

    pub fn is_zero(&self) -> bool {
        self.initial.iter().all(|&v| v == 0.0) && self.targets.iter().all(|t| t.max_abs() == 0.0)
    }
}

/// A fully specified scenario: geometry, discretization, data and Carleman parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub geometry: Geometry,
    pub space: SpatialGrid,
    pub time: TimeGrid,
    pub theta: f64,
    pub data: ProblemData,
    pub weights: WeightSpec,
}

impl ScenarioConfig {
    pub fn configuration(&self) -> Configuration {
        self.geometry.configuration()
    }
}

fn violation(rule: &'static str, message: impl Into<String>) -> GeometryViolation {
    GeometryViolation { rule, message: message.into() }
}

fn inside(r: &Region, length: f64, name: &str, out: &mut Vec<GeometryViolation>) {
    if r.a < 0.0 || r.b > length || r.a >= r.b {
        out.push(violation("domain", format!("{name} = ({}, {}) is not a subinterval of (0, {length})", r.a, r.b)));
    }
}

/// Every geometric hypothesis violated by `geometry` on `(0, length)`.
pub fn geometry_violations(geometry: &Geometry, length: f64) -> Vec<GeometryViolation> {
    let mut out = Vec::new();
    match geometry {
        Geometry::A { omega, follower, observation } => {
            inside(omega, length, "ω", &mut out);
            inside(observation, length, "O_d", &mut out);
            if follower.is_empty() {
                out.push(violation("A: follower boundary", "the follower boundary set Γ is empty"));
            }
            if !omega.overlaps(observation) {
                out.push(violation(
                    "A: leader region meets the observation set (ω ∩ O_d ≠ ∅)",
                    format!("ω = ({}, {}) and O_d = ({}, {}) are disjoint", omega.a, omega.b, observation.a, observation.b),
                ));
            }
        }
        Geometry::B { leader, control, disturbance, observation } => {
            inside(control, length, "B_1", &mut out);
            inside(disturbance, length, "B_2", &mut out);
            inside(observation, length, "O_d", &mut out);
            if leader.left == leader.right {
                out.push(violation("B: localization", "the leader boundary Γ must be exactly one endpoint"));
            }
            for (name, blk) in [("B_1", control), ("B_2", disturbance)] {
                if blk.closure_meets(observation) {
                    out.push(violation(
                        "B: localization (closure of O_d disjoint from closure of B_i)",
                        format!("{name} = ({}, {}) touches O_d = ({}, {})", blk.a, blk.b, observation.a, observation.b),
                    ));
                }
                if (leader.left && blk.a != 0.0) || (leader.right && blk.b != length) {
                    out.push(violation(
                        "B: localization (Γ contained in the boundary of B_i)",
                        format!("{name} = ({}, {}) does not reach the leader endpoint", blk.a, blk.b),
                    ));
                }
            }
        }
        Geometry::C { leader, follower, observation } => {
            inside(observation, length, "O_d", &mut out);
            if leader.is_empty() || follower.is_empty() {
                out.push(violation("C: boundary sets", "Γ_1 and Γ_2 must be nonempty"));
            }
            if leader.intersects(follower) {
                out.push(violation("C: Γ_1 ∩ Γ_2 = ∅", "leader and follower share an endpoint"));
            }
        }
        Geometry::D { leader, followers, observations } => {
            for (i, o) in observations.iter().enumerate() {
                inside(o, length, if i == 0 { "O_1d" } else { "O_2d" }, &mut out);
            }
            if leader.is_empty() || followers.iter().any(BoundarySet::is_empty) {
                out.push(violation("D: boundary sets", "Γ, Γ_1 and Γ_2 must be nonempty"));
            }
            for (i, f) in followers.iter().enumerate() {
                if leader.intersects(f) {
                    out.push(violation("D: Γ ∩ Γ_i = ∅", format!("leader shares an endpoint with follower {}", i + 1)));
                }
            }
        }
    }
    out
}

/// Checks the configuration's geometric hypotheses and that every region holds at least one node.
pub fn validate_config(cfg: &ScenarioConfig) -> Result<()> {
    let length = cfg.space.length();
    let mut out = geometry_violations(&cfg.geometry, length);
    let mut regions: Vec<(&str, Region)> = cfg.geometry.observations().into_iter().map(|r| ("observation", r)).collect();
    match &cfg.geometry {
        Geometry::A { omega, .. } => regions.push(("ω", *omega)),
        Geometry::B { control, disturbance, .. } => {
            regions.push(("B_1", *control));
            regions.push(("B_2", *disturbance));
        }
        _ => {}
    }
    for (name, r) in regions {
        if r.a < r.b && r.mask(&cfg.space).is_err() {
            out.push(violation("grid", format!("{name} = ({}, {}) contains no interior node", r.a, r.b)));
        }
    }
    let n_targets = cfg.configuration().n_followers();
    if cfg.data.targets.len() != n_targets {
        out.push(violation("data", format!("expected {n_targets} target field(s), got {}", cfg.data.targets.len())));
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(Error::Geometry(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: f64, b: f64) -> Region {
        Region::new(a, b).unwrap()
    }

    #[test]
    fn a_overlap_rule() {
        let ok = Geometry::A { omega: r(0.2, 0.5), follower: BoundarySet::LEFT, observation: r(0.4, 0.8) };
        assert!(geometry_violations(&ok, 1.0).is_empty());
        let bad = Geometry::A { omega: r(0.1, 0.3), follower: BoundarySet::LEFT, observation: r(0.5, 0.9) };
        let v = geometry_violations(&bad, 1.0);
        assert_eq!(v.len(), 1);
        assert!(v[0].rule.contains("ω ∩ O_d ≠ ∅"));
    }

    #[test]
    fn b_localization() {
        let ok = Geometry::B {
            leader: BoundarySet::LEFT,
            control: r(0.0, 0.3),
            disturbance: r(0.0, 0.3),
            observation: r(0.6, 0.9),
        };
        assert!(geometry_violations(&ok, 1.0).is_empty());
        let bad = Geometry::B {
            leader: BoundarySet::LEFT,
            control: r(0.1, 0.7),
            disturbance: r(0.0, 0.3),
            observation: r(0.6, 0.9),
        };
        assert_eq!(geometry_violations(&bad, 1.0).len(), 2);
    }

    #[test]
    fn c_and_d_disjoint_boundaries() {
        let bad = Geometry::C { leader: BoundarySet::LEFT, follower: BoundarySet::ALL, observation: r(0.3, 0.6) };
        assert_eq!(geometry_violations(&bad, 1.0).len(), 1);
        let ok = Geometry::D {
            leader: BoundarySet::LEFT,
            followers: [BoundarySet::RIGHT, BoundarySet::RIGHT],
            observations: [r(0.2, 0.5), r(0.5, 0.9)],
        };
        assert!(geometry_violations(&ok, 1.0).is_empty());
    }
}
