use proptest::prelude::*;
use stackelberg_heat::pde::{BoundarySet, Region, Side, SpatialGrid};
use stackelberg_heat::weights::{
    alpha_xi, beta_weights, l_of_t, rho_star_inv_sq, section3_weights, target_weight, EtaFunction, EtaPair, WeightProfile, WeightSpec,
};

fn eta0() -> EtaFunction {
    EtaFunction::eta0(1.0, BoundarySet::LEFT).unwrap()
}

fn spec(lambda: f64, s: f64, m: u32, profile: WeightProfile) -> WeightSpec {
    WeightSpec::new(lambda, s, m, 1.0, profile).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn weights_are_total_and_finite(
        lambda in 1.0f64..4.0, s in 1e-3f64..50.0, m in 2u32..8, x in 0.0f64..=1.0, t in 1e-9f64..(1.0 - 1e-9)
    ) {
        let sp = spec(lambda, s, m, WeightProfile::Eta0(eta0()));
        let a = alpha_xi(&sp, &eta0(), x, t).unwrap();
        for w in [a.alpha, a.xi, a.alpha_star, a.xi_star] {
            prop_assert!(w.value.is_finite() && !w.log_value.is_nan());
        }
        let b = beta_weights(&sp, &eta0(), x, t).unwrap();
        prop_assert!(b.beta.value.is_finite() && b.phi.value.is_finite());
        let pair = EtaPair::new(1.0, Side::Left, 0.3, 0.6).unwrap();
        let p = section3_weights(&spec(lambda, s, m, WeightProfile::Pair(pair)), &pair, x, t).unwrap();
        prop_assert!(p.alpha.iter().chain(&p.xi).all(|w| w.value.is_finite()));
        let bar = EtaFunction::bar(1.0, Side::Left);
        let r = rho_star_inv_sq(&spec(lambda, s, m, WeightProfile::Bar(bar)), &bar, t).unwrap();
        prop_assert!(r.is_finite() && (0.0..=1.0).contains(&r));
        let tw = target_weight(&sp, t).unwrap();
        prop_assert!(tw.weight.value.is_finite() && tw.inv_sq.is_finite());
    }

    /// `exp(−2sα)` strictly decreases in `s` at interior points (while representable).
    #[test]
    fn decay_monotone_in_s(s in 0.01f64..2.0, ds in 0.01f64..1.0, x in 0.05f64..0.95, t in 0.2f64..0.8) {
        let decay = |s: f64| {
            let sp = spec(1.0, s, 4, WeightProfile::Eta0(eta0()));
            (-2.0 * s * alpha_xi(&sp, &eta0(), x, t).unwrap().alpha.value).exp()
        };
        let (a, b) = (decay(s), decay(s + ds));
        prop_assert!(b < a || a == 0.0, "{a} {b}");
    }

    #[test]
    fn alpha_star_dominates(x in 0.0f64..=1.0, t in 0.01f64..0.99) {
        let a = alpha_xi(&spec(1.0, 1.0, 4, WeightProfile::Eta0(eta0())), &eta0(), x, t).unwrap();
        prop_assert!(a.alpha.value <= a.alpha_star.value * (1.0 + 1e-14));
        prop_assert!(a.xi.value >= a.xi_star.value * (1.0 - 1e-14));
    }

    #[test]
    fn rho_star_symmetric(t in 0.001f64..0.5, s in 0.001f64..0.05) {
        let bar = EtaFunction::bar(1.0, Side::Right);
        let sp = spec(1.0, s, 4, WeightProfile::Bar(bar));
        let (a, b) = (rho_star_inv_sq(&sp, &bar, t).unwrap(), rho_star_inv_sq(&sp, &bar, 1.0 - t).unwrap());
        prop_assert!(a == b || (a.ln() - b.ln()).abs() <= 1e-12 * a.ln().abs(), "{a} {b}");
    }

    #[test]
    fn cutoff_below_plateau(t in 0.0f64..=1.0) {
        prop_assert!(l_of_t(t, 1.0).unwrap() <= 5.0 / 16.0 + 1e-15);
    }

    /// Pair invariants for random block/observation layouts measured from either side.
    #[test]
    fn eta_pair_invariants(b in 0.05f64..0.45, gap in 0.02f64..0.3, w in 0.05f64..0.3, right in any::<bool>(), n in 10usize..200) {
        let c = b + gap;
        prop_assume!(c + w < 1.0);
        let (gamma, block, obs) = if right {
            (Side::Right, Region::new(1.0 - b, 1.0).unwrap(), Region::new(1.0 - c - w, 1.0 - c).unwrap())
        } else {
            (Side::Left, Region::new(0.0, b).unwrap(), Region::new(c, c + w).unwrap())
        };
        let pair = EtaPair::for_geometry(1.0, gamma, &[block], &obs).unwrap();
        let grid = SpatialGrid::new(1.0, n).unwrap();
        prop_assert!(pair.check(&grid, &[block], &obs).is_ok());
        let sp = spec(1.0, 1.0, 4, WeightProfile::Pair(pair));
        for i in 1..=n {
            let x = grid.x(i);
            let p = section3_weights(&sp, &pair, x, 0.5).unwrap();
            prop_assert!(p.alpha[0].value <= p.alpha[1].value * (1.0 + 1e-14));
            prop_assert!(p.xi[1].value <= p.xi[0].value * (1.0 + 1e-14));
            if x > obs.a && x < obs.b {
                prop_assert!((p.alpha[0].value - p.alpha[1].value).abs() <= 1e-12 * p.alpha[1].value);
            }
        }
    }
}

#[test]
fn alpha_equals_alpha_star_where_eta_vanishes() {
    let sp = spec(1.0, 1.0, 4, WeightProfile::Eta0(eta0()));
    for t in [0.1, 0.5, 0.9] {
        let a = alpha_xi(&sp, &eta0(), 0.0, t).unwrap();
        assert_eq!(a.alpha.value, a.alpha_star.value);
    }
}

#[test]
fn section3_denominator_at_half() {
    let pair = EtaPair::new(1.0, Side::Left, 0.3, 0.6).unwrap();
    let sp = spec(1.0, 1.0, 4, WeightProfile::Pair(pair));
    let xi = section3_weights(&sp, &pair, 1.0, 0.5).unwrap().xi[1];
    assert!((xi.value - 16.0).abs() < 1e-12);
}
