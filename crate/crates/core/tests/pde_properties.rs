use proptest::prelude::*;
use stackelberg_heat::pde::{
    h10_inner, inverse_laplacian, l2_q, l2_space, BoundaryPair, Forcing, SpaceTimeField, SpatialGrid, ThetaScheme, TimeGrid,
};

fn grids(n: usize, k: usize) -> (SpatialGrid, TimeGrid) {
    (SpatialGrid::new(1.0, n).unwrap(), TimeGrid::new(0.5, k).unwrap())
}

fn field(s: SpatialGrid, t: TimeGrid, v: &[f64]) -> SpaceTimeField {
    let mut f = SpaceTimeField::from_values(s, t, v.iter().cycle().take(s.n_nodes() * t.n_levels()).copied().collect()).unwrap();
    f.clear_boundary();
    f
}

fn trace(t: TimeGrid, v: &[f64], shift: usize) -> BoundaryPair {
    let mut b = BoundaryPair::zeros(t);
    for k in 0..t.n_levels() {
        b.left[k] = v[(k + shift) % v.len()];
        b.right[k] = v[(3 * k + shift + 1) % v.len()];
    }
    b
}

fn initial(s: SpatialGrid, v: &[f64]) -> Vec<f64> {
    let mut y: Vec<f64> = (0..s.n_nodes()).map(|i| v[i % v.len()]).collect();
    let last = y.len() - 1;
    y[0] = 0.0;
    y[last] = 0.0;
    y
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn data() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 7..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Summation by parts: ⟨c, S(y0, f, g)⟩ equals the pairing of the data with the transposed image.
    #[test]
    fn transpose_identity(n in 2usize..20, k in 2usize..20, theta in 0.5f64..=1.0, v in data(), w in data()) {
        let (s, t) = grids(n, k);
        let sch = ThetaScheme::new(s, t, theta).unwrap();
        let y0 = initial(s, &v);
        let forcing = Forcing { source: field(s, t, &v), boundary: trace(t, &w, 2) };
        let c = SpaceTimeField::from_values(s, t, w.iter().cycle().skip(1).take(s.n_nodes() * t.n_levels()).copied().collect()).unwrap();
        let u = sch.solve_forward(&y0, &forcing).unwrap();
        let img = sch.transpose(&c).unwrap();
        let lhs = dot(c.values(), u.values());
        let rhs = dot(&img.initial, &y0)
            + dot(img.forcing.source.values(), forcing.source.values())
            + dot(img.forcing.boundary.left.values(), forcing.boundary.left.values())
            + dot(img.forcing.boundary.right.values(), forcing.boundary.right.values());
        let scale = c.values().iter().zip(u.values()).map(|(a, b)| (a * b).abs()).sum::<f64>().max(1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{lhs} vs {rhs}");
    }

    /// Superposition: S(a·d1 + b·d2) = a·S(d1) + b·S(d2).
    #[test]
    fn superposition(n in 2usize..16, k in 2usize..16, a in -3.0f64..3.0, b in -3.0f64..3.0, v in data(), w in data()) {
        let (s, t) = grids(n, k);
        let sch = ThetaScheme::crank_nicolson(s, t).unwrap();
        let d1 = (initial(s, &v), Forcing { source: field(s, t, &w), boundary: trace(t, &v, 0) });
        let d2 = (initial(s, &w), Forcing { source: field(s, t, &v), boundary: trace(t, &w, 5) });
        let mut f = d1.1.clone();
        f.source = f.source.scaled(a);
        f.boundary = f.boundary.scaled(a);
        f.add_scaled(b, &d2.1);
        let y: Vec<f64> = d1.0.iter().zip(&d2.0).map(|(p, q)| a * p + b * q).collect();
        let combined = sch.solve_forward(&y, &f).unwrap();
        let mut expected = sch.solve_forward(&d1.0, &d1.1).unwrap().scaled(a);
        expected.add_scaled(b, &sch.solve_forward(&d2.0, &d2.1).unwrap());
        let scale = expected.max_abs().max(1.0);
        prop_assert!(combined.sub(&expected).max_abs() <= 1e-13 * scale);
    }

    /// Implicit Euler keeps nonnegative data nonnegative.
    #[test]
    fn implicit_euler_maximum_principle(n in 2usize..20, k in 2usize..20, v in prop::collection::vec(0.0f64..1.0, 7..40)) {
        let (s, t) = grids(n, k);
        let sch = ThetaScheme::new(s, t, 1.0).unwrap();
        let u = sch.solve_forward(&initial(s, &v), &Forcing { source: field(s, t, &v), boundary: trace(t, &v, 1) }).unwrap();
        prop_assert!(u.values().iter().all(|x| *x >= 0.0));
    }

    /// The trapezoid pairing is symmetric and bilinear.
    #[test]
    fn l2_pairing_symmetric(n in 2usize..12, k in 2usize..12, v in data(), w in data()) {
        let (s, t) = grids(n, k);
        let (f, g) = (field(s, t, &v), field(s, t, &w));
        prop_assert!((l2_q(&f, &g).unwrap() - l2_q(&g, &f).unwrap()).abs() < 1e-15);
        prop_assert!((l2_q(&f.scaled(2.0), &g).unwrap() - 2.0 * l2_q(&f, &g).unwrap()).abs() < 1e-14);
    }

    /// ⟨z, w⟩_{H¹₀} = ⟨u, w⟩ (interior sum) when −Δ_h z = u: the H⁻¹ norm is dual to H¹₀.
    #[test]
    fn inverse_laplacian_is_riesz_map(n in 2usize..30, v in data(), w in data()) {
        let s = SpatialGrid::new(1.0, n).unwrap();
        let (u, phi) = (initial(s, &v), initial(s, &w));
        let z = inverse_laplacian(&s, &u).unwrap();
        let lhs = h10_inner(&s, &z, &phi);
        let rhs = l2_space(&s, &u, &phi);
        prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
    }
}
