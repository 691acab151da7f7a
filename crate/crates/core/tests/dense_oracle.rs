mod common;

use common::*;
use stackelberg_heat::follower::DenseOracle;
use stackelberg_heat::OptimalitySystem;

#[test]
fn picard_limit_matches_dense_solve_on_tiny_grids() {
    for (i, c) in ALL.into_iter().enumerate() {
        let mut r = rng(7 + i as u64);
        let cfg = random_scenario(c, 4, 4, &mut r);
        let p = params(2.0, 3.0);
        let sys = OptimalitySystem::new(cfg.clone(), p).unwrap();
        let h = random_leader(&sys, &mut r);
        let sol = sys.solve(&h).unwrap();
        let oracle = DenseOracle::new(cfg.clone(), p).unwrap();
        let dense = oracle.solve(&h, &cfg.data).unwrap();
        let dc = max_abs_diff(&sol.controls.to_vec(), &dense.controls.to_vec());
        let ds = max_abs_diff(sol.state.values(), dense.state.values());
        println!("{c:?}: iterations {} controls {dc:.3e} state {ds:.3e}", sol.iterations);
        assert!(dc <= 1e-10 && ds <= 1e-10, "{c:?}: {dc:.3e} {ds:.3e}");
    }
}
