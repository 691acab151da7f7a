use crate::error::{Error, Result};

/// History of a conjugate-gradient run.
#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome {
    pub solution: Vec<f64>,
    /// Residual `rhs - A x` recomputed from the operator at the solution.
    pub residual: Vec<f64>,
    pub iterations: usize,
    /// `‖r_k‖ / ‖rhs‖` before each iteration and after the last one.
    pub residual_trace: Vec<f64>,
    /// `½⟨Ax, x⟩ - ⟨rhs, x⟩` after each iteration (the starting value 0 first).
    pub energy_trace: Vec<f64>,
}

/// Conjugate gradient for a self-adjoint positive operator in the inner product `dot`.
/// Starts from zero and stops once `‖r‖ ≤ tol ‖rhs‖`.
pub fn conjugate_gradient(
    apply: &mut dyn FnMut(&[f64]) -> Result<Vec<f64>>,
    dot: &dyn Fn(&[f64], &[f64]) -> f64,
    rhs: &[f64],
    tol: f64,
    max_iterations: usize,
) -> Result<CgOutcome> {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let norm_b = dot(rhs, rhs).sqrt();
    let mut rr = dot(&r, &r);
    let mut residual_trace = vec![if norm_b > 0.0 { 1.0 } else { 0.0 }];
    let mut energy_trace = vec![0.0];
    if norm_b == 0.0 {
        return Ok(CgOutcome { solution: x, residual: r, iterations: 0, residual_trace, energy_trace });
    }
    let mut it = 0;
    while rr.sqrt() > tol * norm_b {
        if it == max_iterations {
            return Err(Error::CgStagnation { iterations: it, residual: rr.sqrt() / norm_b });
        }
        it += 1;
        let ap = apply(&p)?;
        let curv = dot(&p, &ap);
        if curv.is_nan() || curv <= 0.0 {
            return Err(Error::CgStagnation { iterations: it, residual: rr.sqrt() / norm_b });
        }
        let alpha = rr / curv;
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= alpha * api);
        let next = dot(&r, &r);
        p.iter_mut().zip(&r).for_each(|(pi, ri)| *pi = ri + (next / rr) * *pi);
        rr = next;
        residual_trace.push(rr.sqrt() / norm_b);
        let sum: Vec<f64> = rhs.iter().zip(&r).map(|(b, ri)| b + ri).collect();
        energy_trace.push(-0.5 * dot(&sum, &x));
    }
    let ax = apply(&x)?;
    let residual: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    Ok(CgOutcome { solution: x, residual, iterations: it, residual_trace, energy_trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_spd_system_and_energy_decreases() {
        let m = [[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]];
        let mut apply = |x: &[f64]| -> Result<Vec<f64>> { Ok((0..3).map(|i| (0..3).map(|j| m[i][j] * x[j]).sum()).collect()) };
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let out = conjugate_gradient(&mut apply, &dot, &[1.0, 2.0, 3.0], 1e-14, 10).unwrap();
        assert!(out.iterations <= 3);
        assert!(out.residual.iter().all(|r| r.abs() < 1e-13));
        assert!(out.energy_trace.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn zero_rhs_is_immediate() {
        let mut apply = |x: &[f64]| -> Result<Vec<f64>> { Ok(x.to_vec()) };
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let out = conjugate_gradient(&mut apply, &dot, &[0.0; 4], 1e-12, 5).unwrap();
        assert_eq!(out.iterations, 0);
        assert!(out.solution.iter().all(|&v| v == 0.0));
    }
}
