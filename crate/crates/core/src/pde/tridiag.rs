use crate::error::{Error, Result};

/// Pre-factored constant-coefficient symmetric tridiagonal matrix `tridiag(off, diag, off)`.
#[derive(Debug, Clone)]
pub struct ConstTridiag {
    off: f64,
    cprime: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl ConstTridiag {
    pub fn new(n: usize, diag: f64, off: f64) -> Result<Self> {
        let mut cprime = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let pivot = diag - off * prev;
            if pivot.abs() <= f64::EPSILON * diag.abs().max(off.abs()) {
                return Err(Error::InvalidParameter(format!("singular tridiagonal matrix at row {i}")));
            }
            inv_pivot[i] = 1.0 / pivot;
            cprime[i] = off * inv_pivot[i];
            prev = cprime[i];
        }
        Ok(Self { off, cprime, inv_pivot })
    }

    pub fn len(&self) -> usize {
        self.cprime.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cprime.is_empty()
    }

    /// Overwrites `rhs` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        let mut prev = 0.0;
        for (r, p) in rhs.iter_mut().zip(&self.inv_pivot) {
            *r = (*r - self.off * prev) * p;
            prev = *r;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            rhs[i] -= self.cprime[i] * rhs[i + 1];
        }
    }
}
