//! Thomas algorithm for tridiagonal systems.
//!
//! Row `i` reads `lower[i]·x[i−1] + diag[i]·x[i] + upper[i]·x[i+1] = rhs[i]`;
//! `lower[0]` and `upper[n−1]` are ignored.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("singular tridiagonal system: zero pivot in row {row}")]
pub struct SingularSystem {
    pub row: usize,
}

/// LU factors kept for repeated solves with the same matrix.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    lower: Vec<f64>,
    pivots: Vec<f64>,
    upper_scaled: Vec<f64>,
}

impl TridiagonalLu {
    pub fn factor(lower: &[f64], diag: &[f64], upper: &[f64]) -> Result<Self, SingularSystem> {
        let n = diag.len();
        assert!(lower.len() == n && upper.len() == n, "band lengths differ");
        let scale = diag
            .iter()
            .chain(lower.iter())
            .chain(upper.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()));
        let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
        let mut pivots = vec![0.0; n];
        let mut upper_scaled = vec![0.0; n];
        for i in 0..n {
            let p = if i == 0 {
                diag[0]
            } else {
                diag[i] - lower[i] * upper_scaled[i - 1]
            };
            if !(p.abs() > tiny) {
                return Err(SingularSystem { row: i });
            }
            pivots[i] = p;
            upper_scaled[i] = if i + 1 < n { upper[i] / p } else { 0.0 };
        }
        Ok(TridiagonalLu {
            lower: lower.to_vec(),
            pivots,
            upper_scaled,
        })
    }

    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(rhs.len(), n, "rhs length");
        let mut x = vec![0.0; n];
        for i in 0..n {
            let carry = if i == 0 { 0.0 } else { self.lower[i] * x[i - 1] };
            x[i] = (rhs[i] - carry) / self.pivots[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            x[i] -= self.upper_scaled[i] * x[i + 1];
        }
        x
    }
}

pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>, SingularSystem> {
    Ok(TridiagonalLu::factor(lower, diag, upper)?.solve(rhs))
}
