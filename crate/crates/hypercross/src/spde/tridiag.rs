//! Thomas algorithm for tridiagonal systems.

use crate::error::{Error, Result};

/// Solves `lower[i]·x[i−1] + diag[i]·x[i] + upper[i]·x[i+1] = rhs[i]`.
///
/// `lower[0]` and `upper[n−1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::InvalidArgument("tridiagonal bands have different lengths".into()));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    for i in 0..n {
        if i > 0 {
            denom = diag[i] - lower[i] * c[i - 1];
        }
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Singular);
        }
        c[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        d[i] = if i == 0 { rhs[0] / denom } else { (rhs[i] - lower[i] * d[i - 1]) / denom };
    }
    let mut x = d;
    for i in (0..n.saturating_sub(1)).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}
