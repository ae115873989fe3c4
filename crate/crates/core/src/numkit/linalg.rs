//! Pivoted Householder least squares for small tall designs and the tridiagonal solve used by
//! the spline basis.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::sqrt;

/// Relative pivot threshold below which a design is treated as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Least-squares solution of `cols * b ≈ y` where `cols` holds the design
/// matrix column by column. Uses Householder QR with column pivoting on the
/// remaining column norms and fails when the design is numerically rank
/// deficient.
pub fn least_squares(mut cols: Vec<Vec<f64>>, y: &[f64]) -> Result<Vec<f64>> {
    let p = cols.len();
    let n = y.len();
    if p == 0 || cols.iter().any(|c| c.len() != n) || n < p {
        return Err(Error::InvalidArgument("design shape mismatch"));
    }
    let mut qty = Vec::from(y);
    let mut perm: Vec<usize> = (0..p).collect();
    let mut diag = vec![0.0; p];
    let mut lead = 0.0;

    for k in 0..p {
        // pivot on the largest remaining column norm
        let mut best = k;
        let mut best_norm = -1.0;
        for (j, col) in cols.iter().enumerate().skip(k) {
            let norm: f64 = col[k..].iter().map(|v| v * v).sum();
            if norm > best_norm {
                best_norm = norm;
                best = j;
            }
        }
        cols.swap(k, best);
        perm.swap(k, best);

        let norm = sqrt(best_norm.max(0.0));
        if k == 0 {
            lead = norm;
        }
        if norm == 0.0 || norm <= RANK_TOL * lead {
            return Err(Error::SingularDesign("design matrix is rank deficient"));
        }
        let alpha = if cols[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|a| a * a).sum();
        diag[k] = alpha;
        if vtv > 0.0 {
            for col in cols.iter_mut().skip(k + 1) {
                reflect(&v, vtv, &mut col[k..]);
            }
            reflect(&v, vtv, &mut qty[k..]);
        }
        cols[k][k] = alpha;
    }

    // back substitution on the upper-triangular factor
    let mut b = vec![0.0; p];
    for k in (0..p).rev() {
        let mut acc = qty[k];
        for j in k + 1..p {
            acc -= cols[j][k] * b[j];
        }
        b[k] = acc / diag[k];
    }
    let mut out = vec![0.0; p];
    for (k, &orig) in perm.iter().enumerate() {
        out[orig] = b[k];
    }
    Ok(out)
}

fn reflect(v: &[f64], vtv: f64, target: &mut [f64]) {
    let dot: f64 = v.iter().zip(target.iter()).map(|(a, b)| a * b).sum();
    let scale = 2.0 * dot / vtv;
    for (t, a) in target.iter_mut().zip(v) {
        *t -= scale * a;
    }
}

/// Solves a tridiagonal system with sub-diagonal `lower`, diagonal `diag`
/// and super-diagonal `upper` (Thomas algorithm, no pivoting; intended for
/// diagonally dominant systems).
pub fn tridiagonal_solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let m = diag.len();
    if m == 0 {
        return;
    }
    let mut c = vec![0.0; m];
    let mut denom = diag[0];
    if m > 1 {
        c[0] = upper[0] / denom;
    }
    rhs[0] /= denom;
    for i in 1..m {
        denom = diag[i] - lower[i - 1] * c[i - 1];
        if i + 1 < m {
            c[i] = upper[i] / denom;
        }
        rhs[i] = (rhs[i] - lower[i - 1] * rhs[i - 1]) / denom;
    }
    for i in (0..m - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}
