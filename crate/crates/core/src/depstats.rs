//! Dependence statistics used to score causal directions.

use alloc::vec;

use crate::error::{Error, Result};
use crate::math::{abs, mean, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DependenceKind {
    Pearson,
    KendallTau,
    DistanceCorrelation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DependenceScore {
    pub value: f64,
    pub kind: DependenceKind,
}

impl DependenceScore {
    pub fn compute(kind: DependenceKind, u: &[f64], v: &[f64]) -> Result<Self> {
        let value = match kind {
            DependenceKind::Pearson => pearson(u, v)?,
            DependenceKind::KendallTau => kendall_tau(u, v)?,
            DependenceKind::DistanceCorrelation => distance_correlation(u, v)?,
        };
        Ok(DependenceScore { value, kind })
    }
}

fn check_lengths(u: &[f64], v: &[f64], min: usize) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::InvalidArgument("inputs differ in length"));
    }
    if u.len() < min {
        return Err(Error::InvalidArgument("too few observations"));
    }
    Ok(())
}

/// Sample Pearson correlation.
pub fn pearson(u: &[f64], v: &[f64]) -> Result<f64> {
    check_lengths(u, v, 3)?;
    let (mu, mv) = (mean(u), mean(v));
    let mut suu = 0.0;
    let mut svv = 0.0;
    let mut suv = 0.0;
    for (a, b) in u.iter().zip(v) {
        let (da, db) = (a - mu, b - mv);
        suu += da * da;
        svv += db * db;
        suv += da * db;
    }
    if suu == 0.0 || svv == 0.0 {
        return Err(Error::DegenerateInput("constant input to pearson"));
    }
    Ok((suv / sqrt(suu * svv)).clamp(-1.0, 1.0))
}

/// Kendall's tau-b, by direct pair counting.
pub fn kendall_tau(u: &[f64], v: &[f64]) -> Result<f64> {
    check_lengths(u, v, 3)?;
    let n = u.len();
    let mut s: i64 = 0;
    let mut tied_u: u64 = 0;
    let mut tied_v: u64 = 0;
    for i in 0..n {
        let (ui, vi) = (u[i], v[i]);
        for j in i + 1..n {
            let du = ui - u[j];
            let dv = vi - v[j];
            if du == 0.0 {
                tied_u += 1;
            }
            if dv == 0.0 {
                tied_v += 1;
            }
            let prod = du * dv;
            if prod > 0.0 {
                s += 1;
            } else if prod < 0.0 {
                s -= 1;
            }
        }
    }
    let pairs = (n as u64) * (n as u64 - 1) / 2;
    let (du, dv) = (pairs - tied_u, pairs - tied_v);
    if du == 0 || dv == 0 {
        return Err(Error::DegenerateInput("all pairs tied in kendall_tau"));
    }
    Ok((s as f64 / sqrt(du as f64 * dv as f64)).clamp(-1.0, 1.0))
}

/// Biased (V-statistic) sample distance correlation.
///
/// Uses `Σ A_ij B_ij = Σ a_ij b_ij - 2n Σ ā_i b̄_i + n² ā b̄` for the
/// double-centred products, so only the row means are stored. Returns 0 when
/// either distance variance vanishes.
pub fn distance_correlation(u: &[f64], v: &[f64]) -> Result<f64> {
    check_lengths(u, v, 4)?;
    let n = u.len();
    let mut row_u = vec![0.0; n];
    let mut row_v = vec![0.0; n];
    let (mut s_uv, mut s_uu, mut s_vv) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (ui, vi) = (u[i], v[i]);
        let (mut acc_u, mut acc_v) = (0.0, 0.0);
        for j in i + 1..n {
            let a = abs(ui - u[j]);
            let b = abs(vi - v[j]);
            acc_u += a;
            acc_v += b;
            row_u[j] += a;
            row_v[j] += b;
            s_uv += a * b;
            s_uu += a * a;
            s_vv += b * b;
        }
        row_u[i] += acc_u;
        row_v[i] += acc_v;
    }
    let nf = n as f64;
    for r in row_u.iter_mut().chain(row_v.iter_mut()) {
        *r /= nf;
    }
    let (grand_u, grand_v) = (mean(&row_u), mean(&row_v));
    let centred = |s: f64, r1: &[f64], r2: &[f64], g1: f64, g2: f64| {
        let cross: f64 = r1.iter().zip(r2).map(|(a, b)| a * b).sum();
        (2.0 * s - 2.0 * nf * cross + nf * nf * g1 * g2) / (nf * nf)
    };
    let dcov = centred(s_uv, &row_u, &row_v, grand_u, grand_v);
    let dvar_u = centred(s_uu, &row_u, &row_u, grand_u, grand_u);
    let dvar_v = centred(s_vv, &row_v, &row_v, grand_v, grand_v);
    let scale_u = grand_u * grand_u;
    let scale_v = grand_v * grand_v;
    if dvar_u <= 1e-14 * scale_u || dvar_v <= 1e-14 * scale_v || dvar_u <= 0.0 || dvar_v <= 0.0 {
        return Ok(0.0);
    }
    let r2 = dcov / sqrt(dvar_u * dvar_v);
    Ok(sqrt(r2.clamp(0.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!(
            (pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-12
        );
    }

    #[test]
    fn pearson_rejects_constant() {
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn kendall_examples() {
        assert_eq!(
            kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(),
            1.0
        );
        let t = kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert!((t - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn kendall_rejects_all_tied() {
        assert!(matches!(
            kendall_tau(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn dcor_self_and_constant() {
        let u = [0.3, -1.2, 2.5, 0.0, 0.9, -0.4];
        assert!((distance_correlation(&u, &u).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(distance_correlation(&[1.0; 6], &u).unwrap(), 0.0);
    }

    #[test]
    fn dcor_affine_image_is_one() {
        let u = [0.3, -1.2, 2.5, 0.0, 0.9, -0.4, 1.7];
        let v: Vec<f64> = u.iter().map(|a| -3.0 * a + 2.0).collect();
        assert!((distance_correlation(&u, &v).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dcor_needs_four_points() {
        assert!(distance_correlation(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).is_err());
    }
}
