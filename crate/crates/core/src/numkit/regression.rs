use alloc::vec;
use alloc::vec::Vec;

use super::linalg::least_squares;
use super::Predict;
use crate::error::{Error, Result};
use crate::math::mean;

/// Minimum sample variance of the regressor for a non-degenerate line fit.
pub const VAR_EPS: f64 = 1e-12;

/// Straight-line least-squares fit `y ≈ intercept + slope * x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub slope: f64,
    pub residuals: Vec<f64>,
    pub r_squared: f64,
    /// Set when the response has zero total variation; `r_squared` is then 0.
    pub degenerate: bool,
}

impl LinearFit {
    /// A fit with the given coefficients and no data attached.
    pub fn from_coefficients(intercept: f64, slope: f64) -> Self {
        LinearFit {
            intercept,
            slope,
            residuals: Vec::new(),
            r_squared: 0.0,
            degenerate: false,
        }
    }
}

impl Predict for LinearFit {
    fn predict(&self, x0: f64) -> f64 {
        self.intercept + self.slope * x0
    }
}

/// Quadratic least-squares fit `y ≈ c0 + c1 x + c2 x^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    pub coeffs: [f64; 3],
    pub residuals: Vec<f64>,
    pub r_squared: f64,
    pub degenerate: bool,
}

impl PolyFit {
    pub fn from_coefficients(coeffs: [f64; 3]) -> Self {
        PolyFit {
            coeffs,
            residuals: Vec::new(),
            r_squared: 0.0,
            degenerate: false,
        }
    }
}

impl Predict for PolyFit {
    fn predict(&self, x0: f64) -> f64 {
        let [c0, c1, c2] = self.coeffs;
        c0 + x0 * (c1 + x0 * c2)
    }
}

fn check_pair(x: &[f64], y: &[f64], min_len: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("x and y lengths differ"));
    }
    if x.len() < min_len {
        return Err(Error::InvalidArgument("too few observations for this fit"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite observation"));
    }
    Ok(())
}

/// `(r_squared, degenerate)` from residuals against the response.
pub(crate) fn r_squared(y: &[f64], residuals: &[f64]) -> (f64, bool) {
    let my = mean(y);
    let sst: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    let scale = y.iter().map(|v| v * v).sum::<f64>();
    if sst <= 1e-28 * scale.max(f64::MIN_POSITIVE) || sst == 0.0 {
        return (0.0, true);
    }
    ((1.0 - ssr / sst).clamp(0.0, 1.0), false)
}

pub fn ols_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    check_pair(x, y, 3)?;
    let mx = mean(x);
    let centered: Vec<f64> = x.iter().map(|v| v - mx).collect();
    let var = centered.iter().map(|v| v * v).sum::<f64>() / (x.len() as f64 - 1.0);
    if var <= VAR_EPS {
        return Err(Error::SingularDesign("regressor has (near) zero variance"));
    }
    let b = least_squares(vec![vec![1.0; x.len()], centered.clone()], y)?;
    let residuals: Vec<f64> = centered
        .iter()
        .zip(y)
        .map(|(c, v)| v - (b[0] + b[1] * c))
        .collect();
    let (r_squared, degenerate) = r_squared(y, &residuals);
    Ok(LinearFit {
        intercept: b[0] - b[1] * mx,
        slope: b[1],
        residuals,
        r_squared,
        degenerate,
    })
}

pub fn poly2_fit(x: &[f64], y: &[f64]) -> Result<PolyFit> {
    check_pair(x, y, 4)?;
    let mx = mean(x);
    let centered: Vec<f64> = x.iter().map(|v| v - mx).collect();
    let squared: Vec<f64> = centered.iter().map(|v| v * v).collect();
    let a = least_squares(vec![vec![1.0; x.len()], centered.clone(), squared], y)?;
    let residuals: Vec<f64> = centered
        .iter()
        .zip(y)
        .map(|(c, v)| v - (a[0] + c * (a[1] + c * a[2])))
        .collect();
    let (r_squared, degenerate) = r_squared(y, &residuals);
    // back to the raw-x parameterisation
    let coeffs = [
        a[0] - a[1] * mx + a[2] * mx * mx,
        a[1] - 2.0 * a[2] * mx,
        a[2],
    ];
    Ok(PolyFit {
        coeffs,
        residuals,
        r_squared,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let fit = ols_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_regressor_is_singular() {
        assert!(matches!(
            ols_fit(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::SingularDesign(_))
        ));
    }

    #[test]
    fn line_needs_three_points() {
        assert!(matches!(
            ols_fit(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn exact_quadratic() {
        let x = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let y: Vec<f64> = x.iter().map(|v| 1.0 + 2.0 * v + 0.5 * v * v).collect();
        let fit = poly2_fit(&x, &y).unwrap();
        for (c, e) in fit.coeffs.iter().zip([1.0, 2.0, 0.5]) {
            assert!((c - e).abs() < 1e-12);
        }
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_response_gives_zero_r_squared() {
        let x = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let fit = poly2_fit(&x, &[4.0; 5]).unwrap();
        assert!(fit.coeffs[1].abs() < 1e-12 && fit.coeffs[2].abs() < 1e-12);
        assert_eq!(fit.r_squared, 0.0);
        assert!(fit.degenerate);
    }

    #[test]
    fn quadratic_needs_three_distinct_points() {
        let x = [0.0, 0.0, 1.0, 1.0];
        assert!(matches!(
            poly2_fit(&x, &[1.0, 2.0, 3.0, 4.0]),
            Err(Error::SingularDesign(_))
        ));
    }

    #[test]
    fn predictions() {
        assert_eq!(LinearFit::from_coefficients(1.0, 2.0).predict(3.0), 7.0);
        assert_eq!(
            PolyFit::from_coefficients([1.0, 2.0, 0.5]).predict(2.0),
            7.0
        );
    }
}
