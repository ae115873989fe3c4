//! Regression toolkit: least-squares lines and quadratics, a penalised
//! cubic smoothing spline, prediction and central finite differences.

mod linalg;
mod regression;
mod spline;

pub use regression::{ols_fit, poly2_fit, LinearFit, PolyFit, VAR_EPS};
pub use spline::{
    lambda_grid, spline_fit, SmoothFit, LAMBDA_GRID_LEN, LAMBDA_MAX, LAMBDA_MIN, MAX_KNOTS,
    MIN_DISTINCT, MIN_OBSERVATIONS,
};

use crate::error::{Error, Result};
use crate::math::{sample_variance, sqrt};

/// A fitted univariate function.
pub trait Predict {
    fn predict(&self, x0: f64) -> f64;
}

pub fn predict<F: Predict + ?Sized>(fit: &F, x0: f64) -> f64 {
    fit.predict(x0)
}

/// Central difference `(f(x0 + h) - f(x0 - h)) / 2h`.
pub fn finite_diff_derivative<F: Predict + ?Sized>(fit: &F, x0: f64, h: f64) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(
            "finite-difference step must be positive",
        ));
    }
    Ok((fit.predict(x0 + h) - fit.predict(x0 - h)) / (2.0 * h))
}

/// Step used for derivative estimates: `max(1e-3, 1e-3 * sd(x))`.
pub fn default_step(x: &[f64]) -> f64 {
    let sd = if x.len() > 1 {
        sqrt(sample_variance(x))
    } else {
        0.0
    };
    f64::max(1e-3, 1e-3 * sd)
}
