//! Decision rules under structural uncertainty.
//!
//! With an estimated effect `Ê(x)` under `x -> y` and no effect under
//! `y -> x`, the structure-specific optimal actions are `Ê(x) / (1 + 2λ)`
//! and `0`. Model selection (MS) commits to the structure with posterior at
//! least one half; model averaging (MA) weights both actions by their
//! posterior probabilities.

pub mod oracle;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numkit::{default_step, finite_diff_derivative, ols_fit, spline_fit};
use crate::synth::{BivariateSample, CausalStructure, DgpKind, EffectCurve, TabulatedCurve};

/// Cost-of-intervention parameter of the quadratic loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticLossParams {
    pub lambda: f64,
}

impl QuadraticLossParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument("lambda must be a finite value >= 0"));
        }
        Ok(QuadraticLossParams { lambda })
    }

    /// Curvature of the loss in the action, `1 + 2λ`.
    pub fn curvature(&self) -> f64 {
        1.0 + 2.0 * self.lambda
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionOutcome {
    pub actions_ms: Vec<f64>,
    pub actions_ma: Vec<f64>,
    pub actions_star: Vec<f64>,
    pub loss_ms: f64,
    pub loss_ma: f64,
    /// `loss_ms - loss_ma`; positive values favour averaging.
    pub delta_l: f64,
}

/// Minimiser of `0.5 (E - a)^2 + λ a^2`.
pub fn optimal_action(effect_value: f64, lambda: f64) -> f64 {
    effect_value / (1.0 + 2.0 * lambda)
}

/// Estimated marginal effect of `x` on `y` assuming `x -> y`: the OLS slope
/// for heteroskedastic data, spline derivatives at each observed `x` for
/// nonlinear data.
pub fn estimate_effect(sample: &BivariateSample, dgp_kind: DgpKind) -> Result<EffectCurve> {
    match dgp_kind {
        DgpKind::Heteroskedastic => {
            let fit = ols_fit(sample.x(), sample.y())?;
            Ok(EffectCurve::Constant(fit.slope))
        }
        DgpKind::Nonlinear => {
            let fit = spline_fit(sample.x(), sample.y())?;
            let h = default_step(sample.x());
            let points = sample
                .x()
                .iter()
                .map(|&xi| finite_diff_derivative(&fit, xi, h).map(|d| (xi, d)))
                .collect::<Result<Vec<_>>>()?;
            Ok(EffectCurve::Tabulated(TabulatedCurve::from_points(
                &points,
            )?))
        }
    }
}

/// Model-selection action at `x`.
pub fn ms_action(p_forward: f64, effect_hat: &EffectCurve, lambda: f64, x: f64) -> f64 {
    if p_forward >= 0.5 {
        optimal_action(effect_hat.eval(x), lambda)
    } else {
        0.0
    }
}

/// Model-averaging action at `x`.
pub fn ma_action(p_forward: f64, effect_hat: &EffectCurve, lambda: f64, x: f64) -> f64 {
    p_forward * optimal_action(effect_hat.eval(x), lambda) + (1.0 - p_forward) * 0.0
}

/// Per-individual loss `0.5 (a' - a*)^2 + λ a'^2`.
pub fn point_loss(a_prime: f64, a_star: f64, lambda: f64) -> f64 {
    let d = a_prime - a_star;
    0.5 * d * d + lambda * a_prime * a_prime
}

pub fn evaluate_decisions(
    sample: &BivariateSample,
    p_forward: f64,
    effect_hat: &EffectCurve,
    true_effect: &EffectCurve,
    true_structure: CausalStructure,
    lambda: f64,
) -> DecisionOutcome {
    let n = sample.len();
    let mut actions_ms = Vec::with_capacity(n);
    let mut actions_ma = Vec::with_capacity(n);
    let mut actions_star = Vec::with_capacity(n);
    let (mut sum_ms, mut sum_ma) = (0.0, 0.0);
    for &xi in sample.x() {
        let star = match true_structure {
            CausalStructure::Forward => optimal_action(true_effect.eval(xi), lambda),
            CausalStructure::Backward => 0.0,
        };
        let a_ms = ms_action(p_forward, effect_hat, lambda, xi);
        let a_ma = ma_action(p_forward, effect_hat, lambda, xi);
        sum_ms += point_loss(a_ms, star, lambda);
        sum_ma += point_loss(a_ma, star, lambda);
        actions_ms.push(a_ms);
        actions_ma.push(a_ma);
        actions_star.push(star);
    }
    let loss_ms = sum_ms / n as f64;
    let loss_ma = sum_ma / n as f64;
    DecisionOutcome {
        actions_ms,
        actions_ma,
        actions_star,
        loss_ms,
        loss_ma,
        delta_l: loss_ms - loss_ma,
    }
}

/// Binary-treatment loss `c a - b ATE a + η a`.
pub fn binary_treatment_loss(treat: bool, ate: f64, c: f64, b: f64, eta: f64) -> f64 {
    let a = if treat { 1.0 } else { 0.0 };
    c * a - b * ate * a + eta * a
}

/// Hard-threshold loss: 0 when `|ATE · a| > τ`, `M` otherwise.
pub fn threshold_loss(a: f64, ate: f64, tau: f64, m_penalty: f64) -> f64 {
    if crate::math::abs(ate * a) > tau {
        0.0
    } else {
        m_penalty
    }
}

/// Signed variant of [`threshold_loss`]: the intervention only counts when
/// it moves the outcome in the intended direction, `ATE · a > τ`.
pub fn directional_threshold_loss(a: f64, ate: f64, tau: f64, m_penalty: f64) -> f64 {
    if ate * a > tau {
        0.0
    } else {
        m_penalty
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn single(x: f64) -> BivariateSample {
        BivariateSample::new(vec![x], vec![0.0]).unwrap()
    }

    #[test]
    fn optimal_action_examples() {
        assert_eq!(optimal_action(0.0, 0.9), 0.0);
        assert_eq!(optimal_action(2.0, 0.0), 2.0);
        assert!((optimal_action(2.0, 0.1) - 2.0 / 1.2).abs() < 1e-15);
    }

    #[test]
    fn ms_rule() {
        assert_eq!(ms_action(0.49, &EffectCurve::Constant(1.0), 0.1, 3.0), 0.0);
        assert_eq!(ms_action(0.5, &EffectCurve::Constant(1.0), 0.0, -1.0), 1.0);
        let aff = EffectCurve::Affine {
            intercept: 2.0,
            slope: 1.0,
        };
        assert!((ms_action(1.0, &aff, 0.1, 1.0) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn ma_rule() {
        let c = EffectCurve::Constant(1.0);
        assert_eq!(ma_action(0.0, &c, 0.1, 0.0), 0.0);
        assert!((ma_action(0.6, &c, 0.1, 0.0) - 0.5).abs() < 1e-12);
        assert_eq!(ma_action(1.0, &c, 0.1, 2.0), ms_action(1.0, &c, 0.1, 2.0));
    }

    #[test]
    fn point_loss_examples() {
        assert_eq!(point_loss(0.7, 0.7, 0.0), 0.0);
        assert_eq!(point_loss(0.0, 1.0, 0.1), 0.5);
        assert_eq!(point_loss(1.0, 1.0, 0.9), 0.9);
    }

    #[test]
    fn evaluate_half_posterior_backward_truth() {
        let out = evaluate_decisions(
            &single(0.3),
            0.5,
            &EffectCurve::Constant(1.0),
            &EffectCurve::Zero,
            CausalStructure::Backward,
            0.0,
        );
        assert_eq!(out.loss_ms, 0.5);
        assert_eq!(out.loss_ma, 0.125);
        assert_eq!(out.delta_l, 0.375);
    }

    #[test]
    fn evaluate_certain_cases() {
        let s = BivariateSample::new(vec![-1.0, 0.0, 2.0], vec![0.0; 3]).unwrap();
        let e = EffectCurve::Affine {
            intercept: 2.0,
            slope: 1.0,
        };
        let out = evaluate_decisions(&s, 1.0, &e, &e, CausalStructure::Forward, 0.1);
        assert_eq!(out.delta_l, 0.0);
        let out = evaluate_decisions(
            &s,
            0.0,
            &e,
            &EffectCurve::Zero,
            CausalStructure::Backward,
            0.1,
        );
        assert_eq!((out.loss_ms, out.loss_ma, out.delta_l), (0.0, 0.0, 0.0));
    }

    #[test]
    fn estimate_effect_exact_line() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let s = BivariateSample::new(x, y).unwrap();
        match estimate_effect(&s, DgpKind::Heteroskedastic).unwrap() {
            EffectCurve::Constant(b) => assert!((b - 2.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        let curve = estimate_effect(&s, DgpKind::Nonlinear).unwrap();
        assert!((curve.eval(0.55) - 2.0).abs() < 1e-5);
    }

    #[test]
    fn estimate_effect_needs_data() {
        let s = BivariateSample::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            estimate_effect(&s, DgpKind::Heteroskedastic),
            Err(Error::InvalidArgument(_))
        ));
        assert!(estimate_effect(&s, DgpKind::Nonlinear).is_err());
    }

    #[test]
    fn binary_loss_examples() {
        assert_eq!(binary_treatment_loss(false, 3.0, 1.0, 2.0, 0.4), 0.0);
        assert_eq!(binary_treatment_loss(true, 1.0, 1.0, 2.0, 0.0), -1.0);
        assert_eq!(binary_treatment_loss(true, 0.0, 1.0, 2.0, 0.5), 1.5);
    }

    #[test]
    fn threshold_loss_examples() {
        assert_eq!(threshold_loss(0.0, 5.0, 1.0, 10.0), 10.0);
        assert_eq!(threshold_loss(2.0, 1.0, 1.0, 10.0), 0.0);
        assert_eq!(threshold_loss(-2.0, 1.0, 1.0, 10.0), 0.0);
        assert_eq!(directional_threshold_loss(-2.0, 1.0, 1.0, 10.0), 10.0);
        assert_eq!(directional_threshold_loss(2.0, 1.0, 1.0, 10.0), 0.0);
    }

    #[test]
    fn lambda_must_be_non_negative() {
        assert!(QuadraticLossParams::new(-0.1).is_err());
        assert!((QuadraticLossParams::new(0.9).unwrap().curvature() - 2.8).abs() < 1e-15);
    }
}
