//! Brute-force checks of the optimality of model averaging.
//!
//! Losses here are the structure-level loss `0.5 (E_i - a)^2 + λ a^2`, whose
//! posterior expectation is minimised exactly by the averaged action.

use alloc::vec::Vec;

use rand::Rng;

use super::{directional_threshold_loss, optimal_action, threshold_loss};
use crate::error::{Error, Result};
use crate::math::{abs, sqrt};

pub const ORACLE_GRID_POINTS: usize = 2001;

/// Loss of action `a` when the structure's marginal effect is `effect`.
pub fn structure_loss(a: f64, effect: f64, lambda: f64) -> f64 {
    let d = effect - a;
    0.5 * d * d + lambda * a * a
}

/// Uniform action grid over `±1.5 · max|a*_i|` (or `±1` when all are zero).
pub fn oracle_action_grid(optimal_actions: &[f64]) -> Vec<f64> {
    let span = optimal_actions.iter().map(|a| abs(*a)).fold(0.0, f64::max);
    let half = if span > 0.0 { 1.5 * span } else { 1.0 };
    let steps = (ORACLE_GRID_POINTS - 1) as f64;
    (0..ORACLE_GRID_POINTS)
        .map(|i| -half + 2.0 * half * i as f64 / steps)
        .collect()
}

/// Rows `[L(a, G1), L(a, G2)]` of the structure loss over `grid`.
pub fn quadratic_loss_table(grid: &[f64], effects: [f64; 2], lambda: f64) -> Vec<[f64; 2]> {
    grid.iter()
        .map(|&a| {
            [
                structure_loss(a, effects[0], lambda),
                structure_loss(a, effects[1], lambda),
            ]
        })
        .collect()
}

/// Exhaustive minimiser of `p L(a, G1) + (1 - p) L(a, G2)` over the grid.
/// Ties resolve to the first grid index.
pub fn posterior_expected_loss_argmin(
    loss_table: &[[f64; 2]],
    p_forward: f64,
    action_grid: &[f64],
) -> Result<(f64, f64)> {
    if action_grid.is_empty() {
        return Err(Error::InvalidArgument("action grid is empty"));
    }
    if loss_table.len() != action_grid.len() {
        return Err(Error::InvalidArgument(
            "loss table and action grid differ in length",
        ));
    }
    let mut best = (action_grid[0], f64::INFINITY);
    for (&a, row) in action_grid.iter().zip(loss_table) {
        let value = p_forward * row[0] + (1.0 - p_forward) * row[1];
        if value < best.1 {
            best = (a, value);
        }
    }
    Ok(best)
}

/// Mean and standard error of a stream of losses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskEstimate {
    pub mean: f64,
    pub se: f64,
}

#[derive(Default)]
struct Moments {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn estimate(&self) -> RiskEstimate {
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = if self.n > 1 {
            ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        RiskEstimate {
            mean,
            se: sqrt(var / n),
        }
    }
}

/// Frequentist risks of four rules under a well-specified hierarchical
/// model, together with paired differences `MA - rule`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskComparison {
    pub model_averaging: RiskEstimate,
    pub model_selection: RiskEstimate,
    pub always_act: RiskEstimate,
    pub never_act: RiskEstimate,
    pub ma_minus_ms: RiskEstimate,
    pub ma_minus_always: RiskEstimate,
    pub ma_minus_never: RiskEstimate,
}

impl RiskComparison {
    /// MA is no worse than each competitor within `k` standard errors of
    /// the paired difference.
    pub fn averaging_dominates(&self, k: f64) -> bool {
        [self.ma_minus_ms, self.ma_minus_always, self.ma_minus_never]
            .iter()
            .all(|d| d.mean <= k * d.se)
    }
}

/// Monte Carlo risk under the hierarchical model
///
/// 1. `G ~ Bernoulli(1/2)`;
/// 2. the data reduce to a posterior `p = P(G1 | D)` with density `2p` under
///    `G1` and `2(1 - p)` under `G2`, which makes `p` exactly calibrated;
/// 3. the structure-specific effects are known: `effects[0]` under `G1`,
///    `effects[1]` under `G2`.
pub fn hierarchical_risk<R: Rng + ?Sized>(
    effects: [f64; 2],
    lambda: f64,
    draws: usize,
    rng: &mut R,
) -> Result<RiskComparison> {
    if draws < 2 {
        return Err(Error::InvalidArgument("need at least two draws"));
    }
    let act = [
        optimal_action(effects[0], lambda),
        optimal_action(effects[1], lambda),
    ];
    let mut m = [
        Moments::default(),
        Moments::default(),
        Moments::default(),
        Moments::default(),
        Moments::default(),
        Moments::default(),
        Moments::default(),
    ];
    for _ in 0..draws {
        let forward = rng.random::<f64>() < 0.5;
        let root = sqrt(rng.random::<f64>());
        let p = if forward { root } else { 1.0 - root };
        let truth = if forward { effects[0] } else { effects[1] };

        let a_ma = p * act[0] + (1.0 - p) * act[1];
        let a_ms = if p >= 0.5 { act[0] } else { act[1] };
        let l_ma = structure_loss(a_ma, truth, lambda);
        let l_ms = structure_loss(a_ms, truth, lambda);
        let l_always = structure_loss(act[0], truth, lambda);
        let l_never = structure_loss(0.0, truth, lambda);
        m[0].push(l_ma);
        m[1].push(l_ms);
        m[2].push(l_always);
        m[3].push(l_never);
        m[4].push(l_ma - l_ms);
        m[5].push(l_ma - l_always);
        m[6].push(l_ma - l_never);
    }
    Ok(RiskComparison {
        model_averaging: m[0].estimate(),
        model_selection: m[1].estimate(),
        always_act: m[2].estimate(),
        never_act: m[3].estimate(),
        ma_minus_ms: m[4].estimate(),
        ma_minus_always: m[5].estimate(),
        ma_minus_never: m[6].estimate(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdRule {
    /// Loss avoided when `|ATE · a| > τ`.
    Magnitude,
    /// Loss avoided when `ATE · a > τ`.
    Directional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdDemo {
    pub draws: usize,
    pub ma_action: f64,
    pub ms_action: f64,
    pub ma_mean_loss: f64,
    pub ms_mean_loss: f64,
    /// Fraction of draws in which MA paid the penalty.
    pub ma_penalty_rate: f64,
    /// Fraction of draws in which MS paid nothing.
    pub ms_zero_rate: f64,
}

/// Hard-threshold example: structures with effects `+ate` and `-ate`, a
/// posterior of one half, and per-structure actions `±2τ/ate` that clear
/// the threshold. The true structure is drawn fairly on each draw.
pub fn threshold_demo<R: Rng + ?Sized>(
    ate: f64,
    tau: f64,
    m_penalty: f64,
    rule: ThresholdRule,
    draws: usize,
    rng: &mut R,
) -> Result<ThresholdDemo> {
    if !(tau > 0.0 && m_penalty > 0.0 && ate != 0.0) || draws == 0 {
        return Err(Error::InvalidArgument(
            "threshold demo needs tau, M, ate non-zero and draws > 0",
        ));
    }
    let p = 0.5;
    let effects = [ate, -ate];
    let actions = [2.0 * tau / ate, -2.0 * tau / ate];
    let ma = p * actions[0] + (1.0 - p) * actions[1];
    let ms = if p >= 0.5 { actions[0] } else { actions[1] };
    let loss = |a: f64, e: f64| match rule {
        ThresholdRule::Magnitude => threshold_loss(a, e, tau, m_penalty),
        ThresholdRule::Directional => directional_threshold_loss(a, e, tau, m_penalty),
    };
    let (mut ma_sum, mut ms_sum, mut ma_pen, mut ms_zero) = (0.0, 0.0, 0usize, 0usize);
    for _ in 0..draws {
        let truth = if rng.random::<f64>() < 0.5 {
            effects[0]
        } else {
            effects[1]
        };
        let l_ma = loss(ma, truth);
        let l_ms = loss(ms, truth);
        ma_sum += l_ma;
        ms_sum += l_ms;
        if l_ma == m_penalty {
            ma_pen += 1;
        }
        if l_ms == 0.0 {
            ms_zero += 1;
        }
    }
    let d = draws as f64;
    Ok(ThresholdDemo {
        draws,
        ma_action: ma,
        ms_action: ms,
        ma_mean_loss: ma_sum / d,
        ms_mean_loss: ms_sum / d,
        ma_penalty_rate: ma_pen as f64 / d,
        ms_zero_rate: ms_zero as f64 / d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn argmin_of_convex_combination() {
        // equal curvature, minima at 1 and 0: combined minimiser at p
        let grid = oracle_action_grid(&[1.0, 0.0]);
        let table = quadratic_loss_table(&grid, [1.0, 0.0], 0.0);
        let (a, _) = posterior_expected_loss_argmin(&table, 0.6, &grid).unwrap();
        let step = grid[1] - grid[0];
        assert!((a - 0.6).abs() <= step);
        let (a1, _) = posterior_expected_loss_argmin(&table, 1.0, &grid).unwrap();
        assert!((a1 - 1.0).abs() <= step);
    }

    #[test]
    fn argmin_rejects_empty_grid() {
        assert!(posterior_expected_loss_argmin(&[], 0.5, &[]).is_err());
    }

    #[test]
    fn argmin_first_index_tie_break() {
        let table = [[1.0, 1.0], [1.0, 1.0]];
        assert_eq!(
            posterior_expected_loss_argmin(&table, 0.3, &[-1.0, 1.0])
                .unwrap()
                .0,
            -1.0
        );
    }

    #[test]
    fn threshold_magnitude_rule_ms_never_pays() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = threshold_demo(1.0, 1.0, 10.0, ThresholdRule::Magnitude, 1000, &mut rng).unwrap();
        assert_eq!(d.ma_penalty_rate, 1.0);
        assert_eq!(d.ms_zero_rate, 1.0);
    }

    #[test]
    fn hierarchical_risk_needs_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(hierarchical_risk([2.0, 0.0], 0.1, 1, &mut rng).is_err());
    }
}
