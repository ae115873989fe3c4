//! Bivariate orientation scores and the bootstrap structure probability.
//!
//! Two scorers compare the fits `effect ~ cause` in both directions:
//!
//! - [`Method::Anm`]: smoothing-spline residuals are tested for dependence
//!   on the putative cause with `|pearson| + dcor`; lower is better.
//! - [`Method::Regression`]: quadratic fits scored by `R² - |tau_b|`
//!   between residuals and cause; higher is better.
//!
//! Ties never favour `x -> y`.
//!
//! A fit whose residuals vanish (relative to the spread of the effect
//! variable) leaves residuals that are trivially independent of the cause;
//! every dependence statistic is then taken as 0.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::depstats::{distance_correlation, kendall_tau, pearson};
use crate::error::{Error, Result};
use crate::math::{abs, distinct_count, mean};
use crate::numkit::{poly2_fit, spline_fit};
use crate::synth::BivariateSample;

/// How many times a degenerate bootstrap resample is redrawn before the
/// iteration is counted as not favouring `x -> y`.
pub const MAX_REDRAWS: usize = 20;

const ANM_MIN_N: usize = 8;
const REGRESSION_MIN_N: usize = 6;
const MIN_DISTINCT: usize = 4;
/// Residual spread (relative to the effect's spread) treated as an exact fit.
const EXACT_FIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Anm,
    Regression,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Anm, Method::Regression];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Anm => "ANM",
            Method::Regression => "Regression",
        }
    }

    /// Accepts the display name or its lowercase form.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ANM" | "anm" => Some(Method::Anm),
            "Regression" | "regression" => Some(Method::Regression),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionScore {
    /// Score of `x -> y`.
    pub forward: f64,
    /// Score of `y -> x`.
    pub backward: f64,
    pub method: Method,
    pub favors_forward: bool,
}

impl DirectionScore {
    fn new(method: Method, forward: f64, backward: f64) -> Self {
        let favors_forward = match method {
            Method::Anm => forward < backward,
            Method::Regression => forward > backward,
        };
        DirectionScore {
            forward,
            backward,
            method,
            favors_forward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructurePosterior {
    /// Estimated probability of `x -> y`.
    pub p_forward: f64,
    pub bootstrap_count: usize,
    pub method: Method,
    /// Iterations that exhausted their redraws.
    pub degenerate_iterations: usize,
}

impl StructurePosterior {
    pub fn p_backward(&self) -> f64 {
        1.0 - self.p_forward
    }
}

fn spread(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|a| abs(a - m)).fold(0.0, f64::max)
}

fn exact_fit(residuals: &[f64], effect: &[f64]) -> bool {
    spread(residuals) <= EXACT_FIT_TOL * spread(effect)
}

fn check_support(sample: &BivariateSample, min_n: usize) -> Result<()> {
    if sample.len() < min_n {
        return Err(Error::InvalidArgument(
            "too few observations to score a direction",
        ));
    }
    for axis in [sample.x(), sample.y()] {
        match distinct_count(axis) {
            1 => return Err(Error::DegenerateInput("constant axis")),
            d if d < MIN_DISTINCT => {
                return Err(Error::DegenerateSupport(
                    "fewer than 4 distinct values on an axis",
                ))
            }
            _ => {}
        }
    }
    Ok(())
}

fn anm_direction(cause: &[f64], effect: &[f64]) -> Result<f64> {
    let fit = spline_fit(cause, effect)?;
    if exact_fit(&fit.residuals, effect) {
        return Ok(0.0);
    }
    let r = pearson(&fit.residuals, cause)?;
    let d = distance_correlation(&fit.residuals, cause)?;
    Ok(abs(r) + d)
}

fn regression_direction(cause: &[f64], effect: &[f64]) -> Result<f64> {
    let fit = poly2_fit(cause, effect)?;
    if exact_fit(&fit.residuals, effect) {
        return Ok(fit.r_squared);
    }
    let tau = kendall_tau(&fit.residuals, cause)?;
    Ok(fit.r_squared - abs(tau))
}

pub fn anm_score(sample: &BivariateSample) -> Result<DirectionScore> {
    check_support(sample, ANM_MIN_N)?;
    let forward = anm_direction(sample.x(), sample.y())?;
    let backward = anm_direction(sample.y(), sample.x())?;
    Ok(DirectionScore::new(Method::Anm, forward, backward))
}

pub fn regression_score(sample: &BivariateSample) -> Result<DirectionScore> {
    check_support(sample, REGRESSION_MIN_N)?;
    let forward = regression_direction(sample.x(), sample.y())?;
    let backward = regression_direction(sample.y(), sample.x())?;
    Ok(DirectionScore::new(Method::Regression, forward, backward))
}

pub fn score(sample: &BivariateSample, method: Method) -> Result<DirectionScore> {
    match method {
        Method::Anm => anm_score(sample),
        Method::Regression => regression_score(sample),
    }
}

/// Random stream for one bootstrap iteration: a ChaCha8 generator keyed by
/// `seed` on stream `iteration`, so iteration `i` draws the same indices no
/// matter which thread runs it or in what order.
pub fn iteration_rng(seed: u64, iteration: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(iteration);
    rng
}

/// `n` indices drawn uniformly with replacement.
pub fn resample_indices<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Outcome of one bootstrap iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BootstrapVote {
    Forward,
    NotForward,
    /// Every redraw was degenerate.
    Degenerate,
}

/// Runs bootstrap iteration `iteration`: resample, score, and redraw up to
/// [`MAX_REDRAWS`] times while the scorer rejects the resample.
pub fn bootstrap_vote(
    sample: &BivariateSample,
    method: Method,
    seed: u64,
    iteration: u64,
) -> BootstrapVote {
    let mut rng = iteration_rng(seed, iteration);
    for _ in 0..=MAX_REDRAWS {
        let idx = resample_indices(sample.len(), &mut rng);
        match score(&sample.select(&idx), method) {
            Ok(s) if s.favors_forward => return BootstrapVote::Forward,
            Ok(_) => return BootstrapVote::NotForward,
            Err(_) => continue,
        }
    }
    BootstrapVote::Degenerate
}

/// Folds per-iteration votes into a posterior estimate.
pub fn tally_votes<I: IntoIterator<Item = BootstrapVote>>(
    votes: I,
    method: Method,
) -> Result<StructurePosterior> {
    let (mut forward, mut total, mut degenerate) = (0usize, 0usize, 0usize);
    for v in votes {
        total += 1;
        match v {
            BootstrapVote::Forward => forward += 1,
            BootstrapVote::NotForward => {}
            BootstrapVote::Degenerate => degenerate += 1,
        }
    }
    if total == 0 {
        return Err(Error::InvalidArgument("bootstrap count must be at least 1"));
    }
    Ok(StructurePosterior {
        p_forward: forward as f64 / total as f64,
        bootstrap_count: total,
        method,
        degenerate_iterations: degenerate,
    })
}

/// Proportion of `m` pairs-bootstrap resamples whose score favours `x -> y`.
pub fn bootstrap_posterior(
    sample: &BivariateSample,
    method: Method,
    m: usize,
    seed: u64,
) -> Result<StructurePosterior> {
    if m == 0 {
        return Err(Error::InvalidArgument("bootstrap count must be at least 1"));
    }
    tally_votes(
        (0..m as u64).map(|i| bootstrap_vote(sample, method, seed, i)),
        method,
    )
}
