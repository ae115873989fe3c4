//! Synthetic bivariate data from the two competing structural models.
//!
//! Under [`CausalStructure::Forward`] the cause is stored in `x`; under
//! [`CausalStructure::Backward`] the exact same mechanism runs with the
//! roles of the axes swapped, so the cause lands in `y` and the true effect
//! of `x` on `y` is identically zero.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::math::abs;

/// Which of the two candidate graphs generated the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CausalStructure {
    /// `x -> y`
    Forward,
    /// `y -> x`
    Backward,
}

impl CausalStructure {
    /// Maps a uniform draw in `[0, 1)` to a structure; values below one half
    /// select [`CausalStructure::Forward`].
    pub fn from_uniform(u: f64) -> Self {
        if u < 0.5 {
            CausalStructure::Forward
        } else {
            CausalStructure::Backward
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CausalStructure::Forward => "forward",
            CausalStructure::Backward => "backward",
        }
    }

    pub fn is_forward(self) -> bool {
        self == CausalStructure::Forward
    }
}

/// Draws a structure with probability one half each.
pub fn draw_structure<R: Rng + ?Sized>(rng: &mut R) -> CausalStructure {
    CausalStructure::from_uniform(rng.random::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DgpKind {
    /// Linear mean, noise scale growing with `|cause|`.
    Heteroskedastic,
    /// Quadratic mean, homoskedastic noise.
    Nonlinear,
}

impl DgpKind {
    pub const ALL: [DgpKind; 2] = [DgpKind::Heteroskedastic, DgpKind::Nonlinear];

    pub fn as_str(self) -> &'static str {
        match self {
            DgpKind::Heteroskedastic => "heteroskedastic",
            DgpKind::Nonlinear => "nonlinear",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "heteroskedastic" => Some(DgpKind::Heteroskedastic),
            "nonlinear" => Some(DgpKind::Nonlinear),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EffectSize {
    Small,
    Large,
}

impl EffectSize {
    pub const ALL: [EffectSize; 2] = [EffectSize::Large, EffectSize::Small];

    pub fn as_str(self) -> &'static str {
        match self {
            EffectSize::Small => "small",
            EffectSize::Large => "large",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "small" => Some(EffectSize::Small),
            "large" => Some(EffectSize::Large),
            _ => None,
        }
    }
}

/// Parameters of one data-generating process.
///
/// The effect variable is `beta * c + gamma * c^2 + eps` for a standard
/// normal cause `c`. Noise scales are standard deviations: for the
/// heteroskedastic kind `sd = noise_base + noise_slope * |c|`, for the
/// nonlinear kind `sd = noise_sd`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgpSpec {
    pub kind: DgpKind,
    pub effect_size: EffectSize,
    pub beta: f64,
    pub gamma: f64,
    pub noise_base: f64,
    pub noise_slope: f64,
    pub noise_sd: f64,
}

impl DgpSpec {
    /// The standard parameterisation for a kind and effect size.
    pub fn new(kind: DgpKind, effect_size: EffectSize) -> Self {
        let (beta, gamma) = match (kind, effect_size) {
            (DgpKind::Heteroskedastic, EffectSize::Small) => (0.5, 0.0),
            (DgpKind::Heteroskedastic, EffectSize::Large) => (2.0, 0.0),
            (DgpKind::Nonlinear, EffectSize::Small) => (0.5, 0.1),
            (DgpKind::Nonlinear, EffectSize::Large) => (2.0, 0.5),
        };
        DgpSpec {
            kind,
            effect_size,
            beta,
            gamma,
            noise_base: 0.5,
            noise_slope: 0.3,
            noise_sd: 0.3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == DgpKind::Heteroskedastic && self.gamma != 0.0 {
            return Err(Error::InvalidArgument(
                "heteroskedastic DGP requires gamma = 0",
            ));
        }
        if !(self.beta.is_finite() && self.gamma.is_finite()) {
            return Err(Error::InvalidArgument("non-finite DGP coefficient"));
        }
        if !(self.noise_base >= 0.0 && self.noise_slope >= 0.0) {
            return Err(Error::InvalidArgument("noise scale must be non-negative"));
        }
        if !(self.noise_sd > 0.0) {
            return Err(Error::InvalidArgument("noise_sd must be positive"));
        }
        Ok(())
    }

    fn noise_scale(&self, cause: f64) -> f64 {
        match self.kind {
            DgpKind::Heteroskedastic => self.noise_base + self.noise_slope * abs(cause),
            DgpKind::Nonlinear => self.noise_sd,
        }
    }
}

/// Paired observations `(x_j, y_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateSample {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl BivariateSample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidArgument("x and y lengths differ"));
        }
        if x.is_empty() {
            return Err(Error::InvalidArgument("sample must be non-empty"));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("sample contains non-finite values"));
        }
        Ok(BivariateSample { x, y })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The same observations with the axes exchanged.
    pub fn swapped(&self) -> Self {
        BivariateSample {
            x: self.y.clone(),
            y: self.x.clone(),
        }
    }

    /// The rows selected by `indices` (repetition allowed).
    pub fn select(&self, indices: &[usize]) -> Self {
        BivariateSample {
            x: indices.iter().map(|&i| self.x[i]).collect(),
            y: indices.iter().map(|&i| self.y[i]).collect(),
        }
    }
}

/// Draws `n` observations. Each row consumes one normal draw for the cause
/// followed by one for the noise, so a fixed seed gives the same cause and
/// effect columns regardless of `structure`.
pub fn generate_sample<R: Rng + ?Sized>(
    spec: &DgpSpec,
    structure: CausalStructure,
    n: usize,
    rng: &mut R,
) -> Result<BivariateSample> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1"));
    }
    spec.validate()?;
    let mut cause = Vec::with_capacity(n);
    let mut effect = Vec::with_capacity(n);
    for _ in 0..n {
        let c: f64 = StandardNormal.sample(rng);
        let z: f64 = StandardNormal.sample(rng);
        cause.push(c);
        effect.push(spec.beta * c + spec.gamma * c * c + spec.noise_scale(c) * z);
    }
    let (x, y) = match structure {
        CausalStructure::Forward => (cause, effect),
        CausalStructure::Backward => (effect, cause),
    };
    Ok(BivariateSample { x, y })
}

/// A marginal causal effect `x -> E(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum EffectCurve {
    Zero,
    Constant(f64),
    Affine { intercept: f64, slope: f64 },
    Tabulated(TabulatedCurve),
}

impl EffectCurve {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            EffectCurve::Zero => 0.0,
            EffectCurve::Constant(c) => *c,
            EffectCurve::Affine { intercept, slope } => intercept + slope * x,
            EffectCurve::Tabulated(t) => t.eval(x),
        }
    }
}

/// Piecewise-linear curve through strictly increasing grid points, held
/// constant beyond the first and last point.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCurve {
    xs: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedCurve {
    /// Builds a curve from `(x, value)` pairs in any order. Pairs sharing an
    /// `x` are merged by averaging their values.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument(
                "tabulated curve needs at least one point",
            ));
        }
        if points.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "tabulated curve has non-finite points",
            ));
        }
        let mut sorted = Vec::from(points);
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut xs: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut i = 0;
        while i < sorted.len() {
            let x = sorted[i].0;
            let mut sum = 0.0;
            let mut count = 0usize;
            while i < sorted.len() && sorted[i].0 == x {
                sum += sorted[i].1;
                count += 1;
                i += 1;
            }
            xs.push(x);
            values.push(sum / count as f64);
        }
        Ok(TabulatedCurve { xs, values })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let last = self.xs.len() - 1;
        if x <= self.xs[0] {
            return self.values[0];
        }
        if x >= self.xs[last] {
            return self.values[last];
        }
        // first index with xs[idx] > x; 1 <= idx <= last here
        let idx = self.xs.partition_point(|&g| g <= x);
        let (x0, x1) = (self.xs[idx - 1], self.xs[idx]);
        let (v0, v1) = (self.values[idx - 1], self.values[idx]);
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }

    /// Exact integral of the interpolant over `[a, b]` (`a <= b`).
    fn integrate(&self, a: f64, b: f64) -> f64 {
        let mut nodes = Vec::with_capacity(self.xs.len() + 2);
        nodes.push(a);
        nodes.extend(self.xs.iter().copied().filter(|&g| g > a && g < b));
        nodes.push(b);
        nodes
            .windows(2)
            .map(|w| 0.5 * (w[1] - w[0]) * (self.eval(w[0]) + self.eval(w[1])))
            .sum()
    }
}

/// Ground-truth marginal effect of `x` on `y`.
pub fn true_marginal_effect(spec: &DgpSpec, structure: CausalStructure) -> EffectCurve {
    match (structure, spec.kind) {
        (CausalStructure::Backward, _) => EffectCurve::Zero,
        (CausalStructure::Forward, DgpKind::Heteroskedastic) => EffectCurve::Constant(spec.beta),
        (CausalStructure::Forward, DgpKind::Nonlinear) => EffectCurve::Affine {
            intercept: spec.beta,
            slope: 2.0 * spec.gamma,
        },
    }
}

/// `∫₀¹ E(x) dx`: closed form for the parametric curves, trapezoid rule on
/// the grid nodes for tabulated curves (exact for the linear interpolant).
pub fn ate_from_effect(curve: &EffectCurve) -> f64 {
    match curve {
        EffectCurve::Zero => 0.0,
        EffectCurve::Constant(c) => *c,
        EffectCurve::Affine { intercept, slope } => intercept + 0.5 * slope,
        EffectCurve::Tabulated(t) => t.integrate(0.0, 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_threshold_maps_to_structure() {
        assert_eq!(CausalStructure::from_uniform(0.3), CausalStructure::Forward);
        assert_eq!(
            CausalStructure::from_uniform(0.7),
            CausalStructure::Backward
        );
        assert_eq!(
            CausalStructure::from_uniform(0.5),
            CausalStructure::Backward
        );
    }

    #[test]
    fn structure_draws_are_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let forward = (0..10_000)
            .filter(|_| draw_structure(&mut rng) == CausalStructure::Forward)
            .count();
        let frac = forward as f64 / 10_000.0;
        assert!((0.48..=0.52).contains(&frac), "forward fraction {frac}");
    }

    #[test]
    fn zero_sample_size_is_rejected() {
        let spec = DgpSpec::new(DgpKind::Nonlinear, EffectSize::Small);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            generate_sample(&spec, CausalStructure::Forward, 0, &mut rng),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn backward_is_forward_with_axes_swapped() {
        let spec = DgpSpec::new(DgpKind::Heteroskedastic, EffectSize::Large);
        let fwd = generate_sample(
            &spec,
            CausalStructure::Forward,
            1000,
            &mut ChaCha8Rng::seed_from_u64(5),
        )
        .unwrap();
        let bwd = generate_sample(
            &spec,
            CausalStructure::Backward,
            1000,
            &mut ChaCha8Rng::seed_from_u64(5),
        )
        .unwrap();
        assert_eq!(fwd.swapped(), bwd);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let spec = DgpSpec::new(DgpKind::Nonlinear, EffectSize::Large);
        let a = generate_sample(
            &spec,
            CausalStructure::Forward,
            64,
            &mut ChaCha8Rng::seed_from_u64(9),
        );
        let b = generate_sample(
            &spec,
            CausalStructure::Forward,
            64,
            &mut ChaCha8Rng::seed_from_u64(9),
        );
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_spec_is_rejected() {
        let mut spec = DgpSpec::new(DgpKind::Heteroskedastic, EffectSize::Small);
        spec.gamma = 0.1;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn true_effects() {
        let s = DgpSpec::new(DgpKind::Heteroskedastic, EffectSize::Small);
        assert_eq!(
            true_marginal_effect(&s, CausalStructure::Forward),
            EffectCurve::Constant(0.5)
        );
        let l = DgpSpec::new(DgpKind::Nonlinear, EffectSize::Large);
        assert_eq!(
            true_marginal_effect(&l, CausalStructure::Forward).eval(1.0),
            3.0
        );
        for kind in DgpKind::ALL {
            for size in EffectSize::ALL {
                let spec = DgpSpec::new(kind, size);
                assert_eq!(
                    true_marginal_effect(&spec, CausalStructure::Backward),
                    EffectCurve::Zero
                );
            }
        }
    }

    #[test]
    fn ate_closed_forms() {
        assert_eq!(ate_from_effect(&EffectCurve::Constant(0.5)), 0.5);
        assert_eq!(
            ate_from_effect(&EffectCurve::Affine {
                intercept: 2.0,
                slope: 1.0
            }),
            2.5
        );
        assert_eq!(ate_from_effect(&EffectCurve::Zero), 0.0);
    }

    #[test]
    fn tabulated_interpolates_and_holds_endpoints() {
        let t = TabulatedCurve::from_points(&[(1.0, 3.0), (0.0, 1.0), (2.0, 3.0)]).unwrap();
        assert_eq!(t.eval(0.5), 2.0);
        assert_eq!(t.eval(-4.0), 1.0);
        assert_eq!(t.eval(9.0), 3.0);
        assert_eq!(t.eval(1.5), 3.0);
    }

    #[test]
    fn tabulated_merges_duplicate_x() {
        let t = TabulatedCurve::from_points(&[(0.0, 1.0), (0.0, 3.0), (1.0, 0.0)]).unwrap();
        assert_eq!(t.xs(), &[0.0, 1.0]);
        assert_eq!(t.values(), &[2.0, 0.0]);
    }

    #[test]
    fn tabulated_ate_matches_affine() {
        // the interpolant of an affine function over grid points spanning [0, 1]
        let pts: Vec<(f64, f64)> = (0..=10)
            .map(|i| {
                let x = -0.5 + 0.2 * i as f64;
                (x, 2.0 + x)
            })
            .collect();
        let t = EffectCurve::Tabulated(TabulatedCurve::from_points(&pts).unwrap());
        assert!((ate_from_effect(&t) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn tabulated_ate_with_constant_extension() {
        // E = 1 on [0, 0.5], then rises to 2 at x = 1 and beyond the grid
        // the held endpoint contributes nothing new. Integral = 0.5 + 0.75.
        let t = TabulatedCurve::from_points(&[(0.5, 1.0), (1.0, 2.0)]).unwrap();
        assert!((ate_from_effect(&EffectCurve::Tabulated(t)) - 1.25).abs() < 1e-12);
    }
}
