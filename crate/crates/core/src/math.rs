// Float helpers that work without std.

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample variance with the `n - 1` denominator.
pub(crate) fn sample_variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
}

/// Number of distinct values (exact float equality).
pub(crate) fn distinct_count(v: &[f64]) -> usize {
    let mut sorted = alloc::vec::Vec::from(v);
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    sorted.len()
}
