//! Stretched-exponential decay classes of sequences and operators.
//!
//! A sequence (or the singular value sequence of a compact operator) lies in
//! the class of type `(a, alpha)` when `sup_n |x_n| exp(a n^alpha)` is
//! finite; that supremum is its gauge. This module evaluates gauges on
//! finite prefixes and implements the algebra the classes obey: two-sided
//! multiplication by bounded factors, sums, the eigenvalue rate transfer
//! `a -> a/(1+alpha)`, and the interleaving construction showing the sum
//! rate `(sum a_n^(-1/alpha))^(-alpha)` cannot be improved.

use crate::error::Error;
use crate::Result;
use serde::Serialize;

/// Membership data for a decay class: rate `a > 0`, stretching exponent
/// `alpha > 0` and the gauge value `sup_n |x_n| exp(a n^alpha)`.
///
/// A finite prefix cannot certify a supremum over all of `n`; `certified`
/// distinguishes closed-form (or otherwise tail-controlled) gauges from
/// prefix lower bounds. The value may be `f64::INFINITY`, recording
/// divergence observed on the prefix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentialGauge {
    pub rate: f64,
    pub alpha: f64,
    pub value: f64,
    pub certified: bool,
}

impl ExponentialGauge {
    pub fn new(rate: f64, alpha: f64, value: f64, certified: bool) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(Error::NonpositiveRate(rate));
        }
        if !(alpha > 0.0) {
            return Err(Error::NonpositiveExponent(alpha));
        }
        if value < 0.0 {
            return Err(Error::NegativeNorm(value));
        }
        Ok(ExponentialGauge {
            rate,
            alpha,
            value,
            certified,
        })
    }

    /// Pointwise decay bound implied by the gauge:
    /// `x_n <= value * exp(-rate * n^alpha)`.
    pub fn bound_at(&self, n: u64) -> f64 {
        self.value * (-self.rate * (n as f64).powf(self.alpha)).exp()
    }
}

/// A finite nonincreasing sequence of nonnegative reals, typically the
/// leading singular values (or eigenvalue moduli) of an operator.
///
/// `tail_certified` states that entries beyond the stored prefix are known
/// to be dominated by the stored ones, so prefix gauges are genuine gauges
/// rather than lower bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpectrum {
    values: Vec<f64>,
    pub tail_certified: bool,
}

impl FiniteSpectrum {
    pub fn new(values: Vec<f64>, tail_certified: bool) -> Result<Self> {
        for i in 0..values.len() {
            let v = values[i];
            if !(v >= 0.0) || (i > 0 && v > values[i - 1]) {
                return Err(Error::InvalidSpectrum(i));
            }
        }
        Ok(FiniteSpectrum {
            values,
            tail_certified,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Prefix gauge `max_{n <= N} x_n exp(a n^alpha)` of a finite spectrum.
///
/// The result is certified exactly when the spectrum's tail is; otherwise it
/// is a lower bound for the true gauge.
pub fn sequence_gauge(x: &FiniteSpectrum, a: f64, alpha: f64) -> Result<ExponentialGauge> {
    if !(a > 0.0) {
        return Err(Error::NonpositiveRate(a));
    }
    if !(alpha > 0.0) {
        return Err(Error::NonpositiveExponent(alpha));
    }
    let mut sup = 0.0f64;
    for (i, &v) in x.values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let n = (i + 1) as f64;
        let term = v * (a * n.powf(alpha)).exp();
        if term > sup {
            sup = term;
        }
    }
    ExponentialGauge::new(a, alpha, sup, x.tail_certified)
}

/// Gauge of a product `A B C` with bounded outer factors:
/// same class, value scaled by the operator norms.
pub fn compose_gauge(
    norm_left: f64,
    mid: &ExponentialGauge,
    norm_right: f64,
) -> Result<ExponentialGauge> {
    if norm_left < 0.0 {
        return Err(Error::NegativeNorm(norm_left));
    }
    if norm_right < 0.0 {
        return Err(Error::NegativeNorm(norm_right));
    }
    ExponentialGauge::new(
        mid.rate,
        mid.alpha,
        norm_left * mid.value * norm_right,
        mid.certified,
    )
}

/// Combined rate of a sum of N operators with rates `a_n` and common
/// exponent: `a' = (sum a_n^(-1/alpha))^(-alpha)`, which is `<= min(a_n)`.
pub fn sum_rate(rates: &[f64], alpha: f64) -> Result<f64> {
    if rates.is_empty() {
        return Err(Error::EmptyInput("rates"));
    }
    if !(alpha > 0.0) {
        return Err(Error::NonpositiveExponent(alpha));
    }
    for &a in rates {
        if !(a > 0.0) {
            return Err(Error::NonpositiveRate(a));
        }
    }
    if rates.len() == 1 {
        return Ok(rates[0]);
    }
    if rates.iter().all(|&a| a == rates[0]) {
        // N equal rates reduce algebraically to a * N^(-alpha).
        return Ok(rates[0] * (rates.len() as f64).powf(-alpha));
    }
    let sum: f64 = rates.iter().map(|&a| a.powf(-1.0 / alpha)).sum();
    Ok(sum.powf(-alpha))
}

/// Gauge of a sum of operators with common exponent: rate from [`sum_rate`],
/// value `N * max_n |A_n|`.
pub fn sum_gauge(gauges: &[ExponentialGauge]) -> Result<ExponentialGauge> {
    if gauges.is_empty() {
        return Err(Error::EmptyInput("gauges"));
    }
    let alpha = gauges[0].alpha;
    for g in gauges {
        if g.alpha != alpha {
            return Err(Error::MismatchedAlpha(alpha, g.alpha));
        }
    }
    let rates: Vec<f64> = gauges.iter().map(|g| g.rate).collect();
    let rate = sum_rate(&rates, alpha)?;
    let max = gauges.iter().map(|g| g.value).fold(0.0f64, f64::max);
    ExponentialGauge::new(
        rate,
        alpha,
        gauges.len() as f64 * max,
        gauges.iter().all(|g| g.certified),
    )
}

/// Eigenvalue rate transfer: singular values in class `(a, alpha)` force the
/// eigenvalue sequence into class `(a/(1+alpha), alpha)` with the same gauge
/// bound.
pub fn eigen_rate_transfer(g: &ExponentialGauge) -> ExponentialGauge {
    ExponentialGauge {
        rate: g.rate / (1.0 + g.alpha),
        alpha: g.alpha,
        value: g.value,
        certified: g.certified,
    }
}

/// Sharpness construction for the sum rate. With `sigma_n = exp(-a n^alpha)`
/// let `A = diag(sigma_1, 0, sigma_2, 0, ...)` and `B` its shift; both have
/// gauge 1 at `(a, alpha)`, while `A + B = diag(sigma_1, sigma_1, ...)`
/// leaves the class `(b, alpha)` for every `b > 2^(-alpha) a`.
///
/// Returns the sorted singular value prefixes of the `2m x 2m` truncations
/// of `A`, `B` and `A + B`.
pub fn interleave_counterexample(
    a: f64,
    alpha: f64,
    m: usize,
) -> Result<(FiniteSpectrum, FiniteSpectrum, FiniteSpectrum)> {
    if !(a > 0.0) {
        return Err(Error::NonpositiveRate(a));
    }
    if !(alpha > 0.0) {
        return Err(Error::NonpositiveExponent(alpha));
    }
    if m < 1 {
        return Err(Error::EmptyInput("interleave prefix"));
    }
    let sigma: Vec<f64> = (1..=m)
        .map(|n| (-a * (n as f64).powf(alpha)).exp())
        .collect();
    let mut single = sigma.clone();
    single.resize(2 * m, 0.0);
    let mut summed = Vec::with_capacity(2 * m);
    for &s in &sigma {
        summed.push(s);
        summed.push(s);
    }
    let a_spec = FiniteSpectrum::new(single.clone(), false)?;
    let b_spec = FiniteSpectrum::new(single, false)?;
    let sum_spec = FiniteSpectrum::new(summed, false)?;
    Ok((a_spec, b_spec, sum_spec))
}
