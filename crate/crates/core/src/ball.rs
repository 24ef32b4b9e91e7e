//! Exact singular value spectrum of the restriction operator between
//! harmonic Bergman spaces on concentric balls.
//!
//! For a ball `B` and a dilation factor `gamma > 1`, the restriction
//! `J: h2(B(gamma)) -> h2(B)` has singular values
//! `s_n = gamma^-(k + d/2)` where `k` is the degree block containing `n`.
//! The sequence decays at the stretched-exponential rate
//! `c = ((d-1)!/2)^(1/(d-1)) log(gamma)` with exponent `1/(d-1)`, and its
//! gauge at that rate equals `gamma^(-1/2)` exactly.

use crate::dims::{degree_of_index, h_dim, Dimension};
use crate::error::Error;
use crate::expo::{ExponentialGauge, FiniteSpectrum};
use crate::Result;
use serde::Serialize;

/// Stretched-exponential decay rate `((d-1)!/2)^(1/(d-1)) * log_gamma`.
///
/// Shared by the exact ball gauge and the covering bounds so that the
/// single-ball cover reproduces the exact rate bit for bit.
pub fn stretch_rate(d: Dimension, log_gamma: f64) -> f64 {
    let dm1 = d.as_f64() - 1.0;
    (factorial(d.get() - 1) / 2.0).powf(1.0 / dm1) * log_gamma
}

fn factorial(n: u32) -> f64 {
    (1..=u64::from(n)).map(|i| i as f64).product()
}

/// Pointwise decay bound `n -> prefactor * exp(-rate * n^alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayBound {
    pub prefactor: f64,
    pub rate: f64,
    pub alpha: f64,
}

impl DecayBound {
    pub fn new(prefactor: f64, rate: f64, alpha: f64) -> Result<Self> {
        if prefactor < 0.0 {
            return Err(Error::NegativeNorm(prefactor));
        }
        if !(rate > 0.0) {
            return Err(Error::NonpositiveRate(rate));
        }
        if !(alpha > 0.0) {
            return Err(Error::NonpositiveExponent(alpha));
        }
        Ok(DecayBound {
            prefactor,
            rate,
            alpha,
        })
    }

    pub fn eval(&self, n: u64) -> f64 {
        self.prefactor * (-self.rate * (n as f64).powf(self.alpha)).exp()
    }
}

/// The full (lazily indexed) singular value sequence of the concentric-ball
/// restriction operator, parameterized by `d` and `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactBallSpectrum {
    d: Dimension,
    gamma: f64,
}

impl ExactBallSpectrum {
    pub fn new(d: Dimension, gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) {
            return Err(Error::InvalidGamma(gamma));
        }
        Ok(ExactBallSpectrum { d, gamma })
    }

    pub fn dimension(&self) -> Dimension {
        self.d
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `s_n = gamma^-(k + d/2)`, evaluated as `exp(-(k + d/2) log gamma)`
    /// to avoid pow-loop error accumulation.
    pub fn singular_value(&self, n: u64) -> Result<f64> {
        let k = degree_of_index(self.d, n)?;
        Ok(self.log_singular_value_of_degree(k).exp())
    }

    /// Degree block of index `n`.
    pub fn degree_of(&self, n: u64) -> Result<u32> {
        degree_of_index(self.d, n)
    }

    fn log_singular_value_of_degree(&self, k: u32) -> f64 {
        -(f64::from(k) + self.d.as_f64() / 2.0) * self.gamma.ln()
    }

    /// The exact gauge: rate `c = ((d-1)!/2)^(1/(d-1)) log gamma`, exponent
    /// `1/(d-1)`, value `gamma^(-1/2)`. Certified: this is the supremum over
    /// the entire sequence, not a prefix estimate.
    pub fn gauge(&self) -> ExponentialGauge {
        let d = self.d.as_f64();
        ExponentialGauge {
            rate: stretch_rate(self.d, self.gamma.ln()),
            alpha: 1.0 / (d - 1.0),
            value: (-0.5 * self.gamma.ln()).exp(),
            certified: true,
        }
    }

    /// Limit of `log s_n / n^(1/(d-1))`.
    pub fn asymptotic_log_rate(&self) -> f64 {
        -stretch_rate(self.d, self.gamma.ln())
    }

    /// `max_{1 <= n <= n_max} log s_n + (n (d-1)!/2)^(1/(d-1)) log gamma`.
    ///
    /// Within a degree block the expression is maximized at the block's last
    /// index, so only block boundaries (plus `n_max` itself when it falls
    /// inside a block) are evaluated. The result never exceeds
    /// `-log(gamma)/2`.
    pub fn sup_log_defect(&self, n_max: u64) -> Result<f64> {
        if n_max < 1 {
            return Err(Error::InvalidIndex(n_max));
        }
        let mut sup = f64::NEG_INFINITY;
        let mut k: i64 = 0;
        loop {
            let h = h_dim(self.d, k)?;
            let n = h.min(n_max);
            let value = self.log_defect_at(n, k as u32);
            if value > sup {
                sup = value;
            }
            if h >= n_max {
                break;
            }
            k += 1;
        }
        Ok(sup)
    }

    fn log_defect_at(&self, n: u64, k: u32) -> f64 {
        let d = self.d.as_f64();
        let scaled = (n as f64) * factorial(self.d.get() - 1) / 2.0;
        self.log_singular_value_of_degree(k) + scaled.powf(1.0 / (d - 1.0)) * self.gamma.ln()
    }

    /// First `count` singular values as a finite spectrum. The tail is
    /// certified: every omitted entry is dominated by the stored ones and by
    /// the closed-form gauge.
    pub fn prefix(&self, count: usize) -> Result<FiniteSpectrum> {
        let values: Result<Vec<f64>> = (1..=count as u64).map(|n| self.singular_value(n)).collect();
        FiniteSpectrum::new(values?, true)
    }
}

/// `prod_k (x + a_k)^(1/d) - x` for nonnegative inputs; nondecreasing in `x`
/// and bounded above by the mean of the `a_k`.
pub fn product_gap(a: &[f64], x: f64) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptyInput("product factors"));
    }
    if a.iter().any(|&v| v < 0.0) || x < 0.0 {
        return Err(Error::NegativeInput("product_gap arguments"));
    }
    let d = a.len() as f64;
    // Geometric mean in log space; exact zero factor short-circuits.
    if a.iter().any(|&v| x + v == 0.0) {
        return Ok(-x);
    }
    let log_sum: f64 = a.iter().map(|&v| (x + v).ln()).sum();
    Ok((log_sum / d).exp() - x)
}

/// Limit of [`product_gap`] as `x -> infinity`: the arithmetic mean.
pub fn product_gap_limit(a: &[f64]) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptyInput("product factors"));
    }
    if a.iter().any(|&v| v < 0.0) {
        return Err(Error::NegativeInput("product_gap factors"));
    }
    Ok(a.iter().sum::<f64>() / a.len() as f64)
}
