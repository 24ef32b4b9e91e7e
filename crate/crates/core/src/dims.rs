//! Integer combinatorics of spherical harmonic dimensions.
//!
//! `n_dim(d, k)` counts the linearly independent spherical harmonics of
//! degree `k` in `d` dimensions, `h_dim(d, k)` the harmonics of degree at
//! most `k`, and `degree_of_index` inverts the cumulative count: it maps a
//! singular value index `n` to the degree block containing it.
//!
//! All arithmetic is exact (u128 with checked multiplication); overflow is
//! reported instead of saturating.

use crate::error::Error;
use crate::Result;

/// Spatial dimension `d >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(d: u32) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Dimension(d))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// `d` as a float, for rate formulas.
    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Binomial coefficient C(n, r) with C(n, r) = 0 for n < 0 or n < r.
///
/// The negative-upper-index convention makes the closed forms below valid
/// for all degrees, matching the generating function term by term.
fn binomial(n: i64, r: u32) -> Result<u128> {
    if n < 0 || (n as u128) < u128::from(r) {
        return Ok(0);
    }
    let n = n as u128;
    let mut result: u128 = 1;
    for i in 0..u128::from(r) {
        result = result
            .checked_mul(n - i)
            .ok_or(Error::Overflow("binomial coefficient"))?
            / (i + 1);
    }
    Ok(result)
}

/// Number of linearly independent spherical harmonics of degree `k` in `d`
/// dimensions: C(k+d-1, d-1) - C(k+d-3, d-1).
pub fn n_dim(d: Dimension, k: u32) -> Result<u64> {
    let dm1 = d.get() - 1;
    let k = i64::from(k);
    let value = binomial(k + i64::from(d.get()) - 1, dm1)?
        - binomial(k + i64::from(d.get()) - 3, dm1)?;
    u64::try_from(value).map_err(|_| Error::Overflow("n_dim"))
}

/// Number of linearly independent homogeneous harmonic polynomials of degree
/// at most `k`: C(k+d, d) - C(k+d-2, d), with h_d(-1) = 0.
pub fn h_dim(d: Dimension, k: i64) -> Result<u64> {
    if k < -1 {
        return Err(Error::InvalidDegree { min: -1, got: k });
    }
    if k == -1 {
        return Ok(0);
    }
    let dd = d.get();
    let value = binomial(k + i64::from(dd), dd)? - binomial(k + i64::from(dd) - 2, dd)?;
    u64::try_from(value).map_err(|_| Error::Overflow("h_dim"))
}

/// The unique degree `k >= 0` with `h_d(k-1) < n <= h_d(k)`.
///
/// Binary search over `k`; `h_d` is strictly increasing for `k >= 0`.
pub fn degree_of_index(d: Dimension, n: u64) -> Result<u32> {
    if n < 1 {
        return Err(Error::InvalidIndex(n));
    }
    let mut hi: i64 = 1;
    while h_dim(d, hi)? < n {
        hi = hi.checked_mul(2).ok_or(Error::Overflow("degree search"))?;
    }
    let mut lo: i64 = 0;
    // Invariant: h_d(lo - 1) < n <= h_d(hi).
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if h_dim(d, mid)? < n {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    Ok(lo as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dim(d: u32) -> Dimension {
        Dimension::new(d).unwrap()
    }

    /// Coefficients of (1+x)/(1-x)^(d-1) up to degree kmax, computed by
    /// expanding (1-x)^(d-1) with repeated polynomial multiplication and
    /// solving the triangular convolution. Independent of `binomial`.
    fn series_oracle(d: u32, kmax: usize) -> Vec<i128> {
        let mut denom: Vec<i128> = vec![1];
        for _ in 0..(d - 1) {
            let mut next = vec![0i128; denom.len() + 1];
            for (i, &c) in denom.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c;
            }
            denom = next;
        }
        // Solve denom * series = 1 + x term by term.
        let mut series = vec![0i128; kmax + 1];
        for k in 0..=kmax {
            let rhs: i128 = if k <= 1 { 1 } else { 0 };
            let mut acc = rhs;
            for j in 1..=k.min(denom.len() - 1) {
                acc -= denom[j] * series[k - j];
            }
            series[k] = acc / denom[0];
        }
        series
    }

    #[test]
    fn n_dim_matches_series_oracle() {
        for d in 2..=8 {
            let series = series_oracle(d, 50);
            for k in 0..=50u32 {
                assert_eq!(
                    n_dim(dim(d), k).unwrap() as i128,
                    series[k as usize],
                    "d={d} k={k}"
                );
            }
        }
    }

    #[test]
    fn n_dim_examples() {
        assert_eq!(n_dim(dim(2), 0).unwrap(), 1);
        assert_eq!(n_dim(dim(2), 5).unwrap(), 2);
        assert_eq!(n_dim(dim(3), 4).unwrap(), 9);
    }

    #[test]
    fn h_dim_examples() {
        assert_eq!(h_dim(dim(2), 3).unwrap(), 7);
        assert_eq!(h_dim(dim(3), 2).unwrap(), 9);
        assert_eq!(h_dim(dim(4), 0).unwrap(), 1);
        assert_eq!(h_dim(dim(5), -1).unwrap(), 0);
    }

    #[test]
    fn h_dim_is_cumulative_sum() {
        for d in 2..=6 {
            let mut sum = 0u64;
            for k in 0..=40u32 {
                sum += n_dim(dim(d), k).unwrap();
                assert_eq!(h_dim(dim(d), i64::from(k)).unwrap(), sum);
            }
        }
    }

    /// Closed product form: h_d(k) = (2k+d-1) * prod_{l=1}^{d-2} (k+l) / (d-1)!
    /// (the empty product is 1). Exact integer division.
    #[test]
    fn h_dim_matches_product_form() {
        for d in 2u64..=8 {
            let mut fact = 1u128;
            for l in 1..d {
                fact *= u128::from(l);
            }
            for k in 0..=50u64 {
                let mut prod: u128 = u128::from(2 * k + d - 1);
                for l in 1..=d.saturating_sub(2) {
                    prod *= u128::from(k + l);
                }
                assert_eq!(prod % fact, 0);
                assert_eq!(
                    u128::from(h_dim(dim(d as u32), k as i64).unwrap()),
                    prod / fact,
                    "d={d} k={k}"
                );
            }
        }
    }

    #[test]
    fn degree_of_index_examples() {
        assert_eq!(degree_of_index(dim(2), 1).unwrap(), 0);
        assert_eq!(degree_of_index(dim(2), 4).unwrap(), 2);
        assert_eq!(degree_of_index(dim(3), 9).unwrap(), 2);
    }

    #[test]
    fn degree_of_index_matches_linear_scan() {
        for d in 2..=5 {
            for n in 1..=600u64 {
                let mut k = 0;
                while h_dim(dim(d), k).unwrap() < n {
                    k += 1;
                }
                assert_eq!(degree_of_index(dim(d), n).unwrap(), k as u32);
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(Dimension::new(1).is_err());
        assert!(h_dim(dim(2), -2).is_err());
        assert!(degree_of_index(dim(2), 0).is_err());
    }

    #[test]
    fn overflow_is_detected_not_saturated() {
        assert!(matches!(
            h_dim(dim(8), 1_000_000),
            Err(crate::error::Error::Overflow(_))
        ));
        // Large but representable values still work.
        assert_eq!(h_dim(dim(2), 1_000_000).unwrap(), 2_000_001);
        assert_eq!(degree_of_index(dim(2), 2_000_001).unwrap(), 1_000_000);
    }

    proptest! {
        #[test]
        fn block_increment_identity(d in 2u32..=8, k in 0i64..=60) {
            let d = dim(d);
            let increment = h_dim(d, k).unwrap() - h_dim(d, k - 1).unwrap();
            prop_assert_eq!(increment, n_dim(d, k as u32).unwrap());
        }

        #[test]
        fn degree_of_index_at_block_boundaries(d in 2u32..=8, k in 0i64..=60) {
            let d = dim(d);
            let h = h_dim(d, k).unwrap();
            prop_assert_eq!(degree_of_index(d, h).unwrap(), k as u32);
            prop_assert_eq!(degree_of_index(d, h + 1).unwrap(), k as u32 + 1);
        }
    }
}
