//! Small dense linear algebra helpers shared across modules.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Convert a big rational to the nearest f64 without overflowing through the
/// numerator or denominator. Works by shifting the quotient into a ~64-bit
/// integer window and rescaling by the corresponding power of two.
pub fn rational_to_f64(value: &BigRational) -> f64 {
    if value.is_zero() {
        return 0.0;
    }
    let negative = value.is_negative();
    let numer = value.numer().abs();
    let denom = value.denom().abs();
    let shift = 64i64 - (numer.bits() as i64 - denom.bits() as i64);
    let scaled = if shift >= 0 {
        (numer << shift as u64) / denom
    } else {
        numer / (denom << (-shift) as u64)
    };
    let mantissa = scaled.to_f64().unwrap_or(f64::INFINITY);
    let result = mantissa * 2f64.powi(-shift as i32);
    if negative {
        -result
    } else {
        result
    }
}

/// Exact rational from a float; panics on NaN/inf (inputs are validated
/// upstream).
pub fn f64_to_rational(value: f64) -> BigRational {
    BigRational::from_float(value).expect("finite float expected")
}

/// Singular values of a matrix, sorted nonincreasing.
pub fn singular_values(matrix: &DMatrix<f64>) -> Vec<f64> {
    let mut sv: Vec<f64> = matrix.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Eigenvalues of a real matrix, in the deterministic order
/// (|lambda| desc, Re desc, Im desc).
pub fn sorted_eigenvalues(matrix: &DMatrix<f64>) -> Vec<Complex64> {
    let eig = matrix.clone().complex_eigenvalues();
    let mut values: Vec<Complex64> = eig.iter().map(|z| Complex64::new(z.re, z.im)).collect();
    sort_eigenvalues(&mut values);
    values
}

/// Sort by modulus descending, ties broken by descending real part, then
/// descending imaginary part.
pub fn sort_eigenvalues(values: &mut [Complex64]) {
    values.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap()
            .then(b.re.partial_cmp(&a.re).unwrap())
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
}
