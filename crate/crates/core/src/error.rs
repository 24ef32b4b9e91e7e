//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("spatial dimension must be at least 2, got {0}")]
    InvalidDimension(u32),

    #[error("degree must be at least {min}, got {got}")]
    InvalidDegree { min: i64, got: i64 },

    #[error("singular value index must be at least 1, got {0}")]
    InvalidIndex(u64),

    #[error("integer overflow computing {0}")]
    Overflow(&'static str),

    #[error("decay rate must be positive, got {0}")]
    NonpositiveRate(f64),

    #[error("stretching exponent must be positive, got {0}")]
    NonpositiveExponent(f64),

    #[error("operator norm must be nonnegative, got {0}")]
    NegativeNorm(f64),

    #[error("expected a nonempty list of {0}")]
    EmptyInput(&'static str),

    #[error("mismatched stretching exponents: {0} vs {1}")]
    MismatchedAlpha(f64, f64),

    #[error("sequence is not nonincreasing or has negative entries at index {0}")]
    InvalidSpectrum(usize),

    #[error("dilation factor must exceed 1, got {0}")]
    InvalidGamma(f64),

    #[error("ball radius must be positive, got {0}")]
    InvalidRadius(f64),

    #[error("negative input: {0}")]
    NegativeInput(&'static str),

    #[error("{0}")]
    DimensionMismatch(String),

    #[error("degree mismatch: expected homogeneous degree {expected}, got {got}")]
    DegreeMismatch { expected: u32, got: u32 },

    #[error("polynomials are not expressed about the same center")]
    CenterMismatch,

    #[error("harmonic subspace dimension self-check failed: computed {computed}, expected {expected}")]
    HarmonicDimension { computed: usize, expected: u64 },

    #[error("Gram matrix is not positive definite to tolerance (pivot {pivot} at function {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("target domain is not contained in the source domain: {0}")]
    Containment(String),

    #[error("quadrature did not converge: estimated error {estimate} above tolerance {tolerance}")]
    QuadratureNonconvergence { estimate: f64, tolerance: f64 },

    #[error("quadrature over overlapping ball unions is only implemented for d = 2 and d = 3, got d = {0}")]
    UnsupportedQuadratureDimension(u32),

    #[error("no relative cover is feasible: {0}")]
    InfeasibleCover(String),

    #[error("point {0:?} lies outside the map's domain")]
    OutsideDomain(Vec<f64>),

    #[error("invalid configuration: {0}")]
    Config(String),
}
