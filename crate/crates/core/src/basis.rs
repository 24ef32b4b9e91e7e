//! Orthonormal bases of harmonic polynomials in Bergman spaces over balls
//! and ball unions.
//!
//! Raw bases are the exact harmonic subspaces of [`crate::poly`], ordered by
//! degree. Over a single ball (or a union of pairwise disjoint balls) Gram
//! matrices are computed in exact rational arithmetic and orthogonalization
//! is exact, with a single rounding when coefficients are exported as
//! floats. Overlapping unions fall back to quadrature Gram matrices and
//! modified Gram-Schmidt with reorthogonalization.

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::Zero;

use crate::dims::Dimension;
use crate::error::Error;
use crate::geometry::{unit_ball_volume, DomainUnion};
use crate::linalg::{f64_to_rational, rational_to_f64};
use crate::poly::{harmonic_space, BallMomentTable, Poly, PolyF64};
use crate::quadrature::union_rule;
use crate::Result;

/// Harmonic polynomial family of all degrees `0..=kmax` about a center,
/// ordered by degree.
#[derive(Debug, Clone)]
pub struct RawBasis {
    d: Dimension,
    center: Vec<f64>,
    kmax: u32,
    polys: Vec<Poly>,
    degrees: Vec<u32>,
    evals: Vec<PolyF64>,
}

impl RawBasis {
    pub fn build(d: Dimension, center: &[f64], kmax: u32) -> Result<Self> {
        if center.len() != d.get() as usize {
            return Err(Error::DimensionMismatch(format!(
                "center has {} coordinates for dimension {}",
                center.len(),
                d
            )));
        }
        let mut polys = Vec::new();
        let mut degrees = Vec::new();
        for k in 0..=kmax {
            for p in harmonic_space(d, k)? {
                polys.push(p);
                degrees.push(k);
            }
        }
        let evals = polys.iter().map(Poly::to_f64).collect();
        Ok(RawBasis {
            d,
            center: center.to_vec(),
            kmax,
            polys,
            degrees,
            evals,
        })
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    /// Evaluate every raw polynomial at an absolute point.
    pub fn eval_raw(&self, x: &[f64], out: &mut [f64]) {
        let local: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        for (i, p) in self.evals.iter().enumerate() {
            out[i] = p.eval(&local);
        }
    }

    fn center_rational(&self) -> Vec<BigRational> {
        self.center.iter().map(|&c| f64_to_rational(c)).collect()
    }
}

/// Exact reduced Gram of two raw families over a union of pairwise disjoint
/// balls: entry (i, j) is the reduced integral of `a_i * b_j` over the
/// union.
pub fn cross_gram_exact(
    a: &RawBasis,
    b: &RawBasis,
    domain: &DomainUnion,
) -> Result<Vec<Vec<BigRational>>> {
    let ca = a.center_rational();
    let cb = b.center_rational();
    let mut gram = vec![vec![BigRational::zero(); b.len()]; a.len()];
    for ball in domain.balls() {
        let cball: Vec<BigRational> = ball.center.iter().map(|&c| f64_to_rational(c)).collect();
        let mut moments = BallMomentTable::new(f64_to_rational(ball.radius));
        let shift_a: Vec<BigRational> = cball.iter().zip(&ca).map(|(x, y)| x - y).collect();
        let shift_b: Vec<BigRational> = cball.iter().zip(&cb).map(|(x, y)| x - y).collect();
        let shifted_a: Vec<Poly> = a.polys.iter().map(|p| p.shift(&shift_a)).collect();
        let shifted_b: Vec<Poly> = b.polys.iter().map(|p| p.shift(&shift_b)).collect();
        for (i, pa) in shifted_a.iter().enumerate() {
            for (j, pb) in shifted_b.iter().enumerate() {
                gram[i][j] += moments.product_integral(pa, pb);
            }
        }
    }
    Ok(gram)
}

/// Exact reduced Gram of a raw family over the single ball it is centered
/// on. Homogeneous harmonics of different degrees are orthogonal there, so
/// only within-degree entries are computed.
fn gram_exact_centered_ball(raw: &RawBasis, radius: f64) -> Vec<Vec<BigRational>> {
    let n = raw.len();
    let mut moments = BallMomentTable::new(f64_to_rational(radius));
    let mut gram = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            if raw.degrees[i] != raw.degrees[j] {
                continue;
            }
            let value = moments.product_integral(&raw.polys[i], &raw.polys[j]);
            gram[i][j] = value.clone();
            gram[j][i] = value;
        }
    }
    gram
}

/// Orthonormal basis of the span of a raw harmonic family in `h2(domain)`,
/// ordered by degree. `transform` holds one orthonormal function per row,
/// expressed in raw-family coordinates with the true Lebesgue normalization.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    domain: DomainUnion,
    raw: RawBasis,
    transform: DMatrix<f64>,
    exact: Option<ExactTransform>,
}

/// Exact orthogonalization data: unit-lower-triangular combination rows and
/// reduced squared norms.
#[derive(Debug, Clone)]
pub struct ExactTransform {
    pub rows: Vec<Vec<BigRational>>,
    pub norms2_reduced: Vec<BigRational>,
}

/// Refinement policy for quadrature-backed constructions. Entries computed
/// over overlapping unions carry a jump along the disjointification cuts, so
/// attainable tolerances there are far looser than for smooth integrands.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    pub tolerance: f64,
    pub max_levels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            tolerance: 1e-8,
            max_levels: 5,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tolerance(tolerance: f64) -> Self {
        QuadratureConfig {
            tolerance,
            ..Default::default()
        }
    }
}

impl OrthonormalBasis {
    /// Build the basis over `domain`, exactly when the domain pieces are
    /// pairwise disjoint and by quadrature otherwise.
    pub fn build(d: Dimension, domain: &DomainUnion, kmax: u32) -> Result<Self> {
        Self::build_with(d, domain, kmax, QuadratureConfig::default())
    }

    pub fn build_with(
        d: Dimension,
        domain: &DomainUnion,
        kmax: u32,
        quad: QuadratureConfig,
    ) -> Result<Self> {
        if domain.dim() != d.get() as usize {
            return Err(Error::DimensionMismatch(format!(
                "domain is {}-dimensional, expected {}",
                domain.dim(),
                d
            )));
        }
        let raw = RawBasis::build(d, domain.reference_center(), kmax)?;
        if domain.pairwise_disjoint() {
            let block_only = domain.as_single_ball().is_some();
            let gram = if let Some(ball) = domain.as_single_ball() {
                gram_exact_centered_ball(&raw, ball.radius)
            } else {
                cross_gram_exact(&raw, &raw, domain)?
            };
            let exact = exact_gram_schmidt(&gram, raw.degrees(), block_only)?;
            let transform = exact_to_transform(&raw, &exact, d);
            Ok(OrthonormalBasis {
                domain: domain.clone(),
                raw,
                transform,
                exact: Some(exact),
            })
        } else {
            let gram = quadrature_gram(&raw, domain, quad)?;
            let transform = float_gram_schmidt(&gram)?;
            Ok(OrthonormalBasis {
                domain: domain.clone(),
                raw,
                transform,
                exact: None,
            })
        }
    }

    pub fn domain(&self) -> &DomainUnion {
        &self.domain
    }

    pub fn raw(&self) -> &RawBasis {
        &self.raw
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn kmax(&self) -> u32 {
        self.raw.kmax
    }

    pub fn degrees(&self) -> &[u32] {
        self.raw.degrees()
    }

    pub fn dimension(&self) -> Dimension {
        self.raw.d
    }

    /// Orthonormal functions as rows of coefficients over the raw family,
    /// true-normalized.
    pub fn transform(&self) -> &DMatrix<f64> {
        &self.transform
    }

    pub fn exact(&self) -> Option<&ExactTransform> {
        self.exact.as_ref()
    }

    /// Evaluate all orthonormal functions at an absolute point.
    pub fn evaluate_all(&self, x: &[f64], raw_buffer: &mut [f64], out: &mut [f64]) {
        self.raw.eval_raw(x, raw_buffer);
        for i in 0..self.len() {
            let mut sum = 0.0;
            for m in 0..self.len() {
                let c = self.transform[(i, m)];
                if c != 0.0 {
                    sum += c * raw_buffer[m];
                }
            }
            out[i] = sum;
        }
    }
}

fn exact_to_transform(raw: &RawBasis, exact: &ExactTransform, d: Dimension) -> DMatrix<f64> {
    let n = raw.len();
    let dvol = d.as_f64() * unit_ball_volume(d.get() as usize);
    let mut transform = DMatrix::zeros(n, n);
    for i in 0..n {
        let true_norm = (dvol * rational_to_f64(&exact.norms2_reduced[i])).sqrt();
        for m in 0..n {
            let c = &exact.rows[i][m];
            if !c.is_zero() {
                transform[(i, m)] = rational_to_f64(c) / true_norm;
            }
        }
    }
    transform
}

/// Exact Gram-Schmidt against a rational reduced Gram matrix. With
/// `block_only` set, projections are restricted to earlier functions of the
/// same degree; cross-degree orthogonality must then hold a priori (single
/// ball about the family's own center).
fn exact_gram_schmidt(
    gram: &[Vec<BigRational>],
    degrees: &[u32],
    block_only: bool,
) -> Result<ExactTransform> {
    let n = gram.len();
    let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(n);
    let mut norms2: Vec<BigRational> = Vec::with_capacity(n);
    let inner = |u: &[BigRational], v: &[BigRational]| -> BigRational {
        let mut sum = BigRational::zero();
        for (i, ui) in u.iter().enumerate() {
            if ui.is_zero() {
                continue;
            }
            for (j, vj) in v.iter().enumerate() {
                if !vj.is_zero() {
                    sum += ui * vj * &gram[i][j];
                }
            }
        }
        sum
    };
    for i in 0..n {
        let mut u = vec![BigRational::zero(); n];
        u[i] = BigRational::from_integer(1.into());
        for j in 0..i {
            if block_only && degrees[j] != degrees[i] {
                continue;
            }
            let proj = inner(&u, &rows[j]) / &norms2[j];
            if !proj.is_zero() {
                for m in 0..n {
                    let sub = &proj * &rows[j][m];
                    u[m] = &u[m] - sub;
                }
            }
        }
        let norm2 = inner(&u, &u);
        if norm2 <= BigRational::zero() {
            return Err(Error::NotPositiveDefinite {
                index: i,
                pivot: rational_to_f64(&norm2),
            });
        }
        rows.push(u);
        norms2.push(norm2);
    }
    Ok(ExactTransform {
        rows,
        norms2_reduced: norms2,
    })
}

/// Quadrature Gram (true Lebesgue scale) over an overlapping union, refined
/// until successive levels agree to the configured tolerance.
fn quadrature_gram(
    raw: &RawBasis,
    domain: &DomainUnion,
    cfg: QuadratureConfig,
) -> Result<DMatrix<f64>> {
    let n = raw.len();
    let hint = 2 * raw.kmax as usize + 2;
    let mut previous: Option<DMatrix<f64>> = None;
    let mut estimate = f64::INFINITY;
    for level in 0..=cfg.max_levels {
        let rule = union_rule(domain, level, hint)?;
        let mut gram = DMatrix::<f64>::zeros(n, n);
        let mut buffer = vec![0.0; n];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            raw.eval_raw(p, &mut buffer);
            for i in 0..n {
                for j in i..n {
                    gram[(i, j)] += w * buffer[i] * buffer[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                gram[(i, j)] = gram[(j, i)];
            }
        }
        if let Some(prev) = &previous {
            let scale = gram.amax().max(1e-300);
            estimate = (&gram - prev).amax() / scale;
            if estimate <= cfg.tolerance {
                return Ok(gram);
            }
        }
        previous = Some(gram);
    }
    Err(Error::QuadratureNonconvergence {
        estimate,
        tolerance: cfg.tolerance,
    })
}

/// Modified Gram-Schmidt on a float Gram matrix, with one reorthogonalization
/// pass when cancellation eats more than seven digits of a function's
/// original norm.
fn float_gram_schmidt(gram: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = gram.nrows();
    let mut rows = DMatrix::<f64>::identity(n, n);
    let mut norms = vec![0.0f64; n];
    let inner = |a: &DMatrix<f64>, i: usize, j: usize| -> f64 {
        let mut sum = 0.0;
        for p in 0..n {
            let ai = a[(i, p)];
            if ai == 0.0 {
                continue;
            }
            for q in 0..n {
                sum += ai * a[(j, q)] * gram[(p, q)];
            }
        }
        sum
    };
    for i in 0..n {
        let original = inner(&rows, i, i).max(0.0).sqrt();
        for pass in 0..2 {
            for j in 0..i {
                let proj = inner(&rows, i, j) / (norms[j] * norms[j]);
                for m in 0..n {
                    let sub = proj * rows[(j, m)];
                    rows[(i, m)] -= sub;
                }
            }
            let norm2 = inner(&rows, i, i);
            if norm2 <= 0.0 || !norm2.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    index: i,
                    pivot: norm2,
                });
            }
            let norm = norm2.sqrt();
            if pass == 1 || norm > 1e-7 * original {
                norms[i] = norm;
                break;
            }
        }
        for m in 0..n {
            rows[(i, m)] /= norms[i];
        }
        norms[i] = 1.0;
    }
    Ok(rows)
}
