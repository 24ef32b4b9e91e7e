//! Matrices of restriction operators between truncated Bergman bases and
//! the resulting numerically computed singular values.
//!
//! For nested domains the matrix entry (i, j) is the inner product of the
//! j-th source basis function with the i-th target basis function over the
//! target domain. When the target union is pairwise disjoint the entries
//! come out of exact rational cross-Gram matrices with one final rounding;
//! overlapping unions are handled by refined disjointified quadrature.

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::Zero;

use crate::basis::{cross_gram_exact, OrthonormalBasis, QuadratureConfig};
use crate::dims::{h_dim, Dimension};
use crate::error::Error;
use crate::geometry::{unit_ball_volume, BallSpec, DomainUnion};
use crate::linalg::{rational_to_f64, singular_values};
use crate::quadrature::union_rule;
use crate::Result;
use serde::Serialize;

/// Matrix of the restriction operator between truncated orthonormal bases,
/// with its singular values.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub matrix: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub target_basis: OrthonormalBasis,
}

/// Matrix of the restriction operator from the span of `source` into
/// `h2(target)`, between the source basis and the basis constructed on the
/// target.
///
/// Requires geometric containment of the target in the source domain. The
/// computed singular values approximate the operator's singular values from
/// below (a compression can only shrink them).
pub fn embedding_matrix(
    source: &OrthonormalBasis,
    target: &DomainUnion,
    quad: QuadratureConfig,
) -> Result<Embedding> {
    if !target.contained_in(source.domain(), 256) {
        return Err(Error::Containment(format!(
            "target {target:?} not inside source {:?}",
            source.domain()
        )));
    }
    let d = source.dimension();
    let target_basis = OrthonormalBasis::build_with(d, target, source.kmax(), quad)?;
    let matrix = if target.pairwise_disjoint() {
        cross_matrix_exact(source, &target_basis, target)?
    } else {
        cross_matrix_quadrature(source, &target_basis, target, quad)?
    };
    let sv = singular_values(&matrix);
    Ok(Embedding {
        matrix,
        singular_values: sv,
        target_basis,
    })
}

/// Entries via exact reduced cross-Gram: one rounding per entry.
fn cross_matrix_exact(
    source: &OrthonormalBasis,
    target_basis: &OrthonormalBasis,
    target: &DomainUnion,
) -> Result<DMatrix<f64>> {
    let cross = cross_gram_exact(source.raw(), target_basis.raw(), target)?;
    let ns = source.len();
    let nt = target_basis.len();
    match (source.exact(), target_basis.exact()) {
        (Some(es), Some(et)) => {
            // A = Us * C * Ut^T in rationals, then scale by the norms.
            let mut a = vec![vec![BigRational::zero(); nt]; ns];
            for (j, row) in es.rows.iter().enumerate() {
                let mut w = vec![BigRational::zero(); nt];
                for (m, c) in row.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    for (n, g) in cross[m].iter().enumerate() {
                        if !g.is_zero() {
                            w[n] += c * g;
                        }
                    }
                }
                for (i, trow) in et.rows.iter().enumerate() {
                    let mut sum = BigRational::zero();
                    for (n, t) in trow.iter().enumerate() {
                        if !t.is_zero() && !w[n].is_zero() {
                            sum += t * &w[n];
                        }
                    }
                    a[j][i] = sum;
                }
            }
            let mut matrix = DMatrix::zeros(nt, ns);
            for i in 0..nt {
                let tnorm = rational_to_f64(&et.norms2_reduced[i]).sqrt();
                for j in 0..ns {
                    let snorm = rational_to_f64(&es.norms2_reduced[j]).sqrt();
                    matrix[(i, j)] = rational_to_f64(&a[j][i]) / (snorm * tnorm);
                }
            }
            Ok(matrix)
        }
        _ => {
            // One basis is quadrature-built: contract float transforms with
            // the exact cross-Gram at the true Lebesgue scale.
            let d = source.dimension().get() as usize;
            let dvol = d as f64 * unit_ball_volume(d);
            let mut cf = DMatrix::zeros(ns, nt);
            for m in 0..ns {
                for n in 0..nt {
                    cf[(m, n)] = dvol * rational_to_f64(&cross[m][n]);
                }
            }
            let ts = source.transform();
            let tt = target_basis.transform();
            Ok(tt * cf.transpose() * ts.transpose())
        }
    }
}

/// Entries by disjointified quadrature over the target union, refined until
/// the singular values move less than a tenth of the tolerance.
fn cross_matrix_quadrature(
    source: &OrthonormalBasis,
    target_basis: &OrthonormalBasis,
    target: &DomainUnion,
    quad: QuadratureConfig,
) -> Result<DMatrix<f64>> {
    let ns = source.len();
    let nt = target_basis.len();
    let hint = 2 * source.kmax() as usize + 2;
    let mut previous_sv: Option<Vec<f64>> = None;
    let mut estimate = f64::INFINITY;
    for level in 0..=quad.max_levels {
        let rule = union_rule(target, level, hint)?;
        let mut matrix = DMatrix::<f64>::zeros(nt, ns);
        let mut raw_s = vec![0.0; ns];
        let mut vals_s = vec![0.0; ns];
        let mut raw_t = vec![0.0; nt];
        let mut vals_t = vec![0.0; nt];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            source.evaluate_all(p, &mut raw_s, &mut vals_s);
            target_basis.evaluate_all(p, &mut raw_t, &mut vals_t);
            for i in 0..nt {
                let wi = w * vals_t[i];
                for j in 0..ns {
                    matrix[(i, j)] += wi * vals_s[j];
                }
            }
        }
        let sv = singular_values(&matrix);
        if let Some(prev) = &previous_sv {
            estimate = sv
                .iter()
                .zip(prev)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if estimate <= 0.1 * quad.tolerance {
                return Ok(matrix);
            }
        }
        previous_sv = Some(sv);
    }
    Err(Error::QuadratureNonconvergence {
        estimate,
        tolerance: quad.tolerance,
    })
}

/// Comparison of numerically computed embedding singular values against the
/// closed-form concentric-ball spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct ConcentricReport {
    pub d: u32,
    pub gamma: f64,
    pub kmax: u32,
    pub tol: f64,
    pub compared: usize,
    pub max_rel_error: f64,
    pub pass: bool,
    pub singular_values: Vec<f64>,
    pub exact_values: Vec<f64>,
}

/// Build bases on the concentric pair `B_gamma`, `B_1`, compute the
/// embedding matrix numerically and compare every singular value with index
/// `n <= h_d(kmax - 1)` against the closed form `gamma^-(k + d/2)`.
///
/// Only the trailing degree block is affected by truncation, hence the
/// comparison range.
pub fn verify_concentric(d: Dimension, gamma: f64, kmax: u32, tol: f64) -> Result<ConcentricReport> {
    if !(gamma > 1.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    if kmax < 1 {
        return Err(Error::InvalidDegree { min: 1, got: 0 });
    }
    if !(tol > 0.0) {
        return Err(Error::Config(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let dd = d.get() as usize;
    let source_domain = DomainUnion::single(BallSpec::new(vec![0.0; dd], gamma)?);
    let target_domain = DomainUnion::single(BallSpec::new(vec![0.0; dd], 1.0)?);
    let source = OrthonormalBasis::build(d, &source_domain, kmax)?;
    let embedding = embedding_matrix(&source, &target_domain, QuadratureConfig::default())?;

    let spectrum = crate::ball::ExactBallSpectrum::new(d, gamma)?;
    let compared = h_dim(d, i64::from(kmax) - 1)? as usize;
    let mut max_rel_error = 0.0f64;
    let mut exact_values = Vec::with_capacity(compared);
    for n in 1..=compared {
        let exact = spectrum.singular_value(n as u64)?;
        exact_values.push(exact);
        let got = embedding.singular_values[n - 1];
        let rel = (got - exact).abs() / exact;
        if rel > max_rel_error {
            max_rel_error = rel;
        }
    }
    Ok(ConcentricReport {
        d: d.get(),
        gamma,
        kmax,
        tol,
        compared,
        max_rel_error,
        pass: max_rel_error < tol,
        singular_values: embedding.singular_values,
        exact_values,
    })
}
