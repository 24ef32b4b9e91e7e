//! Galerkin discretization of composition operators `f -> f o phi` on
//! planar harmonic Bergman spaces.
//!
//! The operator is compressed to the span of an orthonormal polynomial
//! basis of `h2(D)` for a disc `D`: entry (i, j) is the integral of
//! `e_j(phi(x)) e_i(x)` over `D`. Eigenvalues of the matrix, ordered
//! deterministically, approximate the leading eigenvalues of the
//! composition operator; a truncation-stability gate decides which of them
//! count as converged.

use nalgebra::DMatrix;
pub use num_complex::Complex64;

use crate::ball::DecayBound;
use crate::basis::OrthonormalBasis;
use crate::covers::{eigenvalue_bound, RelativeCover};
use crate::dims::{degree_of_index, Dimension};
use crate::error::Error;
use crate::geometry::{ball_points, BallSpec, DomainUnion};
use crate::linalg::sorted_eigenvalues;
use crate::quadrature::disc_rule;
use crate::Result;
use serde::Serialize;

/// Upper half-plane membership.
fn in_upper_halfplane(w: Complex64) -> bool {
    w.im > 0.0
}

/// Open upper unit semidisc membership.
fn in_semidisc(z: Complex64) -> bool {
    z.norm() < 1.0 && z.im > 0.0
}

/// `psi: z -> ((1+z)/(1-z))^2`, mapping the upper unit semidisc onto the
/// upper half-plane.
pub fn example_psi(z: Complex64) -> Result<Complex64> {
    if !in_semidisc(z) {
        return Err(Error::OutsideDomain(vec![z.re, z.im]));
    }
    let m = (1.0 + z) / (1.0 - z);
    Ok(m * m)
}

/// Inverse of [`example_psi`]: `w -> (sqrt(w) - 1)/(sqrt(w) + 1)` with the
/// principal square root, which lands in the open first quadrant for
/// `Im w > 0`.
pub fn example_psi_inv(w: Complex64) -> Result<Complex64> {
    if !in_upper_halfplane(w) {
        return Err(Error::OutsideDomain(vec![w.re, w.im]));
    }
    let s = w.sqrt();
    Ok((s - 1.0) / (s + 1.0))
}

/// The worked conformal self-map of the upper half-plane:
/// `phi = psi^-1 + 2i`, sending the half-plane onto the translated semidisc.
pub fn example_phi(w: Complex64) -> Result<Complex64> {
    Ok(example_psi_inv(w)? + Complex64::new(0.0, 2.0))
}

/// Derivative of `psi`: `4 (1+z) / (1-z)^3`.
fn example_psi_derivative(z: Complex64) -> Complex64 {
    let denom = 1.0 - z;
    4.0 * (1.0 + z) / (denom * denom * denom)
}

/// A conformal map with evaluable derivative, from a small built-in
/// catalog.
#[derive(Debug, Clone)]
pub enum ConformalMap {
    /// `z -> center + rho (z - center)`, defined on the whole plane.
    Scaling { center: Complex64, rho: f64 },
    /// `phi = psi^-1 + 2i` on the upper half-plane.
    HalfplaneExample,
}

impl ConformalMap {
    pub fn scaling(center: Complex64, rho: f64) -> Result<Self> {
        if rho == 0.0 {
            return Err(Error::Config("scaling factor must be nonzero".into()));
        }
        Ok(ConformalMap::Scaling { center, rho })
    }

    pub fn forward(&self, w: Complex64) -> Result<Complex64> {
        match self {
            ConformalMap::Scaling { center, rho } => Ok(center + (w - center).scale(*rho)),
            ConformalMap::HalfplaneExample => example_phi(w),
        }
    }

    /// Complex derivative at `w`; nonzero everywhere on the domain.
    pub fn derivative(&self, w: Complex64) -> Result<Complex64> {
        match self {
            ConformalMap::Scaling { rho, .. } => Ok(Complex64::new(*rho, 0.0)),
            ConformalMap::HalfplaneExample => {
                let z = example_psi_inv(w)?;
                Ok(1.0 / example_psi_derivative(z))
            }
        }
    }

    pub fn domain_contains(&self, w: Complex64) -> bool {
        match self {
            ConformalMap::Scaling { .. } => true,
            ConformalMap::HalfplaneExample => in_upper_halfplane(w),
        }
    }
}

/// Galerkin compression of the composition operator to the basis of a disc.
#[derive(Debug, Clone)]
pub struct GalerkinOperator {
    pub basis: OrthonormalBasis,
    pub matrix: DMatrix<f64>,
    /// Final refinement level and the last observed entry movement.
    pub level: usize,
    pub entry_estimate: f64,
}

/// Matrix entries `(L e_j, e_i)` over the disc, with the tensor polar rule
/// refined until the largest entry moves less than `entry_tol` between
/// levels.
pub fn galerkin_matrix(
    map: &ConformalMap,
    omega_prime: &DomainUnion,
    kmax: u32,
    entry_tol: f64,
) -> Result<GalerkinOperator> {
    let Some(ball) = omega_prime.as_single_ball() else {
        return Err(Error::Config(
            "composition operators are discretized over a single disc".into(),
        ));
    };
    if omega_prime.dim() != 2 {
        return Err(Error::UnsupportedQuadratureDimension(omega_prime.dim() as u32));
    }
    if kmax < 1 {
        return Err(Error::InvalidDegree { min: 1, got: 0 });
    }
    let d = Dimension::new(2)?;
    let basis = OrthonormalBasis::build(d, omega_prime, kmax)?;
    let n = basis.len();
    let mut previous: Option<DMatrix<f64>> = None;
    let mut estimate = f64::INFINITY;
    for level in 0..=5usize {
        let scale = 1usize << level;
        let n_radial = (kmax as usize + 6) * scale;
        let n_angular = (4 * kmax as usize + 16) * scale;
        let rule = disc_rule(ball, n_radial, n_angular);
        let mut matrix = DMatrix::<f64>::zeros(n, n);
        let mut raw = vec![0.0; n];
        let mut at_x = vec![0.0; n];
        let mut at_phi = vec![0.0; n];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let z = Complex64::new(p[0], p[1]);
            if !map.domain_contains(z) {
                return Err(Error::OutsideDomain(p.clone()));
            }
            let image = map.forward(z)?;
            basis.evaluate_all(p, &mut raw, &mut at_x);
            basis.evaluate_all(&[image.re, image.im], &mut raw, &mut at_phi);
            for i in 0..n {
                let wi = w * at_x[i];
                for j in 0..n {
                    matrix[(i, j)] += wi * at_phi[j];
                }
            }
        }
        if let Some(prev) = &previous {
            estimate = (&matrix - prev).amax();
            if estimate < entry_tol {
                return Ok(GalerkinOperator {
                    basis,
                    matrix,
                    level,
                    entry_estimate: estimate,
                });
            }
        }
        previous = Some(matrix);
    }
    Err(Error::QuadratureNonconvergence {
        estimate,
        tolerance: entry_tol,
    })
}

/// One eigenvalue with its truncation-stability verdict.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EigenvalueEstimate {
    pub value_re: f64,
    pub value_im: f64,
    pub modulus: f64,
    pub converged: bool,
}

impl EigenvalueEstimate {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.value_re, self.value_im)
    }
}

/// Eigenvalues at `kmax` gated by stability across two preceding truncation
/// levels (`kmax - step` and `kmax - 2 step`): an eigenvalue is converged
/// when both increments moved it by less than `tol` relative to its size.
pub fn converged_eigenvalues(
    map: &ConformalMap,
    omega_prime: &DomainUnion,
    kmax: u32,
    step: u32,
    tol: f64,
    entry_tol: f64,
) -> Result<(GalerkinOperator, Vec<EigenvalueEstimate>)> {
    if kmax <= 2 * step {
        return Err(Error::Config(format!(
            "kmax = {kmax} leaves no room for two truncation increments of {step}"
        )));
    }
    let op_small = galerkin_matrix(map, omega_prime, kmax - 2 * step, entry_tol)?;
    let op_mid = galerkin_matrix(map, omega_prime, kmax - step, entry_tol)?;
    let op = galerkin_matrix(map, omega_prime, kmax, entry_tol)?;
    let small = sorted_eigenvalues(&op_small.matrix);
    let mid = sorted_eigenvalues(&op_mid.matrix);
    let full = sorted_eigenvalues(&op.matrix);
    let estimates = full
        .iter()
        .enumerate()
        .map(|(idx, &lambda)| {
            let converged = idx < small.len() && idx < mid.len() && {
                let scale = lambda.norm().max(f64::MIN_POSITIVE);
                (lambda - mid[idx]).norm() <= tol * scale
                    && (mid[idx] - small[idx]).norm() <= tol * scale
            };
            EigenvalueEstimate {
                value_re: lambda.re,
                value_im: lambda.im,
                modulus: lambda.norm(),
                converged,
            }
        })
        .collect();
    Ok((op, estimates))
}

/// Upper estimate for the operator constant: the supremum over sampled
/// `w` in `omega_dprime` of `|det d(phi^-1)|^(1/2) = 1/|phi'(w)|` at
/// `x = phi(w)`, valid when `phi(omega_dprime)` lies inside `omega_prime`
/// (checked on the samples).
pub fn estimate_k(
    map: &ConformalMap,
    omega_prime: &DomainUnion,
    omega_dprime: &DomainUnion,
    n_samples: usize,
) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::EmptyInput("samples"));
    }
    let mut sup: f64 = 0.0;
    for ball in omega_dprime.balls() {
        for p in ball_points(ball, n_samples, 0) {
            let w = Complex64::new(p[0], p[1]);
            if !map.domain_contains(w) {
                return Err(Error::OutsideDomain(p));
            }
            let image = map.forward(w)?;
            if !omega_prime.contains(&[image.re, image.im]) {
                return Err(Error::Containment(format!(
                    "phi({w}) = {image} escapes the reference domain"
                )));
            }
            let derivative = map.derivative(w)?.norm();
            if derivative == 0.0 {
                return Err(Error::Config(
                    "conformal map has a vanishing derivative at a sample".into(),
                ));
            }
            sup = sup.max(1.0 / derivative);
        }
    }
    Ok(sup)
}

/// One row of the eigenvalue-versus-bound table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayRow {
    pub n: usize,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    pub bound: f64,
    pub converged: bool,
    pub ok: bool,
}

/// Eigenvalue decay report: the table, the number of converged bound
/// violations and the fitted geometric ratio of successive degree-block
/// mean moduli.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    pub violations: usize,
    pub fitted_ratio: Option<f64>,
}

pub fn decay_report(eigenvalues: &[EigenvalueEstimate], bound: &DecayBound) -> DecayReport {
    let d2 = Dimension::new(2).expect("2 is a valid dimension");
    let mut rows = Vec::with_capacity(eigenvalues.len());
    let mut violations = 0;
    for (idx, est) in eigenvalues.iter().enumerate() {
        let n = idx + 1;
        let b = bound.eval(n as u64);
        let ok = est.modulus <= b;
        if est.converged && !ok {
            violations += 1;
        }
        rows.push(DecayRow {
            n,
            re: est.value_re,
            im: est.value_im,
            abs: est.modulus,
            bound: b,
            converged: est.converged,
            ok,
        });
    }
    // Geometric fit over degree blocks whose eigenvalues all converged.
    let mut block_means: Vec<f64> = Vec::new();
    let mut block = 0u32;
    let mut acc: Vec<f64> = Vec::new();
    let mut all_converged = true;
    let mut complete = true;
    for (idx, est) in eigenvalues.iter().enumerate() {
        let k = degree_of_index(d2, (idx + 1) as u64).expect("index >= 1");
        if k != block {
            if all_converged && complete {
                block_means.push(acc.iter().sum::<f64>() / acc.len() as f64);
            } else {
                complete = false;
            }
            acc.clear();
            all_converged = true;
            block = k;
        }
        acc.push(est.modulus);
        all_converged &= est.converged;
    }
    let fitted_ratio = if block_means.len() >= 2 && block_means[0] > 0.0 {
        let first = block_means[0];
        let last = *block_means.last().unwrap();
        if last > 0.0 {
            Some((last / first).powf(1.0 / (block_means.len() as f64 - 1.0)))
        } else {
            None
        }
    } else {
        None
    };
    DecayReport {
        rows,
        violations,
        fitted_ratio,
    }
}

/// Full reproduction of the worked half-plane example: Galerkin eigenvalues
/// of the composition operator over the disc of radius `gamma` about `2i`,
/// the sampled operator constant, and the covering decay bound
/// `K exp(-log(gamma)/2) exp(-log(gamma) n / 4)`.
#[derive(Debug, Clone, Serialize)]
pub struct HalfplaneReport {
    pub gamma: f64,
    pub kmax: u32,
    pub k_estimate: f64,
    pub c: f64,
    pub prefactor: f64,
    pub fitted_ratio: Option<f64>,
    pub reference_ratio: f64,
    pub violations: usize,
    pub pass: bool,
    pub eigenvalues: Vec<DecayRow>,
}

pub fn halfplane_report(
    gamma: f64,
    kmax: u32,
    n_samples: usize,
    conv_tol: f64,
    entry_tol: f64,
) -> Result<HalfplaneReport> {
    if !(gamma > 1.0 && gamma < 2.0) {
        return Err(Error::Config(format!(
            "the half-plane example requires 1 < gamma < 2, got {gamma}"
        )));
    }
    let d = Dimension::new(2)?;
    let map = ConformalMap::HalfplaneExample;
    let center = vec![0.0, 2.0];
    let omega_prime = DomainUnion::single(BallSpec::new(center.clone(), gamma)?);
    let unit_ball = BallSpec::new(center, 1.0)?;

    // Relative cover of the nested pair: the unit disc about 2i, dilated by
    // gamma, stays inside the outer disc of radius gamma.
    let cover = RelativeCover::new(
        vec![unit_ball.clone()],
        vec![gamma],
        omega_prime.clone(),
        DomainUnion::single(unit_ball),
    )?;
    let k_estimate = estimate_k(&map, &omega_prime, &omega_prime, n_samples)?;
    let bound = eigenvalue_bound(&cover, d, k_estimate)?;

    let (_, eigenvalues) = converged_eigenvalues(&map, &omega_prime, kmax, 5, conv_tol, entry_tol)?;
    let report = decay_report(&eigenvalues, &bound);
    let reference_ratio = (-gamma.ln() / 4.0).exp();
    Ok(HalfplaneReport {
        gamma,
        kmax,
        k_estimate,
        c: bound.rate,
        prefactor: bound.prefactor,
        fitted_ratio: report.fitted_ratio,
        reference_ratio,
        violations: report.violations,
        pass: report.violations == 0,
        eigenvalues: report.rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn psi_inverse_closed_form_point() {
        let z = example_psi_inv(c(0.0, 2.0)).unwrap();
        assert_relative_eq!(z.re, 0.2, max_relative = 1e-14);
        assert_relative_eq!(z.im, 0.4, max_relative = 1e-14);
        let w = example_phi(c(0.0, 2.0)).unwrap();
        assert_relative_eq!(w.re, 0.2, max_relative = 1e-14);
        assert_relative_eq!(w.im, 2.4, max_relative = 1e-14);
    }

    #[test]
    fn psi_round_trip_and_range() {
        // Deterministic pseudo-random points of the upper half-plane.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let w = c(20.0 * next() - 10.0, 10.0 * next() + 1e-3);
            let z = example_psi_inv(w).unwrap();
            assert!(in_semidisc(z), "psi_inv({w}) = {z} left the semidisc");
            let back = example_psi(z).unwrap();
            assert!((back - w).norm() <= 1e-12 * w.norm().max(1.0));
            // The example map lands in the translated semidisc.
            let phi = example_phi(w).unwrap();
            assert!(phi.im > 2.0 && phi.im < 3.0);
            assert!((phi - c(0.0, 2.0)).norm() < 1.0);
        }
    }

    #[test]
    fn domain_checks() {
        assert!(example_psi(c(0.5, -0.1)).is_err());
        assert!(example_psi(c(1.5, 0.5)).is_err());
        assert!(example_psi_inv(c(0.0, -1.0)).is_err());
    }

    #[test]
    fn identity_scaling_gives_identity_matrix() {
        let map = ConformalMap::scaling(c(0.0, 0.0), 1.0).unwrap();
        let disc = DomainUnion::single(BallSpec::new(vec![0.0, 0.0], 1.0).unwrap());
        let op = galerkin_matrix(&map, &disc, 4, 1e-10).unwrap();
        let n = op.matrix.nrows();
        assert!((op.matrix.clone() - DMatrix::<f64>::identity(n, n)).amax() < 1e-12);
    }

    #[test]
    fn scaling_map_spectrum() {
        let rho = 0.5f64;
        let map = ConformalMap::scaling(c(0.0, 0.0), rho).unwrap();
        let disc = DomainUnion::single(BallSpec::new(vec![0.0, 0.0], 1.0).unwrap());
        let kmax = 8u32;
        let op = galerkin_matrix(&map, &disc, kmax, 1e-10).unwrap();
        let eigen = sorted_eigenvalues(&op.matrix);
        let d2 = Dimension::new(2).unwrap();
        for (idx, lambda) in eigen.iter().enumerate() {
            let k = degree_of_index(d2, (idx + 1) as u64).unwrap();
            if k + 2 > kmax {
                break;
            }
            assert_relative_eq!(lambda.re, rho.powi(k as i32), max_relative = 1e-8);
            assert!(lambda.im.abs() < 1e-10);
        }
    }

    #[test]
    fn scaling_map_off_center() {
        // Same spectrum when the fixed point is the disc center elsewhere.
        let rho = 0.3f64;
        let map = ConformalMap::scaling(c(1.0, -2.0), rho).unwrap();
        let disc = DomainUnion::single(BallSpec::new(vec![1.0, -2.0], 1.5).unwrap());
        let op = galerkin_matrix(&map, &disc, 5, 1e-10).unwrap();
        let eigen = sorted_eigenvalues(&op.matrix);
        assert_relative_eq!(eigen[0].re, 1.0, max_relative = 1e-10);
        assert_relative_eq!(eigen[1].re, rho, max_relative = 1e-9);
        assert_relative_eq!(eigen[3].re, rho * rho, max_relative = 1e-8);
    }

    #[test]
    fn estimate_k_for_scaling() {
        let rho = 0.5f64;
        let map = ConformalMap::scaling(c(0.0, 0.0), rho).unwrap();
        let outer = DomainUnion::single(BallSpec::new(vec![0.0, 0.0], 1.0).unwrap());
        let inner = DomainUnion::single(BallSpec::new(vec![0.0, 0.0], 0.9).unwrap());
        let k = estimate_k(&map, &outer, &inner, 200).unwrap();
        assert_relative_eq!(k, 1.0 / rho, max_relative = 1e-14);

        let id = ConformalMap::scaling(c(0.0, 0.0), 1.0).unwrap();
        assert_relative_eq!(
            estimate_k(&id, &outer, &inner, 50).unwrap(),
            1.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn decay_reporter_flags_identity() {
        let eigenvalues: Vec<EigenvalueEstimate> = (0..5)
            .map(|_| EigenvalueEstimate {
                value_re: 1.0,
                value_im: 0.0,
                modulus: 1.0,
                converged: true,
            })
            .collect();
        let bound = DecayBound::new(0.5, 0.3, 1.0).unwrap();
        let report = decay_report(&eigenvalues, &bound);
        assert_eq!(report.violations, 5);
        assert!(report.rows.iter().all(|r| !r.ok));
    }

    #[test]
    fn scaling_map_respects_single_ball_bound() {
        // Exact eigenvalues rho^k against the covering bound for the pair
        // (B_1, B_rho-hull): cover ball B_0.6 with dilation 1.6 inside B_1.
        let rho = 0.5f64;
        let map = ConformalMap::scaling(c(0.0, 0.0), rho).unwrap();
        let outer = DomainUnion::single(BallSpec::new(vec![0.0, 0.0], 1.0).unwrap());
        let cover_ball = BallSpec::new(vec![0.0, 0.0], 0.6).unwrap();
        let cover = RelativeCover::new(
            vec![cover_ball.clone()],
            vec![1.6],
            outer.clone(),
            DomainUnion::single(cover_ball),
        )
        .unwrap();
        let k = estimate_k(&map, &outer, &outer, 200).unwrap();
        let bound = eigenvalue_bound(&cover, Dimension::new(2).unwrap(), k).unwrap();
        let (_, eig) = converged_eigenvalues(&map, &outer, 12, 2, 1e-6, 1e-10).unwrap();
        let report = decay_report(&eig, &bound);
        assert_eq!(report.violations, 0);
        // The fitted block ratio is rho for the exact geometric spectrum.
        let fitted = report.fitted_ratio.unwrap();
        assert_relative_eq!(fitted, rho, max_relative = 1e-6);
    }

    #[test]
    fn halfplane_truncation_stability() {
        let gamma = 1.9;
        let disc = DomainUnion::single(BallSpec::new(vec![0.0, 2.0], gamma).unwrap());
        let map = ConformalMap::HalfplaneExample;
        let (_, eig) = converged_eigenvalues(&map, &disc, 20, 5, 1e-6, 1e-10).unwrap();
        // The leading eigenvalues converge early.
        assert!(eig[0].converged);
        assert!(eig[1].converged);
        assert!(eig[2].converged);
        assert_relative_eq!(eig[0].modulus, 1.0, max_relative = 1e-6);
    }
}
