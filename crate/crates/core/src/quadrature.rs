//! Quadrature rules over balls and disjointified ball unions.
//!
//! Discs use a tensor polar rule (Gauss-Legendre radial, trapezoid angular);
//! 3-balls add a Gauss-Legendre rule in the polar cosine. Overlapping
//! unions are integrated by charging every node to the lowest-index ball
//! containing it, which realizes the standard disjointification of the
//! union up to a null set.

use crate::error::Error;
use crate::geometry::{BallSpec, DomainUnion};
use crate::Result;
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        weights[i] = w;
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_with_derivative(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let derivative = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, derivative)
}

/// A nodes-and-weights rule for Lebesgue integration over a region.
#[derive(Debug, Clone)]
pub struct Rule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Tensor polar rule over a disc: Gauss-Legendre with `n_radial` points in
/// the radius, `n_angular` equispaced angles.
pub fn disc_rule(ball: &BallSpec, n_radial: usize, n_angular: usize) -> Rule {
    let (rn, rw) = gauss_legendre(n_radial);
    let r = ball.radius;
    let mut points = Vec::with_capacity(n_radial * n_angular);
    let mut weights = Vec::with_capacity(n_radial * n_angular);
    for (x, wr) in rn.iter().zip(&rw) {
        let rho = 0.5 * r * (x + 1.0);
        let w_rho = 0.5 * r * wr * rho;
        for j in 0..n_angular {
            let theta = 2.0 * PI * j as f64 / n_angular as f64;
            points.push(vec![
                ball.center[0] + rho * theta.cos(),
                ball.center[1] + rho * theta.sin(),
            ]);
            weights.push(w_rho * 2.0 * PI / n_angular as f64);
        }
    }
    Rule { points, weights }
}

/// Product rule over a 3-ball: Gauss-Legendre radial and polar-cosine,
/// trapezoid azimuthal.
pub fn ball3_rule(ball: &BallSpec, n_radial: usize, n_polar: usize, n_azimuthal: usize) -> Rule {
    let (rn, rw) = gauss_legendre(n_radial);
    let (un, uw) = gauss_legendre(n_polar);
    let r = ball.radius;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (x, wr) in rn.iter().zip(&rw) {
        let rho = 0.5 * r * (x + 1.0);
        let w_rho = 0.5 * r * wr * rho * rho;
        for (u, wu) in un.iter().zip(&uw) {
            let sin_phi = (1.0 - u * u).sqrt();
            for j in 0..n_azimuthal {
                let theta = 2.0 * PI * j as f64 / n_azimuthal as f64;
                points.push(vec![
                    ball.center[0] + rho * sin_phi * theta.cos(),
                    ball.center[1] + rho * sin_phi * theta.sin(),
                    ball.center[2] + rho * u,
                ]);
                weights.push(w_rho * wu * 2.0 * PI / n_azimuthal as f64);
            }
        }
    }
    Rule { points, weights }
}

/// Per-ball rule at a refinement level; node counts grow with the level.
fn ball_rule(ball: &BallSpec, level: usize, degree_hint: usize) -> Result<Rule> {
    let scale = 1 << level;
    let base_r = (degree_hint + 6) * scale;
    let base_a = (4 * degree_hint + 16) * scale;
    match ball.dim() {
        2 => Ok(disc_rule(ball, base_r, base_a)),
        3 => Ok(ball3_rule(ball, base_r, base_r, base_a)),
        d => Err(Error::UnsupportedQuadratureDimension(d as u32)),
    }
}

/// Quadrature rule over a ball union with overlap resolved by ownership:
/// nodes of ball `i` keep their weight only when ball `i` is the
/// lowest-index ball containing them.
// TODO: clip the radial interval against earlier circles per angle instead
// of dropping nodes; that would restore spectral accuracy on overlaps.
pub fn union_rule(domain: &DomainUnion, level: usize, degree_hint: usize) -> Result<Rule> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let disjoint = domain.pairwise_disjoint();
    for (i, ball) in domain.balls().iter().enumerate() {
        let rule = ball_rule(ball, level, degree_hint)?;
        for (p, w) in rule.points.into_iter().zip(rule.weights) {
            if disjoint || domain.is_inside_own_piece(i, &p) {
                points.push(p);
                weights.push(w);
            }
        }
    }
    Ok(Rule { points, weights })
}
