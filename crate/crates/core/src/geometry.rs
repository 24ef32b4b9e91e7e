//! Balls, ball unions and the deterministic sampling used by geometric
//! predicates.

use crate::error::Error;
use crate::Result;
use serde::{Deserialize, Serialize};

/// A Euclidean ball given by center and radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl BallSpec {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidRadius(radius));
        }
        if center.is_empty() {
            return Err(Error::EmptyInput("ball center"));
        }
        Ok(BallSpec { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// The `gamma`-dilation about the same center.
    pub fn dilate(&self, gamma: f64) -> BallSpec {
        BallSpec {
            center: self.center.clone(),
            radius: self.radius * gamma,
        }
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        dist2(&self.center, point) < self.radius * self.radius
    }

    /// Analytic ball-in-ball test: |c1 - c2| + r1 <= r2.
    pub fn contained_in_ball(&self, outer: &BallSpec) -> bool {
        dist2(&self.center, &outer.center).sqrt() + self.radius <= outer.radius
    }

    /// Distance from an interior point to the sphere, negative outside.
    pub fn boundary_distance(&self, point: &[f64]) -> f64 {
        self.radius - dist2(&self.center, point).sqrt()
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// A finite union of open balls, used as an integration domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DomainUnion {
    balls: Vec<BallSpec>,
}

impl DomainUnion {
    pub fn new(balls: Vec<BallSpec>) -> Result<Self> {
        if balls.is_empty() {
            return Err(Error::EmptyInput("domain balls"));
        }
        let d = balls[0].dim();
        if balls.iter().any(|b| b.dim() != d) {
            return Err(Error::DimensionMismatch(
                "balls of a union must share one ambient dimension".into(),
            ));
        }
        Ok(DomainUnion { balls })
    }

    pub fn single(ball: BallSpec) -> Self {
        DomainUnion { balls: vec![ball] }
    }

    pub fn balls(&self) -> &[BallSpec] {
        &self.balls
    }

    pub fn dim(&self) -> usize {
        self.balls[0].dim()
    }

    /// The union is a single ball.
    pub fn as_single_ball(&self) -> Option<&BallSpec> {
        if self.balls.len() == 1 {
            Some(&self.balls[0])
        } else {
            None
        }
    }

    /// Center the polynomial bases are expressed about.
    pub fn reference_center(&self) -> &[f64] {
        &self.balls[0].center
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        self.balls.iter().any(|b| b.contains(point))
    }

    /// Index of the lowest-numbered ball containing the point. This is the
    /// membership rule realizing the disjointification of overlapping balls:
    /// a point is charged to the first ball that contains it.
    pub fn owner(&self, point: &[f64]) -> Option<usize> {
        self.balls.iter().position(|b| b.contains(point))
    }

    pub fn pairwise_disjoint(&self) -> bool {
        for i in 0..self.balls.len() {
            for j in (i + 1)..self.balls.len() {
                let a = &self.balls[i];
                let b = &self.balls[j];
                if dist2(&a.center, &b.center).sqrt() < a.radius + b.radius {
                    return false;
                }
            }
        }
        true
    }

    /// Containment of `self` in `other`, checked analytically where a single
    /// outer ball suffices and by boundary sampling otherwise.
    pub fn contained_in(&self, other: &DomainUnion, samples_per_ball: usize) -> bool {
        self.balls.iter().all(|b| {
            other.balls.iter().any(|o| b.contained_in_ball(o))
                || sphere_points(b, samples_per_ball)
                    .into_iter()
                    .all(|p| other.contains(&p) || on_union_boundary(other, &p))
        })
    }

    /// Deterministic low-discrepancy interior points, `count` per ball.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut points = Vec::new();
        for ball in &self.balls {
            points.extend(ball_points(ball, count, seed));
        }
        points
    }

    /// Whether the point belongs to ball `index` under the ownership rule,
    /// i.e. to the disjointified piece of that ball.
    pub fn is_inside_own_piece(&self, index: usize, point: &[f64]) -> bool {
        self.owner(point) == Some(index)
    }
}

fn on_union_boundary(union: &DomainUnion, p: &[f64]) -> bool {
    union
        .balls
        .iter()
        .any(|b| b.boundary_distance(p).abs() <= 1e-12 * b.radius)
}

/// Geometry file schema: outer and inner ball lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometryFile {
    pub outer: Vec<BallSpec>,
    pub inner: Vec<BallSpec>,
}

impl GeometryFile {
    pub fn outer_union(&self) -> Result<DomainUnion> {
        DomainUnion::new(self.outer.clone())
    }

    pub fn inner_union(&self) -> Result<DomainUnion> {
        DomainUnion::new(self.inner.clone())
    }
}

/// Van der Corput radical inverse in the given base.
fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut result = 0.0;
    let mut fraction = 1.0 / base as f64;
    while index > 0 {
        result += (index % base) as f64 * fraction;
        index /= base;
        fraction /= base as f64;
    }
    result
}

const PRIMES: [u64; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];

/// Halton point in the unit cube.
pub fn halton(index: u64, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|axis| radical_inverse(index, PRIMES[axis % PRIMES.len()]))
        .collect()
}

/// `count` deterministic interior points of a ball: Halton points in the
/// bounding cube with rejection; `seed` offsets the sequence start.
pub fn ball_points(ball: &BallSpec, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let d = ball.dim();
    let mut points = Vec::with_capacity(count);
    let mut index = seed + 1;
    while points.len() < count {
        let u = halton(index, d);
        index += 1;
        let p: Vec<f64> = u
            .iter()
            .zip(&ball.center)
            .map(|(ui, ci)| ci + ball.radius * (2.0 * ui - 1.0))
            .collect();
        if ball.contains(&p) {
            points.push(p);
        }
    }
    points
}

/// `count` deterministic points on the sphere of a ball, via normalized
/// Gaussians driven by Halton points (Box-Muller).
pub fn sphere_points(ball: &BallSpec, count: usize) -> Vec<Vec<f64>> {
    let d = ball.dim();
    let pairs = d.div_ceil(2);
    let mut points = Vec::with_capacity(count);
    let mut index = 1u64;
    while points.len() < count {
        let u = halton(index, 2 * pairs);
        index += 1;
        let mut g = Vec::with_capacity(2 * pairs);
        for p in 0..pairs {
            let (u1, u2) = (u[2 * p].max(1e-12), u[2 * p + 1]);
            let r = (-2.0 * u1.ln()).sqrt();
            let theta = 2.0 * std::f64::consts::PI * u2;
            g.push(r * theta.cos());
            g.push(r * theta.sin());
        }
        g.truncate(d);
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-9 {
            continue;
        }
        points.push(
            g.iter()
                .zip(&ball.center)
                .map(|(gi, ci)| ci + ball.radius * gi / norm)
                .collect(),
        );
    }
    points
}

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}
