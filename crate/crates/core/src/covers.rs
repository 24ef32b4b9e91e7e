//! Relative covers of nested open sets and the singular value / eigenvalue
//! decay bounds they induce.
//!
//! A relative cover of a nested pair (outer, inner) is a finite set of balls
//! covering the inner set whose dilations by factors `gamma_j > 1` stay
//! inside the outer set. Its efficiency vector `Gamma = (log gamma_j)`
//! controls the decay of the restriction operator: the singular values lie
//! in the class with rate `((d-1)!/2)^(1/(d-1)) * ||Gamma||_(d-1)` and gauge
//! at most `N exp(-||Gamma||/2)`; eigenvalues of operators factoring through
//! the restriction obey the same bound with the rate scaled by `(d-1)/d`.

use crate::ball::{stretch_rate, DecayBound};
use crate::dims::Dimension;
use crate::error::Error;
use crate::expo::{eigen_rate_transfer, ExponentialGauge};
use crate::geometry::{ball_points, BallSpec, DomainUnion};
use crate::Result;
use serde::Serialize;

/// A validated collection of cover balls with their dilation factors, tied
/// to the nested pair it covers.
#[derive(Debug, Clone)]
pub struct RelativeCover {
    balls: Vec<BallSpec>,
    scalings: Vec<f64>,
    outer: DomainUnion,
    inner: DomainUnion,
}

impl RelativeCover {
    pub fn new(
        balls: Vec<BallSpec>,
        scalings: Vec<f64>,
        outer: DomainUnion,
        inner: DomainUnion,
    ) -> Result<Self> {
        if balls.is_empty() {
            return Err(Error::EmptyInput("cover balls"));
        }
        if balls.len() != scalings.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} balls but {} scalings",
                balls.len(),
                scalings.len()
            )));
        }
        for &g in &scalings {
            if !(g > 1.0) {
                return Err(Error::InvalidGamma(g));
            }
        }
        let d = outer.dim();
        if inner.dim() != d || balls.iter().any(|b| b.dim() != d) {
            return Err(Error::DimensionMismatch(
                "cover geometry mixes ambient dimensions".into(),
            ));
        }
        Ok(RelativeCover {
            balls,
            scalings,
            outer,
            inner,
        })
    }

    pub fn size(&self) -> usize {
        self.balls.len()
    }

    pub fn balls(&self) -> &[BallSpec] {
        &self.balls
    }

    pub fn scalings(&self) -> &[f64] {
        &self.scalings
    }

    pub fn outer(&self) -> &DomainUnion {
        &self.outer
    }

    pub fn inner(&self) -> &DomainUnion {
        &self.inner
    }

    pub fn ambient_dim(&self) -> usize {
        self.outer.dim()
    }
}

/// Efficiency data of a cover: the vector of log scalings together with its
/// min-norm and the negative-power-sum norm for one requested exponent.
#[derive(Debug, Clone, Serialize)]
pub struct Efficiency {
    pub gamma_logs: Vec<f64>,
    pub norm_min: f64,
    pub k: u32,
    pub norm_k: f64,
}

/// `||Gamma|| = min_j |log gamma_j|` and
/// `||Gamma||_k = (sum_j |log gamma_j|^-k)^(-1/k)`, the latter evaluated in
/// log space so tiny scalings and large sizes cannot underflow.
pub fn efficiency(cover: &RelativeCover, k: u32) -> Result<Efficiency> {
    if k < 1 {
        return Err(Error::Config("efficiency exponent must be >= 1".into()));
    }
    let gamma_logs: Vec<f64> = cover.scalings.iter().map(|g| g.ln().abs()).collect();
    let norm_min = gamma_logs.iter().cloned().fold(f64::INFINITY, f64::min);
    let norm_k = gamma_norm_k(&gamma_logs, k);
    Ok(Efficiency {
        gamma_logs,
        norm_min,
        k,
        norm_k,
    })
}

fn gamma_norm_k(gamma_logs: &[f64], k: u32) -> f64 {
    if gamma_logs.len() == 1 {
        // A one-element vector reduces algebraically to the entry itself.
        return gamma_logs[0];
    }
    let k = f64::from(k);
    // log-sum-exp of -k * ln(gamma_logs[j]).
    let terms: Vec<f64> = gamma_logs.iter().map(|&g| -k * g.ln()).collect();
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    (-(max + sum.ln()) / k).exp()
}

/// Containment report for the two cover conditions.
#[derive(Debug, Clone, Serialize)]
pub struct CoverReport {
    pub valid: bool,
    /// Sampled inner points left uncovered by the cover balls.
    pub uncovered_points: Vec<Vec<f64>>,
    /// Indices of cover balls whose dilation escapes the outer set.
    pub escaping_dilations: Vec<usize>,
}

/// Check condition (a) (the inner set is covered) by dense deterministic
/// sampling and condition (b) (dilations stay inside the outer set) by
/// analytic ball-in-ball tests with a boundary-sampling fallback.
pub fn validate_cover(cover: &RelativeCover, samples_per_ball: usize, seed: u64) -> CoverReport {
    let mut uncovered = Vec::new();
    for p in cover.inner.sample_points(samples_per_ball, seed) {
        if !cover.balls.iter().any(|b| b.contains(&p)) {
            uncovered.push(p);
        }
    }
    let mut escaping = Vec::new();
    for (j, (ball, &gamma)) in cover.balls.iter().zip(&cover.scalings).enumerate() {
        let dilated = DomainUnion::single(ball.dilate(gamma));
        if !dilated.contained_in(&cover.outer, 512) {
            escaping.push(j);
        }
    }
    CoverReport {
        valid: uncovered.is_empty() && escaping.is_empty(),
        uncovered_points: uncovered,
        escaping_dilations: escaping,
    }
}

/// Decay data for the restriction operator from the outer to the inner set:
/// the gauge `(c, 1/(d-1))` with value `N exp(-||Gamma||/2)` and the induced
/// pointwise bound on the singular values.
pub fn embedding_bound(
    cover: &RelativeCover,
    d: Dimension,
) -> Result<(DecayBound, ExponentialGauge)> {
    check_dimension(cover, d)?;
    let eff = efficiency(cover, d.get() - 1)?;
    let rate = stretch_rate(d, eff.norm_k);
    let alpha = 1.0 / (d.as_f64() - 1.0);
    let value = cover.size() as f64 * (-eff.norm_min / 2.0).exp();
    let gauge = ExponentialGauge::new(rate, alpha, value, true)?;
    let bound = DecayBound::new(value, rate, alpha)?;
    Ok((bound, gauge))
}

/// Eigenvalue decay for an operator bounded through the inner set: prefactor
/// `K N exp(-||Gamma||/2)`, rate obtained from the embedding gauge by the
/// eigenvalue rate transfer (equivalently `(d-1)/d` times the embedding
/// rate).
pub fn eigenvalue_bound(cover: &RelativeCover, d: Dimension, k_const: f64) -> Result<DecayBound> {
    if k_const < 0.0 {
        return Err(Error::NegativeNorm(k_const));
    }
    let (_, gauge) = embedding_bound(cover, d)?;
    let transferred = eigen_rate_transfer(&gauge);
    DecayBound::new(k_const * transferred.value, transferred.rate, transferred.alpha)
}

fn check_dimension(cover: &RelativeCover, d: Dimension) -> Result<()> {
    if cover.ambient_dim() != d.get() as usize {
        return Err(Error::DimensionMismatch(format!(
            "cover lives in dimension {}, requested {}",
            cover.ambient_dim(),
            d
        )));
    }
    Ok(())
}

/// Depth of a point inside the outer union, measured as the best single-ball
/// boundary distance. A lower bound for the true distance to the complement,
/// hence safe for dilation factors.
fn outer_depth(outer: &DomainUnion, point: &[f64]) -> f64 {
    outer
        .balls()
        .iter()
        .map(|b| b.boundary_distance(point))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Greedy constructor of a relative cover: candidate balls of one fixed
/// radius sit on a grid over the inner set, each receiving the largest safe
/// dilation (with a 1% shrink); balls are kept greedily until every sampled
/// inner point is covered.
pub fn greedy_cover(
    outer: &DomainUnion,
    inner: &DomainUnion,
    ball_radius: f64,
    grid_step: f64,
) -> Result<RelativeCover> {
    if !(ball_radius > 0.0) {
        return Err(Error::InvalidRadius(ball_radius));
    }
    if !(grid_step > 0.0) {
        return Err(Error::Config("grid step must be positive".into()));
    }
    let d = inner.dim();
    // Sampled inner points that must be covered.
    let mut targets: Vec<Vec<f64>> = Vec::new();
    for ball in inner.balls() {
        targets.extend(ball_points(ball, 128, 0));
    }
    // Compact containment check: every inner sample must sit strictly
    // inside the outer set with room for a ball of positive dilation.
    for p in &targets {
        if outer_depth(outer, p) <= 0.0 {
            return Err(Error::InfeasibleCover(format!(
                "inner sample {p:?} is not strictly inside the outer set"
            )));
        }
    }

    // Candidate centers: grid nodes within one ball radius of some target.
    let mut low = vec![f64::INFINITY; d];
    let mut high = vec![f64::NEG_INFINITY; d];
    for ball in inner.balls() {
        for i in 0..d {
            low[i] = low[i].min(ball.center[i] - ball.radius);
            high[i] = high[i].max(ball.center[i] + ball.radius);
        }
    }
    let mut candidates: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut counts = vec![0usize; d];
    let mut start = vec![0.0f64; d];
    for i in 0..d {
        counts[i] = ((high[i] - low[i]) / grid_step).floor() as usize + 1;
        // Center the grid in the bounding box so coarse grids hit the
        // middle of the inner set.
        let span = (counts[i] - 1) as f64 * grid_step;
        start[i] = low[i] + 0.5 * (high[i] - low[i] - span);
    }
    let total: usize = counts.iter().product();
    if total > 2_000_000 {
        return Err(Error::Config(format!(
            "grid of {total} nodes is too fine; increase the step"
        )));
    }
    for flat in 0..total {
        let mut rem = flat;
        let mut center = vec![0.0; d];
        for i in 0..d {
            center[i] = start[i] + (rem % counts[i]) as f64 * grid_step;
            rem /= counts[i];
        }
        let depth = outer_depth(outer, &center);
        let gamma = 0.99 * depth / ball_radius;
        if gamma <= 1.0 {
            continue;
        }
        let ball = BallSpec::new(center.clone(), ball_radius)?;
        if targets.iter().any(|t| ball.contains(t)) {
            candidates.push((center, gamma));
        }
    }
    if candidates.is_empty() {
        return Err(Error::InfeasibleCover(
            "no grid ball admits a dilation factor above 1".into(),
        ));
    }

    // Greedy set cover over the sampled targets.
    let mut covered = vec![false; targets.len()];
    let mut chosen: Vec<(Vec<f64>, f64)> = Vec::new();
    loop {
        let mut best: Option<(usize, usize)> = None;
        for (ci, (center, _)) in candidates.iter().enumerate() {
            let ball = BallSpec::new(center.clone(), ball_radius)?;
            let gain = targets
                .iter()
                .zip(&covered)
                .filter(|(t, &c)| !c && ball.contains(t))
                .count();
            if gain > 0 && best.map(|(_, g)| gain > g).unwrap_or(true) {
                best = Some((ci, gain));
            }
        }
        match best {
            Some((ci, _)) => {
                let (center, gamma) = candidates[ci].clone();
                let ball = BallSpec::new(center, ball_radius)?;
                for (t, c) in targets.iter().zip(covered.iter_mut()) {
                    if ball.contains(t) {
                        *c = true;
                    }
                }
                chosen.push((ball.center.clone(), gamma));
            }
            None => break,
        }
        if covered.iter().all(|&c| c) {
            break;
        }
    }
    if !covered.iter().all(|&c| c) {
        return Err(Error::InfeasibleCover(
            "grid balls cannot cover every sampled inner point".into(),
        ));
    }
    let balls: Vec<BallSpec> = chosen
        .iter()
        .map(|(c, _)| BallSpec::new(c.clone(), ball_radius))
        .collect::<Result<_>>()?;
    let scalings: Vec<f64> = chosen.iter().map(|&(_, g)| g).collect();
    RelativeCover::new(balls, scalings, outer.clone(), inner.clone())
}

/// Default cover for a geometry file: the inner balls themselves, each with
/// the largest safe dilation (1% shrink).
pub fn cover_from_inner_balls(outer: &DomainUnion, inner: &DomainUnion) -> Result<RelativeCover> {
    let mut scalings = Vec::with_capacity(inner.balls().len());
    for ball in inner.balls() {
        let depth = outer_depth(outer, &ball.center);
        let gamma = 0.99 * depth / ball.radius;
        if gamma <= 1.0 {
            return Err(Error::InfeasibleCover(format!(
                "inner ball at {:?} admits no dilation above 1",
                ball.center
            )));
        }
        scalings.push(gamma);
    }
    RelativeCover::new(
        inner.balls().to_vec(),
        scalings,
        outer.clone(),
        inner.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::ExactBallSpectrum;
    use approx::assert_relative_eq;

    fn dim(d: u32) -> Dimension {
        Dimension::new(d).unwrap()
    }

    fn disc(center: &[f64], r: f64) -> DomainUnion {
        DomainUnion::single(BallSpec::new(center.to_vec(), r).unwrap())
    }

    fn simple_cover(d: usize, scalings: &[f64]) -> RelativeCover {
        // Synthetic but valid geometry: all cover balls equal the unit inner
        // ball, the outer ball is big enough for the largest dilation.
        let max = scalings.iter().cloned().fold(1.0f64, f64::max);
        let inner = DomainUnion::single(BallSpec::new(vec![0.0; d], 1.0).unwrap());
        let outer = DomainUnion::single(BallSpec::new(vec![0.0; d], max + 1.0).unwrap());
        let balls = vec![BallSpec::new(vec![0.0; d], 1.0).unwrap(); scalings.len()];
        RelativeCover::new(balls, scalings.to_vec(), outer, inner).unwrap()
    }

    #[test]
    fn efficiency_examples() {
        let e = std::f64::consts::E;
        let cover = simple_cover(2, &[e]);
        for k in 1..=4 {
            let eff = efficiency(&cover, k).unwrap();
            assert_eq!(eff.norm_min, 1.0);
            assert_eq!(eff.norm_k, 1.0);
        }

        let cover = simple_cover(2, &[2.0, e]);
        let eff = efficiency(&cover, 1).unwrap();
        assert_relative_eq!(eff.norm_min, (2.0f64).ln(), max_relative = 1e-15);
        assert_relative_eq!(
            eff.norm_k,
            1.0 / (1.0 / (2.0f64).ln() + 1.0),
            max_relative = 1e-13
        );

        // N equal scalings: norm_k = N^(-1/k) log gamma.
        let cover = simple_cover(2, &[3.0; 5]);
        for k in 1..=3u32 {
            let eff = efficiency(&cover, k).unwrap();
            assert_relative_eq!(
                eff.norm_k,
                (5.0f64).powf(-1.0 / f64::from(k)) * (3.0f64).ln(),
                max_relative = 1e-13
            );
        }
    }

    #[test]
    fn efficiency_monotonicity() {
        // Adding a ball can only decrease the norm; growing any scaling
        // increases it.
        let base = efficiency(&simple_cover(2, &[2.0, 3.0]), 2).unwrap();
        let larger = efficiency(&simple_cover(2, &[2.0, 3.0, 1.5]), 2).unwrap();
        assert!(larger.norm_k < base.norm_k);
        let grown = efficiency(&simple_cover(2, &[2.5, 3.0]), 2).unwrap();
        assert!(grown.norm_k > base.norm_k);
        assert!(base.norm_k <= base.norm_min);
    }

    #[test]
    fn validate_cover_dilation_condition() {
        let outer = disc(&[0.0, 0.0], 2.0);
        let inner = disc(&[0.0, 0.0], 1.0);
        let ball = BallSpec::new(vec![0.0, 0.0], 1.0).unwrap();
        let good = RelativeCover::new(
            vec![ball.clone()],
            vec![1.9],
            outer.clone(),
            inner.clone(),
        )
        .unwrap();
        assert!(validate_cover(&good, 200, 0).valid);

        let bad = RelativeCover::new(vec![ball], vec![2.1], outer, inner).unwrap();
        let report = validate_cover(&bad, 200, 0);
        assert!(!report.valid);
        assert_eq!(report.escaping_dilations, vec![0]);
    }

    #[test]
    fn validate_cover_coverage_condition() {
        // A cover ball that misses part of the inner set.
        let outer = disc(&[0.0, 0.0], 4.0);
        let inner = disc(&[0.0, 0.0], 1.0);
        let offset = BallSpec::new(vec![0.9, 0.0], 0.5).unwrap();
        let cover = RelativeCover::new(vec![offset], vec![1.5], outer, inner).unwrap();
        let report = validate_cover(&cover, 200, 0);
        assert!(!report.valid);
        assert!(!report.uncovered_points.is_empty());
    }

    #[test]
    fn single_ball_bound_reproduces_exact_gauge() {
        for &(d, gamma) in &[(2u32, 1.7), (3, 2.0), (4, 5.5)] {
            let cover = simple_cover(d as usize, &[gamma]);
            let (bound, gauge) = embedding_bound(&cover, dim(d)).unwrap();
            let exact = ExactBallSpectrum::new(dim(d), gamma).unwrap().gauge();
            // Bit-for-bit equality through the shared rate helper.
            assert_eq!(gauge.rate, exact.rate);
            assert_eq!(gauge.value, exact.value);
            assert_eq!(gauge.alpha, exact.alpha);
            assert_eq!(bound.prefactor, exact.value);
        }
    }

    #[test]
    fn embedding_bound_formula() {
        let e = std::f64::consts::E;
        let cover = simple_cover(2, &[2.0, e]);
        let (bound, gauge) = embedding_bound(&cover, dim(2)).unwrap();
        assert_relative_eq!(gauge.rate, 0.5 * 0.40938389, max_relative = 1e-6);
        assert_relative_eq!(gauge.value, (2.0f64).sqrt(), max_relative = 1e-14);
        assert_eq!(bound.alpha, 1.0);

        let cover = simple_cover(3, &[e, e, e]);
        let (_, gauge) = embedding_bound(&cover, dim(3)).unwrap();
        assert_relative_eq!(gauge.rate, 1.0 / (3.0f64).sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gauge.value, 3.0 * (-0.5f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn eigenvalue_bound_formula() {
        // Single ball in the plane: rate log(gamma)/4 and prefactor
        // K exp(-log(gamma)/2).
        let gamma = 1.9f64;
        let k_const = 3.0;
        let cover = simple_cover(2, &[gamma]);
        let bound = eigenvalue_bound(&cover, dim(2), k_const).unwrap();
        assert_relative_eq!(bound.rate, gamma.ln() / 4.0, max_relative = 1e-14);
        assert_relative_eq!(
            bound.prefactor,
            k_const * (-gamma.ln() / 2.0).exp(),
            max_relative = 1e-14
        );

        // Zero operator norm kills the bound.
        let zero = eigenvalue_bound(&cover, dim(2), 0.0).unwrap();
        assert_eq!(zero.prefactor, 0.0);

        // d = 3, gamma = e^2: rate (2/3) * 2.
        let cover = simple_cover(3, &[std::f64::consts::E.powi(2)]);
        let bound = eigenvalue_bound(&cover, dim(3), 1.0).unwrap();
        assert_relative_eq!(bound.rate, 4.0 / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn rate_relation_between_bounds() {
        // The eigenvalue rate is exactly (d-1)/d times the embedding rate,
        // and equals the closed form to a couple of ulps.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let d = rng.gen_range(2u32..=6);
            let n = rng.gen_range(1usize..=5);
            let scalings: Vec<f64> = (0..n).map(|_| rng.gen_range(1.05f64..10.0)).collect();
            let cover = simple_cover(d as usize, &scalings);
            let (_, gauge) = embedding_bound(&cover, dim(d)).unwrap();
            let eig = eigenvalue_bound(&cover, dim(d), 1.0).unwrap();
            let transferred = eigen_rate_transfer(&gauge);
            assert_eq!(eig.rate, transferred.rate);
            let closed_form = (d as f64 - 1.0) / d as f64 * gauge.rate;
            assert_relative_eq!(eig.rate, closed_form, max_relative = 1e-14);
        }
    }

    #[test]
    fn greedy_cover_single_ball_case() {
        let outer = disc(&[0.0, 0.0], 2.0);
        let inner = disc(&[0.0, 0.0], 1.0);
        let cover = greedy_cover(&outer, &inner, 1.0, 4.0).unwrap();
        assert_eq!(cover.size(), 1);
        assert_relative_eq!(cover.scalings()[0], 1.98, max_relative = 1e-12);
        assert!(validate_cover(&cover, 200, 0).valid);
    }

    #[test]
    fn greedy_cover_tight_gap_is_infeasible() {
        let outer = disc(&[0.0, 0.0], 2.0);
        let inner = disc(&[0.0, 0.0], 1.99);
        let result = greedy_cover(&outer, &inner, 1.0, 0.5);
        match result {
            Err(Error::InfeasibleCover(_)) => {}
            Ok(cover) => {
                // If feasible at all, scalings barely exceed 1.
                assert!(cover.scalings().iter().all(|&g| g < 1.02));
            }
            Err(other) => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn greedy_cover_efficiency_monotone_in_grid() {
        let outer = disc(&[0.0, 0.0], 2.0);
        let inner = disc(&[0.0, 0.0], 1.0);
        let mut last = 0.0;
        for &step in &[0.5, 0.25, 0.125] {
            let cover = greedy_cover(&outer, &inner, 1.0, step).unwrap();
            let eff = efficiency(&cover, 1).unwrap();
            assert!(eff.norm_min >= last - 1e-12, "step {step}");
            last = eff.norm_min;
        }
    }

    #[test]
    fn default_cover_from_geometry() {
        let outer = disc(&[0.0, 0.0], 3.0);
        let inner = DomainUnion::new(vec![
            BallSpec::new(vec![-1.25, 0.0], 0.625).unwrap(),
            BallSpec::new(vec![1.25, 0.0], 0.625).unwrap(),
        ])
        .unwrap();
        let cover = cover_from_inner_balls(&outer, &inner).unwrap();
        assert_eq!(cover.size(), 2);
        assert_relative_eq!(cover.scalings()[0], 0.99 * 1.75 / 0.625, max_relative = 1e-12);
        assert!(validate_cover(&cover, 300, 0).valid);
    }
}
