//! Exact polynomial arithmetic: multi-index polynomials over rationals,
//! harmonic subspaces as Laplacian nullspaces, sphere moments and ball
//! integrals.
//!
//! Everything here is exact. Inner products over balls reduce to monomial
//! moments of the normalized surface measure, which are rational; the
//! transcendental factor `d * Vol(B_1)` common to all Bergman inner products
//! in a fixed dimension is kept out of this layer ("reduced" integrals) and
//! reinstated only when a true value is reported.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::dims::{n_dim, Dimension};
use crate::error::Error;
use crate::geometry::unit_ball_volume;
use crate::linalg::rational_to_f64;
use crate::Result;

pub type MultiIndex = Vec<u32>;

/// Polynomial in `d` variables with rational coefficients, stored as a
/// sorted map from exponent vectors to coefficients. Which point the
/// variables are measured from is tracked by the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    d: usize,
    terms: BTreeMap<MultiIndex, BigRational>,
}

impl Poly {
    pub fn zero(d: usize) -> Self {
        Poly {
            d,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(alpha: MultiIndex, coeff: BigRational) -> Self {
        let d = alpha.len();
        let mut p = Poly::zero(d);
        p.add_term(alpha, coeff);
        p
    }

    pub fn constant(d: usize, value: BigRational) -> Self {
        Poly::monomial(vec![0; d], value)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, alpha: MultiIndex, coeff: BigRational) {
        debug_assert_eq!(alpha.len(), self.d);
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(alpha) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
        }
    }

    /// Total degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms
            .keys()
            .map(|alpha| alpha.iter().sum::<u32>())
            .max()
    }

    /// Degree if every term has the same total degree.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degrees = self.terms.keys().map(|alpha| alpha.iter().sum::<u32>());
        let first = degrees.next()?;
        if degrees.all(|g| g == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn scale(&self, factor: &BigRational) -> Poly {
        let mut out = Poly::zero(self.d);
        for (alpha, c) in &self.terms {
            out.add_term(alpha.clone(), c * factor);
        }
        out
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (alpha, c) in &other.terms {
            out.add_term(alpha.clone(), c.clone());
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.d);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let alpha: MultiIndex = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(alpha, ca * cb);
            }
        }
        out
    }

    /// `p(y + t)` as a polynomial in `y`: re-centers the polynomial.
    pub fn shift(&self, t: &[BigRational]) -> Poly {
        let mut out = Poly::zero(self.d);
        for (alpha, c) in &self.terms {
            // Expand prod_i (y_i + t_i)^alpha_i term by term.
            let mut partial: Vec<(MultiIndex, BigRational)> = vec![(vec![], BigRational::one())];
            for (i, &ai) in alpha.iter().enumerate() {
                let mut next = Vec::with_capacity(partial.len() * (ai as usize + 1));
                // Binomial row for (y + t_i)^ai.
                let mut binom = BigRational::one();
                let mut t_pow = vec![BigRational::one()];
                for _ in 0..ai {
                    t_pow.push(t_pow.last().unwrap() * &t[i]);
                }
                for b in 0..=ai {
                    if b > 0 {
                        binom = binom * BigRational::from_integer(BigInt::from(ai - b + 1))
                            / BigRational::from_integer(BigInt::from(b));
                    }
                    let coeff = &binom * &t_pow[(ai - b) as usize];
                    for (idx, pc) in &partial {
                        let mut nidx = idx.clone();
                        nidx.push(b);
                        next.push((nidx, pc * &coeff));
                    }
                }
                partial = next;
            }
            for (idx, pc) in partial {
                out.add_term(idx, pc * c);
            }
        }
        out
    }

    /// Laplacian as an exact coefficient map.
    pub fn laplacian(&self) -> Poly {
        let mut out = Poly::zero(self.d);
        for (alpha, c) in &self.terms {
            for i in 0..self.d {
                if alpha[i] >= 2 {
                    let factor =
                        BigRational::from_integer(BigInt::from(alpha[i]) * BigInt::from(alpha[i] - 1));
                    let mut beta = alpha.clone();
                    beta[i] -= 2;
                    out.add_term(beta, c * factor);
                }
            }
        }
        out
    }

    /// Scale denominators away and make the leading coefficient positive.
    pub fn normalize_integer(&self) -> Poly {
        if self.terms.is_empty() {
            return self.clone();
        }
        let mut lcm = BigInt::one();
        for c in self.terms.values() {
            lcm = num_integer::lcm(lcm, c.denom().clone());
        }
        let mut gcd = BigInt::zero();
        for c in self.terms.values() {
            gcd = num_integer::gcd(gcd, (c.numer() * &lcm / c.denom()).abs());
        }
        if gcd.is_zero() {
            gcd = BigInt::one();
        }
        let factor = BigRational::new(lcm, gcd);
        let scaled = self.scale(&factor);
        let leading_negative = scaled
            .terms
            .iter()
            .next_back()
            .map(|(_, c)| c.is_negative())
            .unwrap_or(false);
        if leading_negative {
            scaled.scale(&-BigRational::one())
        } else {
            scaled
        }
    }

    /// Snapshot with `f64` coefficients for fast repeated evaluation.
    pub fn to_f64(&self) -> PolyF64 {
        PolyF64 {
            terms: self
                .terms
                .iter()
                .map(|(alpha, c)| (alpha.clone(), rational_to_f64(c)))
                .collect(),
        }
    }
}

/// Float snapshot of a [`Poly`], evaluated by direct monomial summation.
#[derive(Debug, Clone)]
pub struct PolyF64 {
    terms: Vec<(MultiIndex, f64)>,
}

impl PolyF64 {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut sum = 0.0;
        for (alpha, c) in &self.terms {
            let mut term = *c;
            for (i, &ai) in alpha.iter().enumerate() {
                term *= x[i].powi(ai as i32);
            }
            sum += term;
        }
        sum
    }

    pub fn terms(&self) -> &[(MultiIndex, f64)] {
        &self.terms
    }
}

/// Multi-indices of total degree `k` in `d` variables, lexicographic.
pub fn multi_indices(d: usize, k: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut current = vec![0u32; d];
    fill(&mut out, &mut current, 0, k);
    out
}

fn fill(out: &mut Vec<MultiIndex>, current: &mut MultiIndex, pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for v in (0..=remaining).rev() {
        current[pos] = v;
        fill(out, current, pos + 1, remaining - v);
    }
    current[pos] = 0;
}

/// Basis of the homogeneous harmonic polynomials of degree `k` in `d`
/// variables, computed as the exact nullspace of the Laplacian acting on
/// degree-`k` coefficient space. Dimension is checked against the
/// combinatorial count.
pub fn harmonic_space(d: Dimension, k: u32) -> Result<Vec<Poly>> {
    let dd = d.get() as usize;
    let cols = multi_indices(dd, k);
    let expected = n_dim(d, k)?;
    if k < 2 {
        // No constraints: every homogeneous polynomial of degree < 2 is
        // harmonic.
        let basis: Vec<Poly> = cols
            .iter()
            .map(|alpha| Poly::monomial(alpha.clone(), BigRational::one()))
            .collect();
        check_dimension(basis.len(), expected)?;
        return Ok(basis);
    }
    let rows = multi_indices(dd, k - 2);
    let row_of: BTreeMap<&MultiIndex, usize> =
        rows.iter().enumerate().map(|(i, r)| (r, i)).collect();

    // Constraint matrix of the Laplacian: entry (beta, alpha) is
    // alpha_i (alpha_i - 1) whenever alpha = beta + 2 e_i.
    let mut matrix = vec![vec![BigRational::zero(); cols.len()]; rows.len()];
    for (j, alpha) in cols.iter().enumerate() {
        for i in 0..dd {
            if alpha[i] >= 2 {
                let mut beta = alpha.clone();
                beta[i] -= 2;
                let r = row_of[&beta];
                matrix[r][j] = BigRational::from_integer(
                    BigInt::from(alpha[i]) * BigInt::from(alpha[i] - 1),
                );
            }
        }
    }

    let kernel = rational_kernel(matrix, cols.len());
    check_dimension(kernel.len(), expected)?;

    let basis = kernel
        .into_iter()
        .map(|coeffs| {
            let mut p = Poly::zero(dd);
            for (j, c) in coeffs.into_iter().enumerate() {
                p.add_term(cols[j].clone(), c);
            }
            p.normalize_integer()
        })
        .collect();
    Ok(basis)
}

fn check_dimension(computed: usize, expected: u64) -> Result<()> {
    if computed as u64 != expected {
        return Err(Error::HarmonicDimension { computed, expected });
    }
    Ok(())
}

/// Kernel basis of a rational matrix by Gauss-Jordan elimination.
fn rational_kernel(mut matrix: Vec<Vec<BigRational>>, cols: usize) -> Vec<Vec<BigRational>> {
    let rows = matrix.len();
    let mut pivot_col_of_row = Vec::new();
    let mut pivot_cols = vec![false; cols];
    let mut row = 0;
    for col in 0..cols {
        let pivot = (row..rows).find(|&r| !matrix[r][col].is_zero());
        let Some(p) = pivot else { continue };
        matrix.swap(row, p);
        let inv = matrix[row][col].clone();
        for c in col..cols {
            matrix[row][c] = &matrix[row][c] / &inv;
        }
        for r in 0..rows {
            if r != row && !matrix[r][col].is_zero() {
                let factor = matrix[r][col].clone();
                for c in col..cols {
                    let sub = &factor * &matrix[row][c];
                    matrix[r][c] = &matrix[r][c] - sub;
                }
            }
        }
        pivot_col_of_row.push(col);
        pivot_cols[col] = true;
        row += 1;
        if row == rows {
            break;
        }
    }
    let mut kernel = Vec::new();
    for free in 0..cols {
        if pivot_cols[free] {
            continue;
        }
        let mut v = vec![BigRational::zero(); cols];
        v[free] = BigRational::one();
        for (r, &pc) in pivot_col_of_row.iter().enumerate() {
            v[pc] = -matrix[r][free].clone();
        }
        kernel.push(v);
    }
    kernel
}

/// Double factorial of the odd number `n` (with `(-1)!! = 1`).
fn odd_double_factorial(n: i64) -> BigInt {
    let mut result = BigInt::one();
    let mut i = 1i64;
    while i <= n {
        result *= BigInt::from(i);
        i += 2;
    }
    result
}

/// Monomial moment of the normalized surface measure on the unit sphere in
/// `d = alpha.len()` dimensions:
/// zero when any exponent is odd, otherwise
/// `prod_i (alpha_i - 1)!! / prod_{j=1}^{|alpha|/2} (d + 2j - 2)`.
pub fn sphere_moment(alpha: &[u32]) -> BigRational {
    if alpha.iter().any(|&a| a % 2 == 1) {
        return BigRational::zero();
    }
    let d = alpha.len() as i64;
    let total: u32 = alpha.iter().sum();
    let mut numer = BigInt::one();
    for &a in alpha {
        numer *= odd_double_factorial(i64::from(a) - 1);
    }
    let mut denom = BigInt::one();
    for j in 1..=i64::from(total / 2) {
        denom *= BigInt::from(d + 2 * j - 2);
    }
    BigRational::new(numer, denom)
}

/// Reduced monomial moment over the ball of radius `r` about the origin:
/// the true moment divided by `d * Vol(B_1)`, namely
/// `r^(d+|alpha|) / (d+|alpha|) * sphere_moment(alpha)`.
pub fn reduced_ball_moment(alpha: &[u32], radius: &BigRational) -> BigRational {
    let moment = sphere_moment(alpha);
    if moment.is_zero() {
        return moment;
    }
    let d = alpha.len() as u32;
    let total: u32 = alpha.iter().sum();
    let power = d + total;
    let mut r_pow = BigRational::one();
    for _ in 0..power {
        r_pow *= radius;
    }
    moment * r_pow / BigRational::from_integer(BigInt::from(power))
}

/// Reduced integral of `p` over the ball of radius `radius` centered at
/// `poly_center + shift`, where `p`'s variables are measured from
/// `poly_center`. Exact.
pub fn reduced_ball_integral(p: &Poly, shift: &[BigRational], radius: &BigRational) -> BigRational {
    let recentered = if shift.iter().all(|t| t.is_zero()) {
        p.clone()
    } else {
        p.shift(shift)
    };
    let mut total = BigRational::zero();
    for (alpha, c) in recentered.terms() {
        let m = reduced_ball_moment(alpha, radius);
        if !m.is_zero() {
            total += c * m;
        }
    }
    total
}

/// Memoized reduced ball moments for one fixed radius; Gram assembly asks
/// for the same moments thousands of times.
pub struct BallMomentTable {
    radius: BigRational,
    cache: BTreeMap<MultiIndex, BigRational>,
}

impl BallMomentTable {
    pub fn new(radius: BigRational) -> Self {
        BallMomentTable {
            radius,
            cache: BTreeMap::new(),
        }
    }

    pub fn moment(&mut self, alpha: &[u32]) -> BigRational {
        if alpha.iter().any(|&a| a % 2 == 1) {
            return BigRational::zero();
        }
        if let Some(m) = self.cache.get(alpha) {
            return m.clone();
        }
        let m = reduced_ball_moment(alpha, &self.radius);
        self.cache.insert(alpha.to_vec(), m.clone());
        m
    }

    /// Reduced integral of a polynomial over the centered ball.
    pub fn integral(&mut self, p: &Poly) -> BigRational {
        let mut total = BigRational::zero();
        for (alpha, c) in p.terms() {
            let m = self.moment(alpha);
            if !m.is_zero() {
                total += c * m;
            }
        }
        total
    }

    /// Reduced integral of a product without materializing the product
    /// polynomial.
    pub fn product_integral(&mut self, a: &Poly, b: &Poly) -> BigRational {
        let mut total = BigRational::zero();
        for (alpha, ca) in a.terms() {
            for (beta, cb) in b.terms() {
                let gamma: MultiIndex = alpha.iter().zip(beta).map(|(x, y)| x + y).collect();
                let m = self.moment(&gamma);
                if !m.is_zero() {
                    total += ca * cb * m;
                }
            }
        }
        total
    }
}

/// True Bergman inner product of two homogeneous polynomials over a ball
/// centered where the polynomials are (both about the ball center), as an
/// f64: `d Vol(B_1) r^(d+n+m)/(d+n+m) * integral_S f g dsigma`.
pub fn ball_inner_product(f: &Poly, g: &Poly, radius: f64) -> Result<f64> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch(
            "inner product operands have different variable counts".into(),
        ));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidRadius(radius));
    }
    let d = f.dim();
    let r = BigRational::from_float(radius).ok_or(Error::InvalidRadius(radius))?;
    let reduced = reduced_ball_integral(&f.mul(g), &vec![BigRational::zero(); d], &r);
    Ok(d as f64 * unit_ball_volume(d) * rational_to_f64(&reduced))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn multi_index_enumeration() {
        let idx = multi_indices(2, 2);
        assert_eq!(idx, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(multi_indices(3, 4).len(), 15);
    }

    #[test]
    fn laplacian_of_monomials() {
        // Laplacian of x^2 y is 2y.
        let p = Poly::monomial(vec![2, 1], BigRational::one());
        let lap = p.laplacian();
        let expected = Poly::monomial(vec![0, 1], rat(2, 1));
        assert_eq!(lap, expected);
    }

    #[test]
    fn harmonic_space_degree_two_in_plane() {
        let d = Dimension::new(2).unwrap();
        let basis = harmonic_space(d, 2).unwrap();
        assert_eq!(basis.len(), 2);
        for p in &basis {
            assert!(p.laplacian().is_zero());
            assert_eq!(p.homogeneous_degree(), Some(2));
        }
    }

    #[test]
    fn harmonic_space_dimensions_match_counts() {
        for d in 2u32..=5 {
            let dim = Dimension::new(d).unwrap();
            let kmax = if d <= 3 { 8 } else { 5 };
            for k in 0..=kmax {
                let basis = harmonic_space(dim, k).unwrap();
                assert_eq!(basis.len() as u64, n_dim(dim, k).unwrap(), "d={d} k={k}");
                for p in &basis {
                    assert!(p.laplacian().is_zero(), "d={d} k={k}");
                }
            }
        }
    }

    #[test]
    fn sphere_moment_values() {
        assert!(sphere_moment(&[1, 0]).is_zero());
        assert_eq!(sphere_moment(&[2, 0, 0]), rat(1, 3));
        assert_eq!(sphere_moment(&[2, 2]), rat(1, 8));
        assert_eq!(sphere_moment(&[4, 0]), rat(3, 8));
        assert_eq!(sphere_moment(&[2, 2, 0]), rat(1, 15));
        assert_eq!(sphere_moment(&[0, 0]), BigRational::one());
    }

    #[test]
    fn ball_inner_product_examples() {
        use std::f64::consts::PI;
        // (x, x) over the unit disc is pi/4.
        let x = Poly::monomial(vec![1, 0], BigRational::one());
        assert_relative_eq!(
            ball_inner_product(&x, &x, 1.0).unwrap(),
            PI / 4.0,
            max_relative = 1e-14
        );
        // Different-degree harmonics are orthogonal.
        let mut x2y2 = Poly::monomial(vec![2, 0], BigRational::one());
        x2y2.add_term(vec![0, 2], -BigRational::one());
        assert_eq!(ball_inner_product(&x, &x2y2, 2.5).unwrap(), 0.0);
        // Constants give the ball volume.
        for d in 2..=4 {
            let one = Poly::constant(d, BigRational::one());
            let r = 1.3f64;
            assert_relative_eq!(
                ball_inner_product(&one, &one, r).unwrap(),
                unit_ball_volume(d) * r.powi(d as i32),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn quadrature_cross_check_of_disc_moment() {
        // Independent polar-quadrature evaluation of (x, x) over the unit
        // disc, compared against the exact moment formula.
        let n = 40;
        let mut integral = 0.0;
        for i in 0..n {
            // Midpoint rule in rho^2 substitution and angle; plenty for x^2.
            let rho = ((i as f64 + 0.5) / n as f64).sqrt();
            for j in 0..n {
                let theta = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
                let x = rho * theta.cos();
                integral += x * x / (n * n) as f64 * std::f64::consts::PI;
            }
        }
        assert_relative_eq!(integral, std::f64::consts::PI / 4.0, max_relative = 1e-3);
    }

    #[test]
    fn shift_recenters_polynomials() {
        // (x - 1)^2 shifted by t = 1 becomes x^2 evaluated about the new
        // origin: p(y + 1) where p(x) = x^2.
        let p = Poly::monomial(vec![2], BigRational::one());
        let q = p.shift(&[rat(1, 1)]);
        let mut expected = Poly::monomial(vec![2], BigRational::one());
        expected.add_term(vec![1], rat(2, 1));
        expected.add_term(vec![0], rat(1, 1));
        assert_eq!(q, expected);
    }

    #[test]
    fn shift_preserves_ball_integrals() {
        // Integrating p over a ball at c equals integrating the shifted
        // polynomial over the centered ball.
        let mut p = Poly::monomial(vec![3, 0], rat(2, 1));
        p.add_term(vec![1, 1], rat(-1, 3));
        p.add_term(vec![0, 0], rat(5, 1));
        let r = rat(3, 2);
        let t = vec![rat(1, 4), rat(-2, 7)];
        let direct = reduced_ball_integral(&p, &t, &r);
        let shifted = p.shift(&t);
        let centered = reduced_ball_integral(&shifted, &[rat(0, 1), rat(0, 1)], &r);
        assert_eq!(direct, centered);
    }

    #[test]
    fn monte_carlo_sphere_moments() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _case in 0..20 {
            let d = rng.gen_range(2..=5usize);
            let alpha: Vec<u32> = loop {
                let candidate: Vec<u32> = (0..d).map(|_| 2 * rng.gen_range(0..=2u32)).collect();
                if candidate.iter().sum::<u32>() <= 8 {
                    break candidate;
                }
            };
            let exact = rational_to_f64(&sphere_moment(&alpha));
            let samples = 1_000_000;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..samples {
                let g: Vec<f64> = (0..d)
                    .map(|_| {
                        let u1: f64 = rng.gen_range(1e-12..1.0);
                        let u2: f64 = rng.gen_range(0.0..1.0);
                        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
                    })
                    .collect();
                let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                let mut value = 1.0;
                for (i, &a) in alpha.iter().enumerate() {
                    value *= (g[i] / norm).powi(a as i32);
                }
                sum += value;
                sum_sq += value * value;
            }
            let mean = sum / samples as f64;
            let var = (sum_sq / samples as f64 - mean * mean).max(0.0);
            let stderr = (var / samples as f64).sqrt();
            assert!(
                (mean - exact).abs() <= 3.0 * stderr + 1e-12,
                "alpha={alpha:?} mean={mean} exact={exact} stderr={stderr}"
            );
        }
    }

    #[test]
    fn integer_normalization() {
        let mut p = Poly::monomial(vec![2, 0], rat(-2, 6));
        p.add_term(vec![0, 2], rat(1, 3));
        let n = p.normalize_integer();
        // Denominators cleared, common factor removed, leading
        // (lexicographically last) coefficient positive: x^2 - y^2.
        let mut expected = Poly::monomial(vec![2, 0], rat(1, 1));
        expected.add_term(vec![0, 2], rat(-1, 1));
        assert_eq!(n, expected);
    }
}
