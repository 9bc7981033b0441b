//! Basic semialgebraic sets, standing-assumption checks, and closed-form
//! Lebesgue moments over box and ball outer domains.
//!
//! Set descriptions are normalized so that the unit-ball inequality
//! `1 - sum x_k^2 >= 0` is always present; positivity certificates need an
//! Archimedean description, and the normalization makes every described set
//! a subset of the unit ball by construction.

use thiserror::Error;

use crate::montecarlo;
use crate::poly::{Basis, MultiIndex, Polynomial};

#[derive(Debug, Error)]
pub enum SemialgError {
    #[error("polynomial dimension {got} does not match set dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("domain must be contained in the unit ball: {0}")]
    NotInUnitBall(String),
    #[error("invalid domain parameter: {0}")]
    InvalidParameter(String),
    #[error("no axis-aligned box of half-width >= {tol} around the origin fits inside the set")]
    NoFeasibleBox { tol: f64 },
}

/// Outcome of the standing-assumption check.
#[derive(Debug, Error)]
pub enum AssumptionViolation {
    #[error("origin is not interior: inequality {index} evaluates to {value} at 0")]
    Interior { index: usize, value: f64 },
    #[error(
        "inclusion violated: point {witness:?} is in the inner set but outside the outer domain"
    )]
    Inclusion { witness: Vec<f64> },
    #[error(transparent)]
    Geometry(#[from] SemialgError),
}

/// Which side of the sandwich a set describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetRole {
    InnerK,
    OuterX,
}

/// Intersection of polynomial inequalities `g_i >= 0`.
#[derive(Debug, Clone)]
pub struct SemialgebraicSet {
    dim: usize,
    role: SetRole,
    inequalities: Vec<Polynomial>,
}

/// The polynomial `1 - sum_k x_k^2` in the monomial basis.
pub fn unit_ball_polynomial(n: usize) -> Polynomial {
    let mut terms = vec![(MultiIndex::zero(n), 1.0)];
    for k in 0..n {
        terms.push((MultiIndex::axis(n, k, 2), -1.0));
    }
    Polynomial::from_terms(n, Basis::Monomial, &terms).unwrap()
}

fn is_unit_ball_polynomial(g: &Polynomial) -> bool {
    let target = unit_ball_polynomial(g.dimension());
    let gm = g.to_basis(Basis::Monomial);
    if gm.num_terms() != target.num_terms() {
        return false;
    }
    let matches = target
        .terms()
        .all(|(idx, c)| (gm.coeff(idx) - c).abs() <= 1e-12);
    matches
}

impl SemialgebraicSet {
    /// Builds the set and appends the unit-ball inequality if it is absent.
    pub fn new(
        dim: usize,
        role: SetRole,
        inequalities: Vec<Polynomial>,
    ) -> Result<Self, SemialgError> {
        for g in &inequalities {
            if g.dimension() != dim {
                return Err(SemialgError::DimensionMismatch {
                    expected: dim,
                    got: g.dimension(),
                });
            }
        }
        let mut inequalities = inequalities;
        if !inequalities.iter().any(is_unit_ball_polynomial) {
            inequalities.push(unit_ball_polynomial(dim));
        }
        Ok(SemialgebraicSet {
            dim,
            role,
            inequalities,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn role(&self) -> SetRole {
        self.role
    }

    pub fn inequalities(&self) -> &[Polynomial] {
        &self.inequalities
    }

    /// True iff every inequality is nonnegative at `x`.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.inequalities
            .iter()
            .all(|g| g.evaluate(x).map(|v| v >= 0.0).unwrap_or(false))
    }
}

/// Outer domain shape; both have analytically computable moments.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Euclidean ball of the given radius centered at the origin.
    Ball { radius: f64 },
    /// Axis-aligned box `[-a_k, a_k]` per axis.
    Box { half_widths: Vec<f64> },
}

/// The outer bounding set `X`, with its semialgebraic description attached.
#[derive(Debug, Clone)]
pub struct OuterDomain {
    dim: usize,
    shape: Shape,
    set: SemialgebraicSet,
}

impl OuterDomain {
    pub fn ball(dim: usize, radius: f64) -> Result<Self, SemialgError> {
        if !radius.is_finite() || radius <= 0.0 {
            return Err(SemialgError::InvalidParameter(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        if radius > 1.0 + 1e-12 {
            return Err(SemialgError::NotInUnitBall(format!(
                "ball radius {radius} exceeds 1"
            )));
        }
        let mut terms = vec![(MultiIndex::zero(dim), radius * radius)];
        for k in 0..dim {
            terms.push((MultiIndex::axis(dim, k, 2), -1.0));
        }
        let g = Polynomial::from_terms(dim, Basis::Monomial, &terms).unwrap();
        let set = SemialgebraicSet::new(dim, SetRole::OuterX, vec![g])?;
        Ok(OuterDomain {
            dim,
            shape: Shape::Ball { radius },
            set,
        })
    }

    pub fn unit_ball(dim: usize) -> Self {
        Self::ball(dim, 1.0).unwrap()
    }

    pub fn boxed(dim: usize, half_widths: Vec<f64>) -> Result<Self, SemialgError> {
        if half_widths.len() != dim {
            return Err(SemialgError::DimensionMismatch {
                expected: dim,
                got: half_widths.len(),
            });
        }
        if half_widths.iter().any(|&a| !a.is_finite() || a <= 0.0) {
            return Err(SemialgError::InvalidParameter(
                "box half-widths must be positive".into(),
            ));
        }
        let corner_sq: f64 = half_widths.iter().map(|a| a * a).sum();
        if corner_sq > 1.0 + 1e-12 {
            return Err(SemialgError::NotInUnitBall(format!(
                "box corner norm {} exceeds 1",
                corner_sq.sqrt()
            )));
        }
        let mut gs = Vec::with_capacity(dim);
        for (k, &a) in half_widths.iter().enumerate() {
            gs.push(
                Polynomial::from_terms(
                    dim,
                    Basis::Monomial,
                    &[
                        (MultiIndex::zero(dim), a * a),
                        (MultiIndex::axis(dim, k, 2), -1.0),
                    ],
                )
                .unwrap(),
            );
        }
        let set = SemialgebraicSet::new(dim, SetRole::OuterX, gs)?;
        Ok(OuterDomain {
            dim,
            shape: Shape::Box { half_widths },
            set,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn as_set(&self) -> &SemialgebraicSet {
        &self.set
    }

    /// Exact shape containment test (cheaper and sharper than the
    /// polynomial description).
    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.shape {
            Shape::Ball { radius } => {
                x.iter().map(|v| v * v).sum::<f64>() <= radius * radius + 1e-15
            }
            Shape::Box { half_widths } => {
                x.iter().zip(half_widths).all(|(v, a)| v.abs() <= a + 1e-15)
            }
        }
    }

    /// Exact volume of the domain.
    pub fn volume(&self) -> f64 {
        match &self.shape {
            Shape::Ball { radius } => unit_ball_volume(self.dim) * radius.powi(self.dim as i32),
            Shape::Box { half_widths } => half_widths.iter().map(|a| 2.0 * a).product(),
        }
    }
}

/// Volume of the unit Euclidean ball in `n` dimensions.
pub fn unit_ball_volume(n: usize) -> f64 {
    let half_n = n as f64 / 2.0;
    (half_n * std::f64::consts::PI.ln() - ln_gamma_half(n + 2)).exp()
}

/// ln Gamma(k/2) for integer k >= 1, exact recurrences on half-integers.
fn ln_gamma_half(k: usize) -> f64 {
    // Gamma(1/2) = sqrt(pi), Gamma(1) = 1, Gamma(z+1) = z Gamma(z).
    let mut acc: f64;
    let mut z: f64;
    if k.is_multiple_of(2) {
        acc = 0.0; // ln Gamma(1)
        z = 1.0;
    } else {
        acc = 0.5 * std::f64::consts::PI.ln(); // ln Gamma(1/2)
        z = 0.5;
    }
    while z + 0.5 < k as f64 / 2.0 + 0.25 {
        acc += z.ln();
        z += 1.0;
    }
    acc
}

/// Geometry report produced by [`certify_assumptions`].
#[derive(Debug, Clone)]
pub struct GeometrySummary {
    /// Half-width of the largest certified origin-centered box inside `K`.
    pub inner_box_half_width: f64,
    /// Reciprocal of the half-width.
    pub r: f64,
    /// Minimum of the defining inequalities of `K` at the origin.
    pub interior_margin: f64,
}

/// Checks the standing assumptions: the origin is interior to `K`, and no
/// sampled point of the unit ball lies in `K` but outside `X`. The inclusion
/// check is statistical (sampling only); the interior check is exact at the
/// origin. On success the inscribed-box geometry is computed with default
/// resolution.
pub fn certify_assumptions(
    k_set: &SemialgebraicSet,
    x_dom: &OuterDomain,
    samples: usize,
    seed: u64,
) -> Result<GeometrySummary, AssumptionViolation> {
    let n = k_set.dimension();
    let origin = vec![0.0; n];
    let mut margin = f64::INFINITY;
    for (i, g) in k_set.inequalities().iter().enumerate() {
        let v = g.evaluate(&origin).expect("dimension checked at build");
        if v <= 0.0 {
            return Err(AssumptionViolation::Interior { index: i, value: v });
        }
        margin = margin.min(v);
    }
    // K is a subset of the unit ball after normalization, so sampling the
    // unit ball can exhibit any point of K \ X.
    let ball = OuterDomain::unit_ball(n);
    for x in montecarlo::sample(&ball, samples, seed) {
        if k_set.contains(&x) && !x_dom.contains(&x) {
            return Err(AssumptionViolation::Inclusion { witness: x });
        }
    }
    let s = inner_box_half_width(k_set, 1e-4, default_grid_per_face(n))?;
    Ok(GeometrySummary {
        inner_box_half_width: s,
        r: 1.0 / s,
        interior_margin: margin,
    })
}

/// Default number of surface grid points per box face: `33^(n-1)`.
pub fn default_grid_per_face(n: usize) -> usize {
    33usize.pow(n.saturating_sub(1) as u32)
}

/// Largest `s` (within `tol`) such that every grid point on the surface of
/// `[-s, s]^n` belongs to the set, found by bisection over `(0, 1]`.
pub fn inner_box_half_width(
    set: &SemialgebraicSet,
    tol: f64,
    grid_per_face: usize,
) -> Result<f64, SemialgError> {
    let n = set.dimension();
    let feasible = |s: f64| surface_grid(n, s, grid_per_face).all(|x| set.contains(&x));
    if !feasible(tol) {
        return Err(SemialgError::NoFeasibleBox { tol });
    }
    if feasible(1.0) {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (tol, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Grid points covering the surface of `[-s, s]^n`; for `n = 1` the two
/// endpoints, otherwise `grid_per_face` points per face laid out as a tensor
/// grid including the face boundary (so box corners are always tested).
fn surface_grid(n: usize, s: f64, grid_per_face: usize) -> impl Iterator<Item = Vec<f64>> {
    let mut points = Vec::new();
    if n == 1 {
        points.push(vec![-s]);
        points.push(vec![s]);
    } else {
        let per_axis = (grid_per_face as f64)
            .powf(1.0 / (n - 1) as f64)
            .round()
            .max(2.0) as usize;
        let line: Vec<f64> = (0..per_axis)
            .map(|i| -s + 2.0 * s * i as f64 / (per_axis - 1) as f64)
            .collect();
        for axis in 0..n {
            for &sign in &[-1.0, 1.0] {
                let mut counters = vec![0usize; n - 1];
                loop {
                    let mut x = Vec::with_capacity(n);
                    let mut ci = 0;
                    for k in 0..n {
                        if k == axis {
                            x.push(sign * s);
                        } else {
                            x.push(line[counters[ci]]);
                            ci += 1;
                        }
                    }
                    points.push(x);
                    // odometer increment
                    let mut carry = true;
                    for c in counters.iter_mut() {
                        if carry {
                            *c += 1;
                            if *c == per_axis {
                                *c = 0;
                            } else {
                                carry = false;
                            }
                        }
                    }
                    if carry {
                        break;
                    }
                }
            }
        }
    }
    points.into_iter()
}

/// Closed-form Lebesgue moment `∫_X x^alpha dx`.
///
/// Box with half-widths `a_k`: product over axes of
/// `(a^(e+1) - (-a)^(e+1)) / (e+1)`. Ball of radius `R`: zero if any
/// exponent is odd, otherwise
/// `R^(n+|alpha|) * prod_k Gamma((alpha_k+1)/2) / Gamma((n+|alpha|)/2 + 1)`,
/// evaluated in the log domain.
pub fn lebesgue_moment(x_dom: &OuterDomain, alpha: &MultiIndex) -> f64 {
    assert_eq!(alpha.len(), x_dom.dimension());
    match &x_dom.shape {
        Shape::Box { half_widths } => alpha
            .exponents()
            .iter()
            .zip(half_widths)
            .map(|(&e, &a)| {
                if e % 2 == 1 {
                    0.0
                } else {
                    2.0 * a.powi(e as i32 + 1) / (e as f64 + 1.0)
                }
            })
            .product(),
        Shape::Ball { radius } => {
            if alpha.exponents().iter().any(|&e| e % 2 == 1) {
                return 0.0;
            }
            let n = x_dom.dimension();
            let total: u32 = alpha.degree();
            let mut ln = (n as f64 + total as f64) * radius.ln();
            for &e in alpha.exponents() {
                ln += ln_gamma_half(e as usize + 1);
            }
            ln -= ln_gamma_half(n + total as usize + 2);
            ln.exp()
        }
    }
}

/// `∫_{-a}^{a} T_e(t) dt` via the Chebyshev antiderivative
/// `∫ T_e = (T_{e+1}/(e+1) - T_{e-1}/(e-1)) / 2`, which is stable for
/// `|a| <= 1` at any degree.
fn chebyshev_box_moment(e: u32, a: f64) -> f64 {
    if e % 2 == 1 {
        return 0.0;
    }
    let antiderivative = |t: f64| -> f64 {
        let vals = crate::poly::chebyshev_values(t, e + 1);
        match e {
            0 => t,
            1 => 0.25 * (vals[2] + 1.0),
            _ => {
                0.5 * (vals[(e + 1) as usize] / (e as f64 + 1.0)
                    - vals[(e - 1) as usize] / (e as f64 - 1.0))
            }
        }
    };
    antiderivative(a) - antiderivative(-a)
}

/// Moment of a single basis element over `X` in the given basis.
///
/// Chebyshev moments over boxes factor into univariate integrals and stay
/// well-scaled at degree 100; monomial conversion is only used for Chebyshev
/// moments over balls in dimension two and higher, where the hierarchy runs
/// at low degree.
pub fn basis_moment(x_dom: &OuterDomain, alpha: &MultiIndex, basis: Basis) -> f64 {
    match basis {
        Basis::Monomial => lebesgue_moment(x_dom, alpha),
        Basis::ChebyshevTensor => match &x_dom.shape {
            Shape::Box { half_widths } => alpha
                .exponents()
                .iter()
                .zip(half_widths)
                .map(|(&e, &a)| chebyshev_box_moment(e, a))
                .product(),
            Shape::Ball { radius } => {
                let n = x_dom.dimension();
                if n == 1 {
                    return chebyshev_box_moment(alpha.exponents()[0], *radius);
                }
                let mono = Polynomial::basis_element(n, Basis::ChebyshevTensor, alpha.clone())
                    .to_basis(Basis::Monomial);
                mono.terms()
                    .map(|(idx, c)| c * lebesgue_moment(x_dom, idx))
                    .sum()
            }
        },
    }
}

/// `∫_X p(x) dx`, exact up to floating point, using the moment formulas for
/// whichever basis the polynomial is stored in.
pub fn integrate(x_dom: &OuterDomain, p: &Polynomial) -> f64 {
    assert_eq!(p.dimension(), x_dom.dimension());
    p.terms()
        .map(|(idx, c)| c * basis_moment(x_dom, idx, p.basis()))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo;
    use crate::poly::graded_basis;
    use std::f64::consts::PI;

    fn interval_k(half: f64) -> SemialgebraicSet {
        let g = Polynomial::from_terms(
            1,
            Basis::Monomial,
            &[
                (MultiIndex::zero(1), half * half),
                (MultiIndex::axis(1, 0, 2), -1.0),
            ],
        )
        .unwrap();
        SemialgebraicSet::new(1, SetRole::InnerK, vec![g]).unwrap()
    }

    fn disk_k(radius: f64) -> SemialgebraicSet {
        let g = Polynomial::from_terms(
            2,
            Basis::Monomial,
            &[
                (MultiIndex::zero(2), radius * radius),
                (MultiIndex::axis(2, 0, 2), -1.0),
                (MultiIndex::axis(2, 1, 2), -1.0),
            ],
        )
        .unwrap();
        SemialgebraicSet::new(2, SetRole::InnerK, vec![g]).unwrap()
    }

    /// Monte Carlo oracle for `∫_X x^alpha dx`, used to validate the closed
    /// forms before anything downstream relies on them.
    fn mc_moment(x_dom: &OuterDomain, alpha: &[u32], samples: usize, seed: u64) -> (f64, f64) {
        let pts = montecarlo::sample(x_dom, samples, seed);
        let vol = x_dom.volume();
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for x in &pts {
            let v: f64 = x
                .iter()
                .zip(alpha)
                .map(|(&xi, &e)| xi.powi(e as i32))
                .product();
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / samples as f64;
        let var = (sum_sq / samples as f64 - mean * mean).max(0.0);
        (vol * mean, vol * (var / samples as f64).sqrt())
    }

    #[test]
    fn oracle_validates_ball_moment_closed_form() {
        let b2 = OuterDomain::ball(2, 1.0).unwrap();
        let cases: &[(&[u32], f64)] = &[
            (&[0, 0], PI),
            (&[2, 0], PI / 4.0),
            (&[2, 2], PI / 24.0),
            (&[4, 0], PI / 8.0),
            (&[1, 0], 0.0),
        ];
        for (i, (alpha, expect)) in cases.iter().enumerate() {
            let closed = lebesgue_moment(&b2, &MultiIndex::new(alpha.to_vec()));
            assert!((closed - expect).abs() < 1e-12, "closed form vs hand value");
            let (mc, se) = mc_moment(&b2, alpha, 2_000_000, 1000 + i as u64);
            assert!(
                (closed - mc).abs() <= 4.0 * se.max(1e-6),
                "alpha {alpha:?}: closed {closed} vs mc {mc} (se {se})"
            );
        }
        let b3 = OuterDomain::ball(3, 0.8).unwrap();
        for (i, alpha) in [[0, 0, 0], [2, 0, 0], [2, 2, 0]].iter().enumerate() {
            let closed = lebesgue_moment(&b3, &MultiIndex::new(alpha.to_vec()));
            let (mc, se) = mc_moment(&b3, alpha, 2_000_000, 2000 + i as u64);
            assert!((closed - mc).abs() <= 4.0 * se.max(1e-6));
        }
    }

    #[test]
    fn oracle_validates_box_moment_closed_form() {
        let bx = OuterDomain::boxed(2, vec![0.5, 0.6]).unwrap();
        for (i, alpha) in [[0, 0], [2, 0], [0, 4], [2, 2], [3, 0]].iter().enumerate() {
            let closed = lebesgue_moment(&bx, &MultiIndex::new(alpha.to_vec()));
            let (mc, se) = mc_moment(&bx, alpha, 1_000_000, 3000 + i as u64);
            assert!(
                (closed - mc).abs() <= 4.0 * se.max(1e-7),
                "alpha {alpha:?}: closed {closed} vs mc {mc}"
            );
        }
    }

    #[test]
    fn moment_examples() {
        let x1 = OuterDomain::boxed(1, vec![1.0]).unwrap();
        assert!((lebesgue_moment(&x1, &MultiIndex::new(vec![2])) - 2.0 / 3.0).abs() < 1e-15);
        let b2 = OuterDomain::ball(2, 1.0).unwrap();
        assert!((lebesgue_moment(&b2, &MultiIndex::new(vec![0, 0])) - PI).abs() < 1e-12);
        assert!((lebesgue_moment(&b2, &MultiIndex::new(vec![2, 0])) - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn odd_moments_vanish() {
        let b2 = OuterDomain::ball(2, 0.9).unwrap();
        let bx = OuterDomain::boxed(2, vec![0.4, 0.5]).unwrap();
        for alpha in graded_basis(2, 5) {
            if alpha.exponents().iter().any(|&e| e % 2 == 1) {
                assert_eq!(lebesgue_moment(&b2, &alpha), 0.0);
                assert_eq!(lebesgue_moment(&bx, &alpha), 0.0);
            }
        }
    }

    #[test]
    fn integrate_examples() {
        let x1 = OuterDomain::boxed(1, vec![1.0]).unwrap();
        let one = Polynomial::constant(1, 1.0, Basis::Monomial);
        assert!((integrate(&x1, &one) - 2.0).abs() < 1e-15);
        let p = Polynomial::from_terms(
            1,
            Basis::Monomial,
            &[
                (MultiIndex::zero(1), 1.0),
                (MultiIndex::axis(1, 0, 2), -1.0),
            ],
        )
        .unwrap();
        assert!((integrate(&x1, &p) - 4.0 / 3.0).abs() < 1e-15);
        let b2 = OuterDomain::ball(2, 1.0).unwrap();
        let xy = Polynomial::from_terms(2, Basis::Monomial, &[(MultiIndex::new(vec![1, 1]), 1.0)])
            .unwrap();
        assert_eq!(integrate(&b2, &xy), 0.0);
    }

    #[test]
    fn integrate_chebyshev_matches_monomial() {
        let x1 = OuterDomain::boxed(1, vec![0.8]).unwrap();
        let p = Polynomial::from_terms(
            1,
            Basis::Monomial,
            &[
                (MultiIndex::zero(1), 0.3),
                (MultiIndex::axis(1, 0, 2), -1.2),
                (MultiIndex::axis(1, 0, 4), 0.7),
            ],
        )
        .unwrap();
        let q = p.to_basis(Basis::ChebyshevTensor);
        assert!((integrate(&x1, &p) - integrate(&x1, &q)).abs() < 1e-12);
        let b2 = OuterDomain::ball(2, 1.0).unwrap();
        let p2 = Polynomial::from_terms(
            2,
            Basis::Monomial,
            &[
                (MultiIndex::new(vec![2, 2]), 1.0),
                (MultiIndex::new(vec![0, 2]), -0.5),
            ],
        )
        .unwrap();
        let q2 = p2.to_basis(Basis::ChebyshevTensor);
        assert!((integrate(&b2, &p2) - integrate(&b2, &q2)).abs() < 1e-12);
    }

    #[test]
    fn integrate_agrees_with_monte_carlo_on_random_polynomials() {
        let mut failures = 0;
        for trial in 0..50u64 {
            let n = 1 + (trial % 2) as usize;
            let x_dom = if trial % 4 < 2 {
                OuterDomain::boxed(n, vec![0.7; n]).unwrap()
            } else {
                OuterDomain::ball(n, 0.9).unwrap()
            };
            // deterministic pseudo-random coefficients
            let idxs = graded_basis(n, 6);
            let terms: Vec<(MultiIndex, f64)> = idxs
                .iter()
                .enumerate()
                .map(|(i, idx)| {
                    let c = (((trial * 31 + i as u64 * 17) % 41) as f64 / 41.0) * 2.0 - 1.0;
                    (idx.clone(), c)
                })
                .collect();
            let p = Polynomial::from_terms(n, Basis::Monomial, &terms).unwrap();
            let exact = integrate(&x_dom, &p);
            let samples = 400_000;
            let pts = montecarlo::sample(&x_dom, samples, 9000 + trial);
            let vol = x_dom.volume();
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for x in &pts {
                let v = p.evaluate(x).unwrap();
                sum += v;
                sum_sq += v * v;
            }
            let mean = sum / samples as f64;
            let var = (sum_sq / samples as f64 - mean * mean).max(0.0);
            let se = vol * (var / samples as f64).sqrt();
            if (exact - vol * mean).abs() > 4.0 * se.max(1e-9) {
                failures += 1;
            }
        }
        assert!(failures <= 1, "{failures} of 50 outside 4 standard errors");
    }

    #[test]
    fn membership_examples() {
        let k = interval_k(1.0);
        assert!(k.contains(&[0.0]));
        assert!(!k.contains(&[1.5]));
        let disk = disk_k(0.5);
        assert!(disk.contains(&[0.3, 0.3]));
        assert!(!disk.contains(&[0.4, 0.4]));
    }

    #[test]
    fn normalization_appends_ball_once() {
        let k = interval_k(0.5);
        assert_eq!(k.inequalities().len(), 2);
        // rebuilding from the normalized list changes nothing
        let again = SemialgebraicSet::new(1, SetRole::InnerK, k.inequalities().to_vec()).unwrap();
        assert_eq!(again.inequalities().len(), 2);
        // a set described by the ball itself is not duplicated
        let b = SemialgebraicSet::new(2, SetRole::InnerK, vec![unit_ball_polynomial(2)]).unwrap();
        assert_eq!(b.inequalities().len(), 1);
    }

    #[test]
    fn certify_interval() {
        let k = interval_k(0.5);
        let x = OuterDomain::boxed(1, vec![1.0]).unwrap();
        let summary = certify_assumptions(&k, &x, 20_000, 7).unwrap();
        assert!((summary.interior_margin - 0.25).abs() < 1e-15);
        assert!((summary.inner_box_half_width - 0.5).abs() < 2e-4);
        assert!((summary.r - 2.0).abs() < 1e-3);
    }

    #[test]
    fn certify_rejects_set_without_interior_origin() {
        // K = [1, 2] via (x-1)(2-x) >= 0
        let g = Polynomial::from_terms(
            1,
            Basis::Monomial,
            &[
                (MultiIndex::zero(1), -2.0),
                (MultiIndex::axis(1, 0, 1), 3.0),
                (MultiIndex::axis(1, 0, 2), -1.0),
            ],
        )
        .unwrap();
        let k = SemialgebraicSet::new(1, SetRole::InnerK, vec![g]).unwrap();
        let x = OuterDomain::boxed(1, vec![1.0]).unwrap();
        match certify_assumptions(&k, &x, 1000, 7) {
            Err(AssumptionViolation::Interior { value, .. }) => assert!(value <= 0.0),
            other => panic!("expected interior violation, got {other:?}"),
        }
    }

    #[test]
    fn certify_disk_in_unit_ball() {
        let k = disk_k(0.5);
        let x = OuterDomain::ball(2, 1.0).unwrap();
        assert!(certify_assumptions(&k, &x, 20_000, 11).is_ok());
    }

    #[test]
    fn certify_detects_inclusion_violation() {
        // K = disk of radius 0.9, X = box [-0.5, 0.5]^2: K has points outside X.
        let k = disk_k(0.9);
        let x = OuterDomain::boxed(2, vec![0.5, 0.5]).unwrap();
        match certify_assumptions(&k, &x, 50_000, 13) {
            Err(AssumptionViolation::Inclusion { witness }) => {
                assert!(k.contains(&witness) && !x.contains(&witness));
            }
            other => panic!("expected inclusion violation, got {other:?}"),
        }
    }

    #[test]
    fn inner_box_interval() {
        let k = interval_k(0.5);
        let s = inner_box_half_width(&k, 1e-4, 1).unwrap();
        assert!((s - 0.5).abs() <= 2e-4);
    }

    #[test]
    fn inner_box_disk() {
        // box corner on the circle: s * sqrt(2) = 1/2
        let k = disk_k(0.5);
        let s = inner_box_half_width(&k, 1e-4, 33).unwrap();
        assert!((s - 0.5 / 2f64.sqrt()).abs() <= 2e-4);
        assert!((1.0 / s - 2.8284).abs() < 2e-3);
    }

    #[test]
    fn inner_box_unit_ball_3d() {
        let k = SemialgebraicSet::new(3, SetRole::InnerK, vec![unit_ball_polynomial(3)]).unwrap();
        let s = inner_box_half_width(&k, 1e-4, 33 * 33).unwrap();
        assert!((s - 1.0 / 3f64.sqrt()).abs() <= 2e-4);
    }

    #[test]
    fn inner_box_bracketing_invariant() {
        let k = disk_k(0.5);
        let tol = 1e-4;
        let s = inner_box_half_width(&k, tol, 33).unwrap();
        let feasible = |s: f64| surface_grid(2, s, 33).all(|x| k.contains(&x));
        assert!(feasible(s));
        assert!(!feasible(s + 2.0 * tol));
    }

    #[test]
    fn box_outside_unit_ball_rejected() {
        assert!(OuterDomain::boxed(2, vec![0.9, 0.9]).is_err());
        assert!(OuterDomain::ball(2, 1.2).is_err());
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-14);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-13);
    }
}
