//! Multivariate polynomials over a graded monomial or tensor-Chebyshev basis.
//!
//! Coefficients are kept in a sorted map keyed by exponent multi-index; the
//! map order is graded lexicographic, so iteration order matches
//! [`graded_basis`] and dense extraction is a single walk. Values are
//! immutable after construction and all operations are pure.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Coefficients with absolute value at or below this threshold are dropped
/// after arithmetic, so float noise does not create spurious fill-in.
pub const COEFF_CLEANUP_EPS: f64 = 1e-14;

#[derive(Debug, Error, PartialEq)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("basis mismatch: {0:?} vs {1:?}")]
    BasisMismatch(Basis, Basis),
}

/// Exponent vector of a single basis element, one entry per coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// Multi-index with a single nonzero entry `e` at coordinate `axis`.
    pub fn axis(n: usize, axis: usize, e: u32) -> Self {
        let mut v = vec![0; n];
        v[axis] = e;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// Total degree, the sum of all exponents.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Graded lexicographic order: total degree first, then the exponent vector.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// Plain monomials `x^a`.
    Monomial,
    /// Products of univariate Chebyshev polynomials of the first kind,
    /// `T_{a_1}(x_1) ... T_{a_n}(x_n)`.
    ChebyshevTensor,
}

/// All multi-indices of total degree at most `d` in `n` variables, in graded
/// lexicographic order. The count is `C(n+d, d)`.
pub fn graded_basis(n: usize, d: u32) -> Vec<MultiIndex> {
    assert!(n >= 1, "dimension must be at least 1");
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    for total in 0..=d {
        fill_degree(n, 0, total, &mut current, &mut out);
    }
    out
}

fn fill_degree(
    n: usize,
    axis: usize,
    remaining: u32,
    current: &mut [u32],
    out: &mut Vec<MultiIndex>,
) {
    if axis == n - 1 {
        current[axis] = remaining;
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    for e in 0..=remaining {
        current[axis] = e;
        fill_degree(n, axis + 1, remaining - e, current, out);
    }
    current[axis] = 0;
}

/// Lookup table from multi-index to its position in [`graded_basis`].
#[derive(Debug, Clone)]
pub struct BasisIndex {
    pub indices: Vec<MultiIndex>,
    positions: BTreeMap<MultiIndex, usize>,
}

impl BasisIndex {
    pub fn new(n: usize, d: u32) -> Self {
        let indices = graded_basis(n, d);
        let positions = indices
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, idx)| (idx, i))
            .collect();
        BasisIndex { indices, positions }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn position(&self, idx: &MultiIndex) -> Option<usize> {
        self.positions.get(idx).copied()
    }
}

/// A polynomial in `n` variables over a declared basis.
///
/// Invariants: all stored multi-indices have length `n`, and no stored
/// coefficient is zero (entries below [`COEFF_CLEANUP_EPS`] are removed by
/// the arithmetic operations).
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    basis: Basis,
    coeffs: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn zero(n: usize, basis: Basis) -> Self {
        Polynomial {
            dim: n,
            basis,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, value: f64, basis: Basis) -> Self {
        let mut p = Self::zero(n, basis);
        if value != 0.0 {
            p.coeffs.insert(MultiIndex::zero(n), value);
        }
        p
    }

    /// The basis element with exponent vector `alpha` (coefficient 1).
    pub fn basis_element(n: usize, basis: Basis, alpha: MultiIndex) -> Self {
        assert_eq!(alpha.len(), n);
        let mut p = Self::zero(n, basis);
        p.coeffs.insert(alpha, 1.0);
        p
    }

    pub fn from_terms(
        n: usize,
        basis: Basis,
        terms: &[(MultiIndex, f64)],
    ) -> Result<Self, PolyError> {
        let mut p = Self::zero(n, basis);
        for (idx, c) in terms {
            if idx.len() != n {
                return Err(PolyError::DimensionMismatch {
                    expected: n,
                    got: idx.len(),
                });
            }
            if *c != 0.0 {
                *p.coeffs.entry(idx.clone()).or_insert(0.0) += *c;
            }
        }
        p.cleanup(0.0);
        Ok(p)
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|i| i.degree()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, idx: &MultiIndex) -> f64 {
        self.coeffs.get(idx).copied().unwrap_or(0.0)
    }

    /// Terms in graded lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.coeffs.iter().map(|(i, &c)| (i, c))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    fn cleanup(&mut self, eps: f64) {
        self.coeffs.retain(|_, c| c.abs() > eps);
    }

    /// Value of the polynomial at `x`, interpreting the stored indices in the
    /// declared basis.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64, PolyError> {
        if x.len() != self.dim {
            return Err(PolyError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        match self.basis {
            Basis::Monomial => Ok(self
                .coeffs
                .iter()
                .map(|(idx, c)| {
                    let m: f64 = idx
                        .exponents()
                        .iter()
                        .zip(x)
                        .map(|(&e, &xi)| xi.powi(e as i32))
                        .product();
                    c * m
                })
                .sum()),
            Basis::ChebyshevTensor => {
                // Per-axis tables of T_0..T_max(x_k), then a product per term.
                let mut max_deg = vec![0u32; self.dim];
                for idx in self.coeffs.keys() {
                    for (k, &e) in idx.exponents().iter().enumerate() {
                        max_deg[k] = max_deg[k].max(e);
                    }
                }
                let tables: Vec<Vec<f64>> = x
                    .iter()
                    .zip(&max_deg)
                    .map(|(&xi, &md)| chebyshev_values(xi, md))
                    .collect();
                Ok(self
                    .coeffs
                    .iter()
                    .map(|(idx, c)| {
                        let m: f64 = idx
                            .exponents()
                            .iter()
                            .enumerate()
                            .map(|(k, &e)| tables[k][e as usize])
                            .product();
                        c * m
                    })
                    .sum())
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (idx, c) in &other.coeffs {
            *out.coeffs.entry(idx.clone()).or_insert(0.0) += c;
        }
        out.cleanup(COEFF_CLEANUP_EPS);
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, factor: f64) -> Polynomial {
        let mut out = self.clone();
        if factor == 0.0 {
            out.coeffs.clear();
            return out;
        }
        for c in out.coeffs.values_mut() {
            *c *= factor;
        }
        out.cleanup(COEFF_CLEANUP_EPS);
        out
    }

    /// Exact product. Chebyshev products use the linearization
    /// `T_i T_j = (T_{i+j} + T_{|i-j|}) / 2` per coordinate.
    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_compatible(other)?;
        let mut out = Polynomial::zero(self.dim, self.basis);
        match self.basis {
            Basis::Monomial => {
                for (a, ca) in &self.coeffs {
                    for (b, cb) in &other.coeffs {
                        let idx = MultiIndex(
                            a.exponents()
                                .iter()
                                .zip(b.exponents())
                                .map(|(&u, &v)| u + v)
                                .collect(),
                        );
                        *out.coeffs.entry(idx).or_insert(0.0) += ca * cb;
                    }
                }
            }
            Basis::ChebyshevTensor => {
                let n = self.dim;
                for (a, ca) in &self.coeffs {
                    for (b, cb) in &other.coeffs {
                        // Sum over the 2^n sign choices; when an exponent pair
                        // collapses (min is zero) the two halves land on the
                        // same index and recombine.
                        let base = ca * cb / (1u64 << n) as f64;
                        let mut idx = vec![0u32; n];
                        distribute_cheb(
                            a.exponents(),
                            b.exponents(),
                            0,
                            base,
                            &mut idx,
                            &mut out.coeffs,
                        );
                    }
                }
            }
        }
        out.cleanup(COEFF_CLEANUP_EPS);
        Ok(out)
    }

    /// Change of basis. The conversion is exact up to floating-point
    /// rounding; note that the monomial representation of a high-degree
    /// Chebyshev series has coefficients that grow like `(1+sqrt 2)^d`, so
    /// round trips are only meaningful at moderate degree.
    pub fn to_basis(&self, target: Basis) -> Polynomial {
        if self.basis == target {
            return self.clone();
        }
        let n = self.dim;
        let mut max_deg = vec![0u32; n];
        for idx in self.coeffs.keys() {
            for (k, &e) in idx.exponents().iter().enumerate() {
                max_deg[k] = max_deg[k].max(e);
            }
        }
        // Per-axis univariate conversion tables: row e holds the expansion of
        // basis element e of the source basis in the target basis.
        let tables: Vec<Vec<Vec<f64>>> = max_deg
            .iter()
            .map(|&md| match target {
                Basis::ChebyshevTensor => monomial_to_chebyshev_table(md),
                Basis::Monomial => chebyshev_to_monomial_table(md),
            })
            .collect();
        let mut out = Polynomial::zero(n, target);
        for (idx, &c) in &self.coeffs {
            let mut acc: Vec<(Vec<u32>, f64)> = vec![(Vec::with_capacity(n), c)];
            for (k, &e) in idx.exponents().iter().enumerate() {
                let row = &tables[k][e as usize];
                let mut next = Vec::with_capacity(acc.len() * row.len());
                for (prefix, w) in &acc {
                    for (j, &rj) in row.iter().enumerate() {
                        if rj != 0.0 {
                            let mut p = prefix.clone();
                            p.push(j as u32);
                            next.push((p, w * rj));
                        }
                    }
                }
                acc = next;
            }
            for (exps, w) in acc {
                *out.coeffs.entry(MultiIndex(exps)).or_insert(0.0) += w;
            }
        }
        out.cleanup(COEFF_CLEANUP_EPS);
        out
    }

    /// Dense coefficient vector aligned with `index.indices`.
    pub fn to_dense(&self, index: &BasisIndex) -> Option<Vec<f64>> {
        let mut out = vec![0.0; index.len()];
        for (idx, &c) in &self.coeffs {
            out[index.position(idx)?] = c;
        }
        Some(out)
    }

    pub fn from_dense(n: usize, basis: Basis, index: &BasisIndex, coeffs: &[f64]) -> Polynomial {
        assert_eq!(coeffs.len(), index.len());
        let mut p = Polynomial::zero(n, basis);
        for (idx, &c) in index.indices.iter().zip(coeffs) {
            if c.abs() > COEFF_CLEANUP_EPS {
                p.coeffs.insert(idx.clone(), c);
            }
        }
        p
    }

    fn check_compatible(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.dim != other.dim {
            return Err(PolyError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        if self.basis != other.basis {
            return Err(PolyError::BasisMismatch(self.basis, other.basis));
        }
        Ok(())
    }
}

fn distribute_cheb(
    a: &[u32],
    b: &[u32],
    axis: usize,
    weight: f64,
    idx: &mut Vec<u32>,
    out: &mut BTreeMap<MultiIndex, f64>,
) {
    if axis == a.len() {
        *out.entry(MultiIndex(idx.clone())).or_insert(0.0) += weight;
        return;
    }
    let (u, v) = (a[axis], b[axis]);
    idx[axis] = u + v;
    distribute_cheb(a, b, axis + 1, weight, idx, out);
    idx[axis] = u.abs_diff(v);
    distribute_cheb(a, b, axis + 1, weight, idx, out);
}

/// Values `T_0(x), ..., T_d(x)` by the three-term recurrence.
pub fn chebyshev_values(x: f64, d: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(d as usize + 1);
    out.push(1.0);
    if d >= 1 {
        out.push(x);
    }
    for k in 2..=d as usize {
        let next = 2.0 * x * out[k - 1] - out[k - 2];
        out.push(next);
    }
    out
}

/// Row `e`: Chebyshev coefficients of the monomial `x^e`, built by repeated
/// multiplication by `x` in coefficient space (`x T_j = (T_{j+1} + T_{|j-1|})/2`).
fn monomial_to_chebyshev_table(d: u32) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(d as usize + 1);
    rows.push(vec![1.0]);
    for e in 1..=d as usize {
        let prev = &rows[e - 1];
        let mut next = vec![0.0; e + 1];
        for (j, &c) in prev.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            next[j + 1] += 0.5 * c;
            next[j.abs_diff(1)] += 0.5 * c;
        }
        rows.push(next);
    }
    rows
}

/// Row `e`: monomial coefficients of `T_e`, by the three-term recurrence.
fn chebyshev_to_monomial_table(d: u32) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(d as usize + 1);
    rows.push(vec![1.0]);
    if d >= 1 {
        rows.push(vec![0.0, 1.0]);
    }
    for e in 2..=d as usize {
        let mut next = vec![0.0; e + 1];
        for (j, &c) in rows[e - 1].iter().enumerate() {
            next[j + 1] += 2.0 * c;
        }
        for (j, &c) in rows[e - 2].iter().enumerate() {
            next[j] -= c;
        }
        rows.push(next);
    }
    rows
}

/// Binomial coefficient as f64, for basis cardinalities.
pub fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k.min(n));
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}
