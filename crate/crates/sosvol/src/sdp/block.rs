//! Block-diagonal symmetric matrices with dense and diagonal blocks.
//!
//! Diagonal blocks carry the scalar (linear-programming) part of a problem;
//! all operations stay O(side) there instead of O(side^2).

use nalgebra::{DMatrix, DVector};

/// Structure of one block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockSpec {
    Dense(usize),
    Diag(usize),
}

impl BlockSpec {
    pub fn side(&self) -> usize {
        match self {
            BlockSpec::Dense(s) | BlockSpec::Diag(s) => *s,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    Dense(DMatrix<f64>),
    Diag(DVector<f64>),
}

/// Block-diagonal matrix; all arithmetic is per block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrix {
    pub blocks: Vec<Block>,
}

impl BlockMatrix {
    pub fn zeros(specs: &[BlockSpec]) -> Self {
        let blocks = specs
            .iter()
            .map(|s| match s {
                BlockSpec::Dense(n) => Block::Dense(DMatrix::zeros(*n, *n)),
                BlockSpec::Diag(n) => Block::Diag(DVector::zeros(*n)),
            })
            .collect();
        BlockMatrix { blocks }
    }

    pub fn identity_scaled(specs: &[BlockSpec], scale: f64) -> Self {
        let blocks = specs
            .iter()
            .map(|s| match s {
                BlockSpec::Dense(n) => Block::Dense(DMatrix::identity(*n, *n) * scale),
                BlockSpec::Diag(n) => Block::Diag(DVector::from_element(*n, scale)),
            })
            .collect();
        BlockMatrix { blocks }
    }

    pub fn specs(&self) -> Vec<BlockSpec> {
        self.blocks
            .iter()
            .map(|b| match b {
                Block::Dense(m) => BlockSpec::Dense(m.nrows()),
                Block::Diag(v) => BlockSpec::Diag(v.len()),
            })
            .collect()
    }

    pub fn matches(&self, specs: &[BlockSpec]) -> bool {
        self.blocks.len() == specs.len()
            && self.blocks.iter().zip(specs).all(|(b, s)| match (b, s) {
                (Block::Dense(m), BlockSpec::Dense(n)) => m.nrows() == *n && m.ncols() == *n,
                (Block::Diag(v), BlockSpec::Diag(n)) => v.len() == *n,
                _ => false,
            })
    }

    /// Total matrix dimension (sum of block sides).
    pub fn total_side(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| match b {
                Block::Dense(m) => m.nrows(),
                Block::Diag(v) => v.len(),
            })
            .sum()
    }

    /// Frobenius inner product `<a, b>`.
    pub fn dot(&self, other: &BlockMatrix) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| match (a, b) {
                (Block::Dense(x), Block::Dense(y)) => x.dot(y),
                (Block::Diag(x), Block::Diag(y)) => x.dot(y),
                _ => panic!("block structure mismatch"),
            })
            .sum()
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &BlockMatrix) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            match (a, b) {
                (Block::Dense(x), Block::Dense(y)) => *x += y * alpha,
                (Block::Diag(x), Block::Diag(y)) => x.axpy(alpha, y, 1.0),
                _ => panic!("block structure mismatch"),
            }
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for b in self.blocks.iter_mut() {
            match b {
                Block::Dense(x) => *x *= alpha,
                Block::Diag(x) => *x *= alpha,
            }
        }
    }

    pub fn norm_max(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| match b {
                Block::Dense(x) => x.iter().fold(0.0f64, |m, v| m.max(v.abs())),
                Block::Diag(x) => x.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            })
            .fold(0.0, f64::max)
    }

    /// General (not necessarily symmetric) block-wise product.
    pub fn mul(&self, other: &BlockMatrix) -> BlockMatrix {
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| match (a, b) {
                (Block::Dense(x), Block::Dense(y)) => Block::Dense(x * y),
                (Block::Diag(x), Block::Diag(y)) => Block::Diag(x.component_mul(y)),
                _ => panic!("block structure mismatch"),
            })
            .collect();
        BlockMatrix { blocks }
    }

    /// Replaces each dense block by its symmetric part.
    pub fn symmetrize(&mut self) {
        for b in self.blocks.iter_mut() {
            if let Block::Dense(x) = b {
                let t = x.transpose();
                *x += t;
                *x *= 0.5;
            }
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| match b {
                Block::Dense(x) => {
                    let mut worst = 0.0f64;
                    for i in 0..x.nrows() {
                        for j in (i + 1)..x.ncols() {
                            worst = worst.max((x[(i, j)] - x[(j, i)]).abs());
                        }
                    }
                    worst
                }
                Block::Diag(_) => 0.0,
            })
            .fold(0.0, f64::max)
    }

    /// Cholesky factorization; `None` if some block is not positive definite.
    pub fn cholesky(&self) -> Option<BlockCholesky> {
        let mut factors = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            match b {
                Block::Dense(x) => {
                    factors.push(CholBlock::Dense(nalgebra::Cholesky::new(x.clone())?));
                }
                Block::Diag(x) => {
                    if x.iter().any(|&v| v <= 0.0) {
                        return None;
                    }
                    factors.push(CholBlock::Diag(x.clone()));
                }
            }
        }
        Some(BlockCholesky { factors })
    }

    /// Smallest eigenvalue over all blocks.
    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| match b {
                Block::Dense(x) => {
                    let mut sym = x.clone();
                    let t = x.transpose();
                    sym += t;
                    sym *= 0.5;
                    nalgebra::SymmetricEigen::new(sym)
                        .eigenvalues
                        .iter()
                        .fold(f64::INFINITY, |m, &v| m.min(v))
                }
                Block::Diag(x) => x.iter().fold(f64::INFINITY, |m, &v| m.min(v)),
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `alpha` such that `self + alpha * delta` stays positive
    /// semidefinite, given `self` positive definite. `None` if `self`
    /// cannot be factored.
    pub fn max_step(&self, delta: &BlockMatrix) -> Option<f64> {
        let mut alpha = f64::INFINITY;
        for (x, d) in self.blocks.iter().zip(&delta.blocks) {
            match (x, d) {
                (Block::Dense(x), Block::Dense(d)) => {
                    let chol = nalgebra::Cholesky::new(x.clone())?;
                    let l = chol.l();
                    let a1 = l.solve_lower_triangular(d)?;
                    let a2 = l.solve_lower_triangular(&a1.transpose())?;
                    let mut w = a2;
                    let t = w.transpose();
                    w += t;
                    w *= 0.5;
                    let lam = nalgebra::SymmetricEigen::new(w)
                        .eigenvalues
                        .iter()
                        .fold(f64::INFINITY, |m, &v| m.min(v));
                    if lam < -1e-14 {
                        alpha = alpha.min(-1.0 / lam);
                    }
                }
                (Block::Diag(x), Block::Diag(d)) => {
                    for (xi, di) in x.iter().zip(d.iter()) {
                        if *di < 0.0 {
                            alpha = alpha.min(-xi / di);
                        }
                    }
                }
                _ => panic!("block structure mismatch"),
            }
        }
        Some(alpha)
    }
}

pub enum CholBlock {
    Dense(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Diag(DVector<f64>),
}

pub struct BlockCholesky {
    factors: Vec<CholBlock>,
}

impl BlockCholesky {
    /// Explicit inverse of the factored matrix.
    pub fn inverse(&self) -> BlockMatrix {
        let blocks = self
            .factors
            .iter()
            .map(|f| match f {
                CholBlock::Dense(c) => Block::Dense(c.inverse()),
                CholBlock::Diag(d) => Block::Diag(d.map(|v| 1.0 / v)),
            })
            .collect();
        BlockMatrix { blocks }
    }
}
