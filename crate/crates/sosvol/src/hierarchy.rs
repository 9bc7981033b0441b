//! Assembly and solution of the degree-`d` volume relaxation.
//!
//! At level `d` the decision polynomial `p` of degree at most `d` must
//! satisfy `p - 1 = sum_i g_i^K s_i^K` and `p = sum_i g_i^X s_i^X` with
//! sum-of-squares multipliers `s_i` under the degree cap, and `∫_X p` is
//! minimized. Eliminating `p` through the second identity leaves one linear
//! matching constraint per basis polynomial of degree at most `d`,
//!
//! ```text
//! sum_i g_i^X s_i^X - sum_i g_i^K s_i^K = 1   (coefficientwise),
//! ```
//!
//! over the Gram matrices of the multipliers, with objective
//! `sum_i ∫_X g_i^X (b_i' G_i^X b_i)`. That is exactly the equality-
//! constrained side of [`crate::sdp::SdpProblem`]: the Gram matrices are read
//! out of the solution's `Z` and `p` is reconstructed from the `X`-side
//! multipliers, so the reported bound equals `∫_X p` for the returned `p` by
//! construction.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

use crate::poly::{Basis, BasisIndex, MultiIndex, Polynomial};
use crate::sdp::{
    self, Block, BlockMatrix, BlockSpec, SdpProblem, SdpSolution, SolveOptions, SolveStatus,
};
use crate::semialg::{self, OuterDomain, SemialgebraicSet, SetRole};

#[derive(Debug, Error)]
pub enum HierarchyError {
    #[error("level degree must be a positive even number, got {0}")]
    InvalidDegree(usize),
    #[error("degree {d} is below the degree {required} of a defining inequality")]
    DegreeTooSmall { d: usize, required: usize },
    #[error("solver returned {status} at level {d}")]
    Solver { d: usize, status: SolveStatus },
    #[error("solver reported optimal but certificate residual {residual:e} exceeds {limit:e}")]
    CertificateMismatch { residual: f64, limit: f64 },
    #[error(transparent)]
    Sdp(#[from] sdp::SdpError),
}

/// Options for one level and for the sweep.
#[derive(Debug, Clone, Copy)]
pub struct HierarchyOptions {
    pub solver: SolveOptions,
    /// Maximum allowed coefficientwise certificate mismatch.
    pub cert_tol: f64,
    pub monotonicity_tol: f64,
}

impl HierarchyOptions {
    pub fn for_dimension(n: usize) -> Self {
        HierarchyOptions {
            solver: SolveOptions::for_dimension(n),
            cert_tol: 1e-6,
            monotonicity_tol: 1e-6,
        }
    }
}

/// Where each Gram block of the assembled problem came from.
#[derive(Debug, Clone)]
pub struct GramBlockInfo {
    pub role: SetRole,
    /// 0 is the constant multiplier, `i >= 1` pairs with inequality `i - 1`.
    pub multiplier_index: usize,
    /// Generator `g_i` in the working basis (the constant 1 for index 0).
    pub generator: Polynomial,
    /// Graded basis of the multiplier's Gram matrix.
    pub gram_basis: Vec<MultiIndex>,
}

/// Index maps tying the scalarized problem back to polynomials: the
/// `j`-th scalar equality corresponds to `poly_basis.indices[j]`, and block
/// `k` of the matrix variable is the Gram matrix described by `blocks[k]`.
#[derive(Debug, Clone)]
pub struct AssemblyMaps {
    pub dim: usize,
    pub degree: usize,
    pub basis: Basis,
    pub poly_basis: BasisIndex,
    pub blocks: Vec<GramBlockInfo>,
}

#[derive(Debug)]
pub struct Assembly {
    pub problem: SdpProblem,
    pub maps: AssemblyMaps,
}

/// Sum-of-squares multipliers certifying membership in a truncated
/// quadratic module: one Gram matrix per generator, constant first.
#[derive(Debug, Clone)]
pub struct QuadraticModuleCertificate {
    pub role: SetRole,
    /// Level degree the certificate was produced at.
    pub degree: usize,
    pub basis: Basis,
    pub gram_matrices: Vec<DMatrix<f64>>,
}

/// Result of re-deriving the certified identity symbolically.
#[derive(Debug, Clone)]
pub struct CertificateCheck {
    /// Maximum absolute coefficient deviation between the target polynomial
    /// and the reconstructed combination.
    pub residual: f64,
    pub min_eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverGaps {
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub duality_gap: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct LevelResult {
    pub d: usize,
    /// The volume upper bound `∫_X p`.
    pub v_d: f64,
    /// Optimal decision polynomial in the working basis.
    pub p: Polynomial,
    pub cert_k: QuadraticModuleCertificate,
    pub cert_x: QuadraticModuleCertificate,
    pub solver_gaps: SolverGaps,
    pub cert_residual: f64,
}

#[derive(Debug)]
pub struct LevelFailure {
    pub status: Option<SolveStatus>,
    pub message: String,
}

#[derive(Debug)]
pub struct LevelOutcome {
    pub d: usize,
    pub basis_used: Basis,
    pub seconds: f64,
    pub result: Result<LevelResult, LevelFailure>,
}

#[derive(Debug)]
pub struct HierarchySequence {
    pub levels: Vec<LevelOutcome>,
    pub reference_volume: Option<f64>,
}

impl HierarchySequence {
    /// `(d, v_d)` for levels that solved.
    pub fn values(&self) -> Vec<(usize, f64)> {
        self.levels
            .iter()
            .filter_map(|l| l.result.as_ref().ok().map(|r| (l.d, r.v_d)))
            .collect()
    }

    /// Pairs of consecutive solved levels where the bound increased by more
    /// than the tolerance.
    pub fn monotonicity_violations(&self, tol: f64) -> Vec<(usize, usize)> {
        let vals = self.values();
        vals.windows(2)
            .filter(|w| w[1].1 > w[0].1 + tol)
            .map(|w| (w[0].0, w[1].0))
            .collect()
    }
}

fn multipliers(set: &SemialgebraicSet, basis: Basis) -> Vec<Polynomial> {
    let n = set.dimension();
    let mut gs = vec![Polynomial::constant(n, 1.0, basis)];
    gs.extend(set.inequalities().iter().map(|g| g.to_basis(basis)));
    gs
}

/// Builds the level-`d` semidefinite program for the pair `(K, X)` in the
/// requested working basis.
pub fn assemble(
    k_set: &SemialgebraicSet,
    x_dom: &OuterDomain,
    d: usize,
    basis: Basis,
) -> Result<Assembly, HierarchyError> {
    let n = k_set.dimension();
    if d == 0 || !d.is_multiple_of(2) {
        return Err(HierarchyError::InvalidDegree(d));
    }
    let x_set = x_dom.as_set();
    let mult_k = multipliers(k_set, basis);
    let mult_x = multipliers(x_set, basis);
    for g in mult_k.iter().chain(&mult_x) {
        if g.degree() as usize > d {
            return Err(HierarchyError::DegreeTooSmall {
                d,
                required: g.degree() as usize,
            });
        }
    }

    let poly_basis = BasisIndex::new(n, d as u32);
    let m = poly_basis.len();

    // Moments of the working-basis elements over X.
    let moments: Vec<f64> = poly_basis
        .indices
        .iter()
        .map(|alpha| semialg::basis_moment(x_dom, alpha, basis))
        .collect();

    let mut block_infos = Vec::new();
    let mut specs = Vec::new();
    for (role, mults) in [(SetRole::InnerK, &mult_k), (SetRole::OuterX, &mult_x)] {
        for (i, g) in mults.iter().enumerate() {
            let k_deg = (d - g.degree() as usize) / 2;
            let gram_basis = crate::poly::graded_basis(n, k_deg as u32);
            specs.push(BlockSpec::Dense(gram_basis.len()));
            block_infos.push(GramBlockInfo {
                role,
                multiplier_index: i,
                generator: g.clone(),
                gram_basis,
            });
        }
    }

    let mut a_mats: Vec<BlockMatrix> = (0..m).map(|_| BlockMatrix::zeros(&specs)).collect();
    let mut constant = BlockMatrix::zeros(&specs);

    for (bi, info) in block_infos.iter().enumerate() {
        let sign = match info.role {
            SetRole::InnerK => -1.0,
            SetRole::OuterX => 1.0,
        };
        let side = info.gram_basis.len();
        for u in 0..side {
            let bu = Polynomial::basis_element(n, basis, info.gram_basis[u].clone());
            for v in u..side {
                let bv = Polynomial::basis_element(n, basis, info.gram_basis[v].clone());
                let prod = info
                    .generator
                    .mul(&bu.mul(&bv).expect("same basis"))
                    .expect("same basis");
                let mut cost_entry = 0.0;
                for (alpha, coeff) in prod.terms() {
                    let j = poly_basis
                        .position(alpha)
                        .expect("product degree within level degree");
                    if let Block::Dense(mat) = &mut a_mats[j].blocks[bi] {
                        mat[(u, v)] += sign * coeff;
                        if u != v {
                            mat[(v, u)] += sign * coeff;
                        }
                    }
                    cost_entry += coeff * moments[j];
                }
                if info.role == SetRole::OuterX {
                    if let Block::Dense(mat) = &mut constant.blocks[bi] {
                        mat[(u, v)] = cost_entry;
                        if u != v {
                            mat[(v, u)] = cost_entry;
                        }
                    }
                }
            }
        }
    }

    // Right-hand side: the coefficient vector of the constant polynomial 1,
    // which is 1 in the leading (constant) slot in either basis.
    let mut objective = DVector::zeros(m);
    objective[0] = 1.0;

    Ok(Assembly {
        problem: SdpProblem {
            blocks: specs,
            objective,
            constraints: a_mats,
            constant,
        },
        maps: AssemblyMaps {
            dim: n,
            degree: d,
            basis,
            poly_basis,
            blocks: block_infos,
        },
    })
}

/// `b(x)' G b(x)` as a polynomial, for a Gram matrix over the given basis
/// elements.
pub fn gram_polynomial(
    gram: &DMatrix<f64>,
    gram_basis: &[MultiIndex],
    n: usize,
    basis: Basis,
) -> Polynomial {
    let side = gram_basis.len();
    assert_eq!(gram.nrows(), side);
    let mut acc = Polynomial::zero(n, basis);
    for u in 0..side {
        let bu = Polynomial::basis_element(n, basis, gram_basis[u].clone());
        for v in u..side {
            let bv = Polynomial::basis_element(n, basis, gram_basis[v].clone());
            let w = if u == v {
                gram[(u, u)]
            } else {
                gram[(u, v)] + gram[(v, u)]
            };
            if w != 0.0 {
                let prod = bu.mul(&bv).expect("same basis");
                acc = acc.add(&prod.scale(w)).expect("same basis");
            }
        }
    }
    acc
}

/// Reconstructs `sum_i g_i (b_i' G_i b_i)` symbolically and measures the
/// worst coefficient deviation from the certified identity: `p - 1` for an
/// inner-set certificate, `p` itself for an outer-set certificate. Also
/// reports the smallest eigenvalue of every Gram matrix.
pub fn certify(
    p: &Polynomial,
    cert: &QuadraticModuleCertificate,
    set: &SemialgebraicSet,
) -> CertificateCheck {
    let n = set.dimension();
    let mults = multipliers(set, cert.basis);
    assert_eq!(
        mults.len(),
        cert.gram_matrices.len(),
        "certificate must carry one Gram per generator (constant first)"
    );
    let mut combination = Polynomial::zero(n, cert.basis);
    let mut min_eigenvalues = Vec::with_capacity(mults.len());
    for (g, gram) in mults.iter().zip(&cert.gram_matrices) {
        let k_deg = (cert.degree - g.degree() as usize) / 2;
        let gram_basis = crate::poly::graded_basis(n, k_deg as u32);
        let s_poly = gram_polynomial(gram, &gram_basis, n, cert.basis);
        combination = combination
            .add(&g.mul(&s_poly).expect("same basis"))
            .expect("same basis");
        let mut sym = gram.clone();
        let t = gram.transpose();
        sym += t;
        sym *= 0.5;
        let min_eig = nalgebra::SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v));
        min_eigenvalues.push(min_eig);
    }
    let target = match cert.role {
        SetRole::InnerK => p
            .sub(&Polynomial::constant(n, 1.0, cert.basis))
            .expect("same basis"),
        SetRole::OuterX => p.to_basis(cert.basis),
    };
    let diff = target.sub(&combination).expect("same basis");
    let residual = diff.terms().map(|(_, c)| c.abs()).fold(0.0, f64::max);
    CertificateCheck {
        residual,
        min_eigenvalues,
    }
}

fn extract_certificates(
    maps: &AssemblyMaps,
    solution: &SdpSolution,
) -> (QuadraticModuleCertificate, QuadraticModuleCertificate) {
    let mut grams_k = Vec::new();
    let mut grams_x = Vec::new();
    for (info, block) in maps.blocks.iter().zip(&solution.dual.blocks) {
        let Block::Dense(mat) = block else {
            unreachable!("hierarchy blocks are dense")
        };
        let mut sym = mat.clone();
        let t = mat.transpose();
        sym += t;
        sym *= 0.5;
        match info.role {
            SetRole::InnerK => grams_k.push(sym),
            SetRole::OuterX => grams_x.push(sym),
        }
    }
    (
        QuadraticModuleCertificate {
            role: SetRole::InnerK,
            degree: maps.degree,
            basis: maps.basis,
            gram_matrices: grams_k,
        },
        QuadraticModuleCertificate {
            role: SetRole::OuterX,
            degree: maps.degree,
            basis: maps.basis,
            gram_matrices: grams_x,
        },
    )
}

/// Rebuilds the decision polynomial from the outer-set multipliers.
fn reconstruct_p(maps: &AssemblyMaps, cert_x: &QuadraticModuleCertificate) -> Polynomial {
    let n = maps.dim;
    let mut p = Polynomial::zero(n, maps.basis);
    let x_infos = maps
        .blocks
        .iter()
        .filter(|info| info.role == SetRole::OuterX);
    for (info, gram) in x_infos.zip(&cert_x.gram_matrices) {
        let s_poly = gram_polynomial(gram, &info.gram_basis, n, maps.basis);
        p = p
            .add(&info.generator.mul(&s_poly).expect("same basis"))
            .expect("same basis");
    }
    p
}

/// Solves one level and verifies its certificates independently.
pub fn solve_level(
    k_set: &SemialgebraicSet,
    x_dom: &OuterDomain,
    d: usize,
    basis: Basis,
    opts: &HierarchyOptions,
) -> Result<LevelResult, HierarchyError> {
    let assembly = assemble(k_set, x_dom, d, basis)?;
    let solution = sdp::solve(&assembly.problem, &opts.solver)?;
    if solution.status != SolveStatus::Optimal {
        return Err(HierarchyError::Solver {
            d,
            status: solution.status,
        });
    }
    let (cert_k, cert_x) = extract_certificates(&assembly.maps, &solution);
    let p = reconstruct_p(&assembly.maps, &cert_x);
    let v_d = semialg::integrate(x_dom, &p);
    let check_k = certify(&p, &cert_k, k_set);
    let check_x = certify(&p, &cert_x, x_dom.as_set());
    let cert_residual = check_k.residual.max(check_x.residual);
    if cert_residual > 10.0 * opts.cert_tol {
        return Err(HierarchyError::CertificateMismatch {
            residual: cert_residual,
            limit: 10.0 * opts.cert_tol,
        });
    }
    Ok(LevelResult {
        d,
        v_d,
        p,
        cert_k,
        cert_x,
        solver_gaps: SolverGaps {
            primal_residual: solution.primal_residual,
            dual_residual: solution.dual_residual,
            duality_gap: solution.duality_gap,
            iterations: solution.iterations,
        },
        cert_residual,
    })
}

/// Runs the sweep `d = d_min, d_min + step, ..., d_max`. Levels are
/// independent and solved in parallel; per-level failures are recorded and
/// the sweep continues. A level that comes back ill-conditioned in the
/// monomial basis is retried once in the Chebyshev basis when `n = 1`.
pub fn run(
    k_set: &SemialgebraicSet,
    x_dom: &OuterDomain,
    d_min: usize,
    d_max: usize,
    step: usize,
    basis: Basis,
    opts: &HierarchyOptions,
) -> Result<HierarchySequence, HierarchyError> {
    if d_min == 0 || !d_min.is_multiple_of(2) {
        return Err(HierarchyError::InvalidDegree(d_min));
    }
    if step == 0 || !step.is_multiple_of(2) {
        return Err(HierarchyError::InvalidDegree(step));
    }
    let degrees: Vec<usize> = (d_min..=d_max).step_by(step).collect();
    let levels: Vec<LevelOutcome> = degrees
        .par_iter()
        .map(|&d| {
            let start = Instant::now();
            let mut basis_used = basis;
            let mut result = solve_level(k_set, x_dom, d, basis, opts);
            if let Err(HierarchyError::Solver {
                status: SolveStatus::IllConditioned,
                ..
            }) = result
            {
                if basis == Basis::Monomial && k_set.dimension() == 1 {
                    basis_used = Basis::ChebyshevTensor;
                    result = solve_level(k_set, x_dom, d, basis_used, opts);
                }
            }
            LevelOutcome {
                d,
                basis_used,
                seconds: start.elapsed().as_secs_f64(),
                result: result.map_err(|e| LevelFailure {
                    status: match e {
                        HierarchyError::Solver { status, .. } => Some(status),
                        _ => None,
                    },
                    message: e.to_string(),
                }),
            }
        })
        .collect();
    Ok(HierarchySequence {
        levels,
        reference_volume: None,
    })
}

/// Per-sweep CSV: `d, v_d, cert_residual, solver_status, gap, seconds`.
/// Floats carry 17 significant digits; the seconds column is zero unless
/// timing output is requested, so repeated runs are byte-identical.
pub fn sweep_csv(seq: &HierarchySequence, include_timing: bool) -> String {
    let mut out = String::from("d,v_d,cert_residual,solver_status,gap,seconds\n");
    for level in &seq.levels {
        let seconds = if include_timing { level.seconds } else { 0.0 };
        match &level.result {
            Ok(r) => {
                out.push_str(&format!(
                    "{},{:.16e},{:.16e},optimal,{:.16e},{:.16e}\n",
                    r.d, r.v_d, r.cert_residual, r.solver_gaps.duality_gap, seconds
                ));
            }
            Err(f) => {
                let status = f
                    .status
                    .map(|s| s.to_string())
                    .unwrap_or_else(|| "error".into());
                out.push_str(&format!(
                    "{},NaN,NaN,{},NaN,{:.16e}\n",
                    level.d, status, seconds
                ));
            }
        }
    }
    out
}
