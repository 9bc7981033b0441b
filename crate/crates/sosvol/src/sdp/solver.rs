//! Infeasible-start primal-dual path-following solver with a Mehrotra-style
//! predictor-corrector and the symmetrized Newton direction obtained from the
//! `ZS = mu I` linearization. The Schur complement is factored by dense
//! Cholesky; one solve is single-threaded and deterministic.

use nalgebra::{DMatrix, DVector};

use super::block::BlockMatrix;
use super::{SdpError, SdpProblem, SdpSolution, SolveOptions, SolveStatus};

/// Fraction of the distance to the positive-semidefinite boundary taken per
/// step; conservative for the first iterations.
fn step_fraction(iter: usize) -> f64 {
    if iter < 2 {
        0.95
    } else {
        0.98
    }
}

pub fn solve(problem: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution, SdpError> {
    problem.validate()?;
    let trace = std::env::var_os("SOSVOL_SDP_TRACE").is_some();
    let m = problem.num_vars();
    let k_total = problem.total_side() as f64;
    let b = &problem.objective;
    let c_norm = problem.constant.norm_max();
    let a_norm = problem
        .constraints
        .iter()
        .map(|a| a.norm_max())
        .fold(0.0, f64::max);
    let b_norm = b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));

    // Identity-scaled strictly interior starting point.
    let s_scale = 10.0 * (1.0 + c_norm + a_norm);
    let z_scale = 10.0 * (1.0 + b_norm);
    let mut y: DVector<f64> = DVector::zeros(m);
    let mut s = BlockMatrix::identity_scaled(&problem.blocks, s_scale);
    let mut z = BlockMatrix::identity_scaled(&problem.blocks, z_scale);

    let mut gap_trace = Vec::new();
    let mut status = SolveStatus::IterationLimit;
    let mut iterations = 0;
    let mut stalled = 0usize;
    // The iterate with the smallest worst-case residual seen so far; later
    // iterations can regress once the Schur complement is at the numerical
    // floor, and the best point is what gets returned.
    let mut best = Snapshot {
        y: y.clone(),
        s: s.clone(),
        z: z.clone(),
        primal: f64::INFINITY,
        dual: f64::INFINITY,
        gap: f64::INFINITY,
        merit: f64::INFINITY,
    };

    for iter in 0..=opts.max_iter {
        iterations = iter;
        // Residuals of the two linear systems and the complementarity gap.
        let r_eq = b - problem.apply(&z); // <A_j, Z> = b_j side
        let mut r_lin = problem.constant.clone(); // C - A*(y) - S side
        r_lin.axpy(-1.0, &problem.combine(&y));
        r_lin.axpy(-1.0, &s);

        let gap = z.dot(&s);
        gap_trace.push(gap);
        let mu = gap / k_total;

        let pobj = b.dot(&y);
        let dobj = problem.constant.dot(&z);
        // Backward-error style normalizations: the equality residual is
        // measured against the magnitude of the iterate it is computed from.
        let eq_res =
            r_eq.iter().fold(0.0f64, |acc, v| acc.max(v.abs())) / (1.0 + b_norm + z.norm_max());
        let lin_res = r_lin.norm_max() / (1.0 + c_norm + s.norm_max());
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let merit = eq_res.max(lin_res).max(rel_gap);
        if merit < best.merit {
            best = Snapshot {
                y: y.clone(),
                s: s.clone(),
                z: z.clone(),
                primal: lin_res,
                dual: eq_res,
                gap: rel_gap,
                merit,
            };
        }

        if trace {
            eprintln!(
                "iter {iter:3}: mu {mu:9.2e} eq {eq_res:9.2e} lin {lin_res:9.2e} relgap {rel_gap:9.2e} pobj {pobj:+.9e} |Z| {:.2e} |S| {:.2e}",
                z.norm_max(),
                s.norm_max()
            );
        }
        if eq_res <= opts.feas_tol && lin_res <= opts.feas_tol && rel_gap <= opts.gap_tol {
            // the qualifying iterate is what gets returned, whether or not
            // an earlier one had a smaller worst-case merit
            best = Snapshot {
                y: y.clone(),
                s: s.clone(),
                z: z.clone(),
                primal: lin_res,
                dual: eq_res,
                gap: rel_gap,
                merit,
            };
            status = SolveStatus::Optimal;
            break;
        }
        if iter == opts.max_iter {
            status = SolveStatus::IterationLimit;
            break;
        }
        if !pobj.is_finite() || !dobj.is_finite() || !mu.is_finite() {
            status = SolveStatus::IllConditioned;
            break;
        }
        // Divergence heuristics: a runaway maximization objective means the
        // companion equality system is infeasible; a companion objective
        // running to minus infinity (or an exploding Z) means no y satisfies
        // the matrix inequality.
        if pobj.abs() > 1e12 * (1.0 + b_norm)
            || y.iter().any(|v| v.abs() > 1e13)
            || dobj < -1e12 * (1.0 + c_norm)
            || z.norm_max() > 1e13
        {
            status = SolveStatus::Infeasible;
            break;
        }

        let Some(s_chol) = s.cholesky() else {
            status = SolveStatus::IllConditioned;
            break;
        };
        let s_inv = s_chol.inverse();

        // Schur complement M_ij = <A_i, Z A_j S^{-1}>.
        let t_mats: Vec<BlockMatrix> = problem
            .constraints
            .iter()
            .map(|a| z.mul(a).mul(&s_inv))
            .collect();
        let mut schur = DMatrix::zeros(m, m);
        for j in 0..m {
            for i in 0..m {
                schur[(i, j)] = problem.constraints[i].dot(&t_mats[j]);
            }
        }
        // symmetrize against rounding
        let schur_t = schur.transpose();
        schur += schur_t;
        schur *= 0.5;

        let Some(schur_chol) = factor_with_ridge(&schur) else {
            status = SolveStatus::IllConditioned;
            break;
        };

        // Common right-hand side pieces.
        let z_rlin_sinv = z.mul(&r_lin).mul(&s_inv);
        let a_of_zrs = problem.apply(&z_rlin_sinv);
        let a_of_sinv = problem.apply(&s_inv);

        // Predictor (affine scaling direction).
        let rhs_aff = b + &a_of_zrs;
        let dy_aff = schur_chol.solve(&rhs_aff);
        let mut ds_aff = r_lin.clone();
        ds_aff.axpy(-1.0, &problem.combine(&dy_aff));
        let mut dz_aff = z.clone();
        dz_aff.scale(-1.0);
        dz_aff.axpy(-1.0, &z.mul(&ds_aff).mul(&s_inv));
        dz_aff.symmetrize();

        let Some(alpha_z_aff) = z.max_step(&dz_aff) else {
            status = SolveStatus::IllConditioned;
            break;
        };
        let Some(alpha_s_aff) = s.max_step(&ds_aff) else {
            status = SolveStatus::IllConditioned;
            break;
        };
        let az = alpha_z_aff.min(1.0);
        let asl = alpha_s_aff.min(1.0);
        let mut z_try = z.clone();
        z_try.axpy(az, &dz_aff);
        let mut s_try = s.clone();
        s_try.axpy(asl, &ds_aff);
        let gap_aff = z_try.dot(&s_try).max(0.0);
        // Near the optimum, fully affine steps amplify roundoff in the
        // direction; a small centering floor keeps the last steps clean.
        let sigma_floor = if rel_gap < 1e-5 { 1e-2 } else { 0.0 };
        let sigma = ((gap_aff / gap).powi(3)).clamp(sigma_floor, 1.0);

        // Corrector.
        let cross = dz_aff.mul(&ds_aff).mul(&s_inv);
        let a_of_cross = problem.apply(&cross);
        let rhs = b - &(a_of_sinv.clone() * (sigma * mu)) + &a_of_cross + &a_of_zrs;
        let dy = schur_chol.solve(&rhs);
        let mut ds = r_lin.clone();
        ds.axpy(-1.0, &problem.combine(&dy));
        let mut dz = s_inv.clone();
        dz.scale(sigma * mu);
        dz.axpy(-1.0, &z);
        dz.axpy(-1.0, &cross);
        dz.axpy(-1.0, &z.mul(&ds).mul(&s_inv));
        dz.symmetrize();

        let tau = step_fraction(iter);
        let Some(alpha_z_max) = z.max_step(&dz) else {
            status = SolveStatus::IllConditioned;
            break;
        };
        let Some(alpha_s_max) = s.max_step(&ds) else {
            status = SolveStatus::IllConditioned;
            break;
        };
        let alpha_z = (tau * alpha_z_max).min(1.0);
        let alpha_s = (tau * alpha_s_max).min(1.0);
        if !alpha_z.is_finite() || !alpha_s.is_finite() {
            status = SolveStatus::IllConditioned;
            break;
        }

        z.axpy(alpha_z, &dz);
        y.axpy(alpha_s, &dy, 1.0);
        s.axpy(alpha_s, &ds);

        if alpha_z.min(alpha_s) < 1e-4 || merit > best.merit {
            stalled += 1;
            if stalled >= 6 {
                status = SolveStatus::IllConditioned;
                break;
            }
        } else {
            stalled = 0;
        }
    }

    Ok(SdpSolution {
        y: best.y,
        slack: best.s,
        dual: best.z,
        status,
        primal_residual: best.primal,
        dual_residual: best.dual,
        duality_gap: best.gap,
        iterations,
        gap_trace,
    })
}

struct Snapshot {
    y: DVector<f64>,
    s: BlockMatrix,
    z: BlockMatrix,
    primal: f64,
    dual: f64,
    gap: f64,
    merit: f64,
}

/// Cholesky of the Schur complement, retrying with a growing diagonal ridge
/// when positive definiteness is lost to rounding.
fn factor_with_ridge(m: &DMatrix<f64>) -> Option<SchurFactor> {
    if let Some(chol) = nalgebra::Cholesky::new(m.clone()) {
        return Some(SchurFactor {
            matrix: m.clone(),
            chol,
        });
    }
    let diag_max = (0..m.nrows()).map(|i| m[(i, i)].abs()).fold(0.0, f64::max);
    let mut ridge = 1e-14 * (1.0 + diag_max);
    for _ in 0..3 {
        let mut jittered = m.clone();
        for i in 0..m.nrows() {
            jittered[(i, i)] += ridge;
        }
        if let Some(chol) = nalgebra::Cholesky::new(jittered) {
            return Some(SchurFactor {
                matrix: m.clone(),
                chol,
            });
        }
        ridge *= 100.0;
    }
    None
}

struct SchurFactor {
    matrix: DMatrix<f64>,
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl SchurFactor {
    /// Cholesky solve with two rounds of iterative refinement; the refined
    /// residual is what keeps the equality residuals contracting once the
    /// Schur complement is ill-conditioned near the optimum.
    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut x = self.chol.solve(rhs);
        for _ in 0..4 {
            let r = rhs - &self.matrix * &x;
            let dx = self.chol.solve(&r);
            x += dx;
        }
        x
    }
}
