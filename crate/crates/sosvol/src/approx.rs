//! Empirical approximation-theory harness: one-sided L1 best approximation
//! of the indicator function by linear programming, averaged modulus of
//! continuity and boundary-tube volume estimators, closed-form degree-bound
//! evaluation, and convergence-rate fitting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::montecarlo;
use crate::poly::{Basis, BasisIndex, Polynomial};
use crate::sdp::{self, Block, BlockMatrix, BlockSpec, SdpProblem, SolveOptions, SolveStatus};
use crate::semialg::{self, OuterDomain, SemialgebraicSet, Shape};

#[derive(Debug, Error)]
pub enum ApproxError {
    #[error("constraint grid of {got} points is below 10x the coefficient count {dim}")]
    GridTooSmall { got: usize, dim: usize },
    #[error(
        "the grid LP is infeasible, which signals a grid bug (a large constant is always feasible)"
    )]
    LpInfeasible,
    #[error("grid LP solver returned {0}")]
    Lp(SolveStatus),
    #[error(
        "validation violation {violation:e} exceeds {limit:e}; the constraint grid is too coarse"
    )]
    GridTooCoarse { violation: f64, limit: f64 },
    #[error("fewer than {required} boundary points found ({got}); boundary is degenerate")]
    DegenerateBoundary { got: usize, required: usize },
    #[error("need at least 4 data points with value above the reference volume, got {0}")]
    InsufficientData(usize),
    #[error("inputs must be strictly positive")]
    NonPositiveInput,
    #[error(transparent)]
    Sdp(#[from] sdp::SdpError),
}

#[derive(Debug, Clone, Copy)]
pub struct ApproxOptions {
    /// Constraint-grid oversampling factor relative to the coefficient count.
    pub oversample: usize,
    /// Validation grid density relative to the constraint grid.
    pub validation_factor: usize,
    /// Worst admissible one-sidedness violation on the validation grid.
    /// Between-node dips of a degree-d polynomial scale like d^2 h^2, so a
    /// tight threshold is only reachable at low degree; the violation itself
    /// is always reported.
    pub violation_tol: f64,
    pub lp_solver: SolveOptions,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions {
            oversample: 40,
            validation_factor: 3,
            violation_tol: 0.25,
            lp_solver: SolveOptions {
                feas_tol: 1e-10,
                gap_tol: 1e-10,
                max_iter: 200,
            },
        }
    }
}

/// One-sided L1 best approximation of the indicator of `K` from above at a
/// fixed degree.
#[derive(Debug, Clone)]
pub struct OneSidedApprox {
    pub d: usize,
    /// `∫_X p - vol_ref`.
    pub e_d: f64,
    pub p_tilde: Polynomial,
    /// Maximum of the approximant over the validation grid.
    pub sup_norm: f64,
    /// Worst one-sidedness violation `max(0, I_K - p)` on the validation grid.
    pub worst_violation: f64,
}

/// Deterministic constraint grid on `X`: tensorized Chebyshev-style nodes
/// for boxes (clustered near the boundary, where the indicator jumps), and
/// a rejection-filtered tensor grid for balls. `phase` shifts the nodes so
/// validation grids do not coincide with constraint grids.
fn domain_grid(x_dom: &OuterDomain, target: usize, phase: f64) -> Vec<Vec<f64>> {
    let n = x_dom.dimension();
    match x_dom.shape() {
        Shape::Box { half_widths } => {
            let per_axis = ((target as f64).powf(1.0 / n as f64).ceil() as usize).max(2);
            let mut pts = Vec::with_capacity(per_axis.pow(n as u32));
            let mut counters = vec![0usize; n];
            loop {
                let x: Vec<f64> = (0..n)
                    .map(|k| {
                        let theta =
                            std::f64::consts::PI * (counters[k] as f64 + phase) / per_axis as f64;
                        half_widths[k] * theta.cos()
                    })
                    .collect();
                pts.push(x);
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
            pts
        }
        Shape::Ball { radius } => {
            // inflate the tensor grid so the filtered count reaches target
            let ball_fraction = semialg::unit_ball_volume(n) / 2f64.powi(n as i32);
            let inflated = (target as f64 / ball_fraction).ceil() as usize;
            let per_axis = ((inflated as f64).powf(1.0 / n as f64).ceil() as usize).max(2);
            let mut pts = Vec::new();
            let mut counters = vec![0usize; n];
            loop {
                let x: Vec<f64> = (0..n)
                    .map(|k| {
                        let theta =
                            std::f64::consts::PI * (counters[k] as f64 + phase) / per_axis as f64;
                        radius * theta.cos()
                    })
                    .collect();
                if x.iter().map(|v| v * v).sum::<f64>() <= radius * radius {
                    pts.push(x);
                }
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
            pts
        }
    }
}

/// Solves `min ∫_X p` over degree-`d` polynomials subject to
/// `p(x_j) >= I_K(x_j)` on a deterministic grid, by reduction to the
/// semidefinite solver with one diagonal block (a linear program). The
/// one-sidedness of the result is validated on an independent finer grid
/// and the worst violation is reported.
pub fn best_upper_l1(
    k_set: &SemialgebraicSet,
    x_dom: &OuterDomain,
    d: usize,
    grid_points: usize,
    basis: Basis,
    vol_ref: f64,
    opts: &ApproxOptions,
) -> Result<OneSidedApprox, ApproxError> {
    let n = x_dom.dimension();
    let index = BasisIndex::new(n, d as u32);
    let dim = index.len();
    if grid_points < 10 * dim {
        return Err(ApproxError::GridTooSmall {
            got: grid_points,
            dim,
        });
    }
    let grid = domain_grid(x_dom, grid_points, 0.5);
    let m = index.len();
    let g = grid.len();

    // maximize -∫p  s.t.  diag_j( sum_b c_b b(x_j) - I_K(x_j) ) >= 0
    let moments: Vec<f64> = index
        .indices
        .iter()
        .map(|alpha| semialg::basis_moment(x_dom, alpha, basis))
        .collect();
    let objective = nalgebra::DVector::from_iterator(m, moments.iter().map(|&v| -v));
    let mut constraints = Vec::with_capacity(m);
    for alpha in &index.indices {
        let b_poly = Polynomial::basis_element(n, basis, alpha.clone());
        let vals =
            nalgebra::DVector::from_iterator(g, grid.iter().map(|x| -b_poly.evaluate(x).unwrap()));
        constraints.push(BlockMatrix {
            blocks: vec![Block::Diag(vals)],
        });
    }
    let constant = BlockMatrix {
        blocks: vec![Block::Diag(nalgebra::DVector::from_iterator(
            g,
            grid.iter()
                .map(|x| if k_set.contains(x) { -1.0 } else { 0.0 }),
        ))],
    };
    let problem = SdpProblem {
        blocks: vec![BlockSpec::Diag(g)],
        objective,
        constraints,
        constant,
    };
    let solution = sdp::solve(&problem, &opts.lp_solver)?;
    match solution.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => return Err(ApproxError::LpInfeasible),
        other => return Err(ApproxError::Lp(other)),
    }
    let coeffs: Vec<f64> = solution.y.iter().copied().collect();
    let p_tilde = Polynomial::from_dense(n, basis, &index, &coeffs);
    let e_d = semialg::integrate(x_dom, &p_tilde) - vol_ref;

    let validation = domain_grid(x_dom, grid_points * opts.validation_factor, 0.0);
    let mut sup_norm = f64::NEG_INFINITY;
    let mut worst_violation = 0.0f64;
    for x in &validation {
        let v = p_tilde.evaluate(x).unwrap();
        sup_norm = sup_norm.max(v);
        let target = if k_set.contains(x) { 1.0 } else { 0.0 };
        worst_violation = worst_violation.max(target - v);
    }
    if worst_violation > opts.violation_tol {
        return Err(ApproxError::GridTooCoarse {
            violation: worst_violation,
            limit: opts.violation_tol,
        });
    }
    Ok(OneSidedApprox {
        d,
        e_d,
        p_tilde,
        sup_norm,
        worst_violation,
    })
}

/// Sweep over degrees with one shared constraint grid (sized for the largest
/// degree), so the feasible sets are nested and the errors non-increasing.
pub fn one_sided_sweep(
    k_set: &SemialgebraicSet,
    x_dom: &OuterDomain,
    degrees: &[usize],
    basis: Basis,
    vol_ref: f64,
    opts: &ApproxOptions,
) -> Result<Vec<OneSidedApprox>, ApproxError> {
    let n = x_dom.dimension();
    let max_d = degrees.iter().copied().max().unwrap_or(0);
    let dim_max = BasisIndex::new(n, max_d as u32).len();
    let grid_points = opts.oversample * dim_max;
    degrees
        .iter()
        .map(|&d| best_upper_l1(k_set, x_dom, d, grid_points, basis, vol_ref, opts))
        .collect()
}

/// Sup-norm growth probe across degrees: empirical evidence for a uniform
/// bound on optimal one-sided approximants.
#[derive(Debug, Clone)]
pub struct SupNormProbe {
    /// `(degree, sup norm over the validation grid)`.
    pub sup_norms: Vec<(usize, f64)>,
    /// Set when the sup norm grows by more than 50% from first to last degree.
    pub growth_flagged: bool,
}

pub fn sup_norm_probe(
    k_set: &SemialgebraicSet,
    x_dom: &OuterDomain,
    degrees: &[usize],
    basis: Basis,
    vol_ref: f64,
    opts: &ApproxOptions,
) -> Result<SupNormProbe, ApproxError> {
    let sweep = one_sided_sweep(k_set, x_dom, degrees, basis, vol_ref, opts)?;
    let sup_norms: Vec<(usize, f64)> = sweep.iter().map(|a| (a.d, a.sup_norm)).collect();
    let growth_flagged = match (sup_norms.first(), sup_norms.last()) {
        (Some(&(_, first)), Some(&(_, last))) => last > 1.5 * first,
        _ => false,
    };
    Ok(SupNormProbe {
        sup_norms,
        growth_flagged,
    })
}

/// Averaged modulus of continuity of the indicator and the matching tube
/// volume at radius `t`; the standard error combines both Monte Carlo
/// estimators.
#[derive(Debug, Clone)]
pub struct ModulusEstimate {
    pub t: f64,
    pub omega_bar: f64,
    pub tube_vol: f64,
    pub std_error: f64,
}

/// Monte Carlo estimate of the averaged modulus of continuity of `I_K` at
/// radius `t`: the outer integral samples `X`, and each local oscillation is
/// the supremum over sampled points of the radius-`t` ball around `x`
/// intersected with `X`.
pub fn avg_modulus(
    k_set: &SemialgebraicSet,
    x_dom: &OuterDomain,
    t: f64,
    samples: usize,
    inner_samples: usize,
    seed: u64,
) -> (f64, f64) {
    assert!((0.0..=1.0).contains(&t));
    if t == 0.0 {
        return (0.0, 0.0);
    }
    let n = x_dom.dimension();
    let vol_x = x_dom.volume();
    let outer = montecarlo::sample(x_dom, samples, seed);
    let mut hits = 0u64;
    let mut rng = ChaCha12Rng::seed_from_u64(seed ^ 0x6f6d);
    let mut y = vec![0.0; n];
    for x in &outer {
        let inside = k_set.contains(x);
        let mut oscillates = false;
        for _ in 0..inner_samples {
            // uniform point of the ball of radius t around x (Gaussian
            // direction, radial inverse-CDF), kept only if it lands in X
            let mut norm_sq = 0.0;
            for yk in y.iter_mut() {
                let u1: f64 = rng.gen();
                let u2: f64 = rng.gen();
                let z = (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
                *yk = z;
                norm_sq += z * z;
            }
            if norm_sq <= 1e-300 {
                continue;
            }
            let u: f64 = rng.gen();
            let scale = t * u.powf(1.0 / n as f64) / norm_sq.sqrt();
            for (yk, xk) in y.iter_mut().zip(x) {
                *yk = xk + *yk * scale;
            }
            if x_dom.contains(&y) && k_set.contains(&y) != inside {
                oscillates = true;
                break;
            }
        }
        if oscillates {
            hits += 1;
        }
    }
    let p_hat = hits as f64 / samples as f64;
    (
        vol_x * p_hat,
        vol_x * (p_hat * (1.0 - p_hat) / samples as f64).sqrt(),
    )
}

/// Point cloud on the boundary of `K`, found by bisecting segments between
/// inside/outside sample pairs down to 1e-6.
pub fn boundary_cloud(
    k_set: &SemialgebraicSet,
    x_dom: &OuterDomain,
    cloud_size: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, ApproxError> {
    let probe = montecarlo::sample(x_dom, (cloud_size * 8).max(4096), seed);
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for x in probe {
        if k_set.contains(&x) {
            inside.push(x);
        } else {
            outside.push(x);
        }
    }
    let pairs = inside.len().min(outside.len()) * 4;
    let mut cloud = Vec::with_capacity(cloud_size);
    if !inside.is_empty() && !outside.is_empty() {
        for attempt in 0..pairs.min(cloud_size * 4) {
            if cloud.len() >= cloud_size {
                break;
            }
            // co-prime strides cycle through distinct pairs
            let a = &inside[attempt % inside.len()];
            let b = &outside[(attempt * 3) % outside.len()];
            let mut lo = a.clone();
            let mut hi = b.clone();
            while dist(&lo, &hi) > 1e-6 {
                let mid: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
                if k_set.contains(&mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            cloud.push(lo);
        }
    }
    if cloud.len() < 100 {
        return Err(ApproxError::DegenerateBoundary {
            got: cloud.len(),
            required: 100,
        });
    }
    Ok(cloud)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Estimates `vol { x in X : dist(x, boundary of K) <= t }` by sampling `X`
/// and testing the distance to the cloud.
pub fn tube_volume_with_cloud(
    x_dom: &OuterDomain,
    cloud: &[Vec<f64>],
    t: f64,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    let vol_x = x_dom.volume();
    let t_sq = t * t;
    let hits = montecarlo::count_hits(x_dom, samples, seed, |x| {
        cloud.iter().any(|c| {
            let mut acc = 0.0;
            for (a, b) in x.iter().zip(c) {
                acc += (a - b) * (a - b);
                if acc > t_sq {
                    return false;
                }
            }
            true
        })
    });
    let p_hat = hits as f64 / samples as f64;
    (
        vol_x * p_hat,
        vol_x * (p_hat * (1.0 - p_hat) / samples as f64).sqrt(),
    )
}

pub fn tube_volume(
    k_set: &SemialgebraicSet,
    x_dom: &OuterDomain,
    t: f64,
    samples: usize,
    boundary_points: usize,
    seed: u64,
) -> Result<(f64, f64), ApproxError> {
    let cloud = boundary_cloud(k_set, x_dom, boundary_points, seed)?;
    Ok(tube_volume_with_cloud(x_dom, &cloud, t, samples, seed))
}

/// Runs both estimators at radius `t` and combines their standard errors.
pub fn modulus_and_tube(
    k_set: &SemialgebraicSet,
    x_dom: &OuterDomain,
    t: f64,
    samples: usize,
    inner_samples: usize,
    boundary_points: usize,
    seed: u64,
) -> Result<ModulusEstimate, ApproxError> {
    let (omega_bar, se_omega) = avg_modulus(k_set, x_dom, t, samples, inner_samples, seed);
    let (tube_vol, se_tube) = tube_volume(k_set, x_dom, t, samples, boundary_points, seed)?;
    Ok(ModulusEstimate {
        t,
        omega_bar,
        tube_vol,
        std_error: (se_omega * se_omega + se_tube * se_tube).sqrt(),
    })
}

/// Inputs to the closed-form degree bound guaranteeing `v_d - vol K < eps`.
#[derive(Debug, Clone, Copy)]
pub struct DegreeBoundInputs {
    pub epsilon: f64,
    pub c1: f64,
    pub c2: f64,
    pub c_g: f64,
    pub r: f64,
    pub n: usize,
    /// Derived: `ceil(2 c1 / epsilon)`.
    pub c3: u64,
}

impl DegreeBoundInputs {
    pub fn new(
        epsilon: f64,
        c1: f64,
        c2: f64,
        c_g: f64,
        r: f64,
        n: usize,
    ) -> Result<Self, ApproxError> {
        if !(epsilon > 0.0 && c1 > 0.0 && c2 > 0.0 && c_g > 0.0 && r > 0.0 && n >= 1) {
            return Err(ApproxError::NonPositiveInput);
        }
        Ok(DegreeBoundInputs {
            epsilon,
            c1,
            c2,
            c_g,
            r,
            n,
            c3: (2.0 * c1 / epsilon).ceil() as u64,
        })
    }
}

/// Closed-form bound evaluated in the log domain to avoid overflow; `value`
/// is infinite (and `overflow` set) once even the natural log of the bound
/// exceeds the floating-point range.
#[derive(Debug, Clone, Copy)]
pub struct DegreeBound {
    pub value: f64,
    pub log10: f64,
    pub overflow: bool,
    /// log10 of the asymptotic comparison form
    /// `exp[(3rn)^(2 c1/eps) / eps^(3 c2)]`.
    pub asymptotic_log10: f64,
}

/// `3^(d+1) r^d`, the growth factor entering the membership degree bound.
pub fn multiplier_growth(d: u32, r: f64) -> f64 {
    3f64.powi(d as i32 + 1) * r.powi(d as i32)
}

/// Evaluates `c2 * exp[(3 c3^2 (3 r n)^c3 (2 c_G vol B_n + eps) / eps)^c2]`.
pub fn eval_degree_bound(inputs: &DegreeBoundInputs) -> DegreeBound {
    let ln10 = std::f64::consts::LN_10;
    let vol_ball = semialg::unit_ball_volume(inputs.n);
    let c3 = inputs.c3 as f64;
    let ln_inner = 3f64.ln()
        + 2.0 * c3.ln()
        + c3 * (3.0 * inputs.r * inputs.n as f64).ln()
        + (2.0 * inputs.c_g * vol_ball + inputs.epsilon).ln()
        - inputs.epsilon.ln();
    // ln(bound) = ln c2 + inner^c2 = ln c2 + exp(c2 * ln_inner)
    let exponent = inputs.c2 * ln_inner;
    let (ln_bound, overflow) = if exponent > 700.0 {
        (f64::INFINITY, true)
    } else {
        (inputs.c2.ln() + exponent.exp(), false)
    };
    let value = if ln_bound > 700.0 {
        f64::INFINITY
    } else {
        ln_bound.exp()
    };
    // asymptotic form: ln = (3rn)^(2c1/eps) / eps^(3c2)
    let asy_exponent = (2.0 * inputs.c1 / inputs.epsilon) * (3.0 * inputs.r * inputs.n as f64).ln()
        - 3.0 * inputs.c2 * inputs.epsilon.ln();
    let asymptotic_log10 = if asy_exponent > 700.0 {
        f64::INFINITY
    } else {
        asy_exponent.exp() / ln10
    };
    DegreeBound {
        value,
        log10: ln_bound / ln10,
        overflow,
        asymptotic_log10,
    }
}

/// Statistics of a polynomial strictly positive on the target set.
#[derive(Debug, Clone, Copy)]
pub struct PositivePolyStats {
    pub degree: u32,
    pub max_value: f64,
    pub min_value: f64,
}

/// Algebraic description constants of the target set.
#[derive(Debug, Clone, Copy)]
pub struct SetDescriptionStats {
    pub n: usize,
    pub r: f64,
    pub c2: f64,
}

/// Degree at which a strictly positive polynomial is guaranteed to lie in
/// the truncated quadratic module:
/// `c2 * exp[(k(deg) deg^2 n^deg max/min)^c2]` with `k(d) = 3^(d+1) r^d`.
pub fn positivity_degree_bound(
    p_stats: &PositivePolyStats,
    set_stats: &SetDescriptionStats,
) -> Result<DegreeBound, ApproxError> {
    if !(p_stats.min_value > 0.0 && p_stats.max_value >= p_stats.min_value && set_stats.c2 > 0.0) {
        return Err(ApproxError::NonPositiveInput);
    }
    let ln10 = std::f64::consts::LN_10;
    let deg = p_stats.degree as f64;
    let ln_inner = multiplier_growth(p_stats.degree, set_stats.r).ln()
        + 2.0 * deg.max(1.0).ln()
        + deg * (set_stats.n as f64).ln()
        + (p_stats.max_value / p_stats.min_value).ln();
    let exponent = set_stats.c2 * ln_inner;
    let (ln_bound, overflow) = if exponent > 700.0 {
        (f64::INFINITY, true)
    } else {
        (set_stats.c2.ln() + exponent.exp(), false)
    };
    let value = if ln_bound > 700.0 {
        f64::INFINITY
    } else {
        ln_bound.exp()
    };
    Ok(DegreeBound {
        value,
        log10: ln_bound / ln10,
        overflow,
        asymptotic_log10: f64::NAN,
    })
}

/// Convergence-rate models fitted to `value - vol_ref` against degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateModel {
    /// `a / d^b`
    PowerLaw,
    /// `a / ln d`
    Log,
    /// `a / ln ln d`
    LogLog,
}

impl std::fmt::Display for RateModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RateModel::PowerLaw => "power-law",
            RateModel::Log => "log",
            RateModel::LogLog => "log-log",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct RateFit {
    pub model: RateModel,
    /// `[a]` for the single-parameter models, `[a, b]` for the power law.
    pub params: Vec<f64>,
    pub sse: f64,
}

#[derive(Debug, Clone)]
pub struct RateFitReport {
    pub fits: Vec<RateFit>,
    /// Index into `fits` of the smallest SSE; absent when degenerate.
    pub best: Option<usize>,
    /// Set when the gaps carry no usable variation.
    pub degenerate: bool,
}

/// Fits the three rate models to `(d, value)` data above a reference volume.
/// The power law is fitted by linear regression of `ln gap` on `ln d`; the
/// one-parameter models by direct least squares.
pub fn rate_fit(points: &[(f64, f64)], vol_ref: f64) -> Result<RateFitReport, ApproxError> {
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|&(d, v)| {
            let gap = v - vol_ref;
            (d >= 2.0 && gap > 0.0 && gap.is_finite()).then_some((d, gap))
        })
        .collect();
    if data.len() < 4 {
        return Err(ApproxError::InsufficientData(data.len()));
    }
    let gaps: Vec<f64> = data.iter().map(|&(_, g)| g).collect();
    let gmin = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    let gmax = gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let degenerate = (gmax - gmin) <= 1e-12 * gmax.abs().max(1.0);

    // power law: ln g = ln a - b ln d
    let xs: Vec<f64> = data.iter().map(|&(d, _)| d.ln()).collect();
    let ys: Vec<f64> = data.iter().map(|&(_, g)| g.ln()).collect();
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|v| v * v).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    let (a_pw, b_pw) = if denom.abs() > 1e-12 {
        let slope = (n * sxy - sx * sy) / denom;
        let intercept = (sy - slope * sx) / n;
        (intercept.exp(), -slope)
    } else {
        (f64::NAN, f64::NAN)
    };
    let sse_pw: f64 = data
        .iter()
        .map(|&(d, g)| {
            let pred = a_pw / d.powf(b_pw);
            (g - pred) * (g - pred)
        })
        .sum();

    // single-parameter models a * w(d): least squares a = sum(g w)/sum(w^2)
    let one_param = |w: &dyn Fn(f64) -> Option<f64>| -> (f64, f64) {
        let mut num = 0.0;
        let mut den = 0.0;
        for &(d, g) in &data {
            if let Some(wd) = w(d) {
                num += g * wd;
                den += wd * wd;
            }
        }
        let a = if den > 0.0 { num / den } else { f64::NAN };
        let sse = data
            .iter()
            .map(|&(d, g)| match w(d) {
                Some(wd) => {
                    let r = g - a * wd;
                    r * r
                }
                None => 0.0,
            })
            .sum();
        (a, sse)
    };
    let (a_log, sse_log) = one_param(&|d: f64| (d > 1.0).then(|| 1.0 / d.ln()));
    let (a_ll, sse_ll) = one_param(&|d: f64| {
        let l = d.ln();
        (l > 1.0).then(|| 1.0 / l.ln())
    });

    let fits = vec![
        RateFit {
            model: RateModel::PowerLaw,
            params: vec![a_pw, b_pw],
            sse: sse_pw,
        },
        RateFit {
            model: RateModel::Log,
            params: vec![a_log],
            sse: sse_log,
        },
        RateFit {
            model: RateModel::LogLog,
            params: vec![a_ll],
            sse: sse_ll,
        },
    ];
    let best = if degenerate {
        None
    } else {
        fits.iter()
            .enumerate()
            .filter(|(_, f)| f.sse.is_finite())
            .min_by(|a, b| a.1.sse.partial_cmp(&b.1.sse).unwrap())
            .map(|(i, _)| i)
    };
    Ok(RateFitReport {
        fits,
        best,
        degenerate,
    })
}
