//! Command implementations: orchestration, file emission, exit codes.
//!
//! Exit codes: 0 success, 1 usage or parse errors, 2 standing-assumption
//! violations, 3 solver failure at every hierarchy level.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sosvol::approx::{self, ApproxOptions, DegreeBoundInputs, ModulusEstimate, OneSidedApprox};
use sosvol::hierarchy::{self, HierarchyOptions};
use sosvol::montecarlo::{self, SamplingMode, VolumeEstimate};
use sosvol::poly::Basis;
use sosvol::sdp::{self, SolveOptions};
use sosvol::semialg::{self, GeometrySummary};

use crate::output::fmt17;
use crate::problem::{load_problem, BasisSpec, LoadedProblem};

pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

pub type CmdResult = Result<(), Failure>;

fn read_problem(path: &Path) -> Result<LoadedProblem, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    load_problem(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))
}

fn default_basis(n: usize) -> Basis {
    if n == 1 {
        Basis::ChebyshevTensor
    } else {
        Basis::Monomial
    }
}

fn basis_name(b: Basis) -> &'static str {
    match b {
        Basis::Monomial => "monomial",
        Basis::ChebyshevTensor => "chebyshev",
    }
}

fn certify_or_fail(problem: &LoadedProblem, seed: u64) -> Result<GeometrySummary, Failure> {
    semialg::certify_assumptions(&problem.k_set, &problem.x_dom, 50_000, seed).map_err(|e| {
        Failure {
            code: 2,
            message: format!("assumption violation: {e}"),
        }
    })
}

pub struct VolumeArgs {
    pub file: PathBuf,
    pub dmin: Option<usize>,
    pub dmax: Option<usize>,
    pub step: Option<usize>,
    pub basis: Option<BasisSpec>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub out: PathBuf,
    pub timing: bool,
    pub sdpa: bool,
}

pub fn cmd_volume(args: VolumeArgs) -> CmdResult {
    let problem = read_problem(&args.file)?;
    let n = problem.k_set.dimension();
    let opts = &problem.options;
    let dmin = args.dmin.or(opts.dmin).unwrap_or(2);
    let dmax = args.dmax.or(opts.dmax).unwrap_or(10);
    let step = args.step.or(opts.step).unwrap_or(2);
    if dmax < dmin {
        return Err(Failure::usage(format!(
            "--dmax ({dmax}) must not be below --dmin ({dmin})"
        )));
    }
    if dmin == 0 || !dmin.is_multiple_of(2) || step == 0 || !step.is_multiple_of(2) {
        return Err(Failure::usage(
            "degrees and step must be positive even numbers".to_string(),
        ));
    }
    let basis = args
        .basis
        .or(opts.basis)
        .map(Basis::from)
        .unwrap_or_else(|| default_basis(n));
    let seed = args.seed.or(opts.seed).unwrap_or(0);
    let samples = args.samples.or(opts.samples).unwrap_or(1_000_000);
    let mut hier_opts = HierarchyOptions::for_dimension(n);
    if let Some(tol) = args.tol.or(opts.tol) {
        hier_opts.solver = SolveOptions {
            feas_tol: tol,
            gap_tol: tol,
            max_iter: hier_opts.solver.max_iter,
        };
    }

    ensure_dir(&args.out)?;

    let t_certify = Instant::now();
    let geometry = certify_or_fail(&problem, seed)?;
    let certify_seconds = t_certify.elapsed().as_secs_f64();

    let t_hier = Instant::now();
    let seq = hierarchy::run(
        &problem.k_set,
        &problem.x_dom,
        dmin,
        dmax,
        step,
        basis,
        &hier_opts,
    )
    .map_err(|e| Failure::usage(e.to_string()))?;
    let hierarchy_seconds = t_hier.elapsed().as_secs_f64();

    let t_oracle = Instant::now();
    let oracle = montecarlo::volume(&problem.k_set, &problem.x_dom, samples, seed);
    let oracle_seconds = t_oracle.elapsed().as_secs_f64();

    let csv_path = args.out.join("hierarchy.csv");
    write_file(&csv_path, &hierarchy::sweep_csv(&seq, args.timing))?;

    if args.sdpa {
        for level in &seq.levels {
            if let Ok(assembly) =
                hierarchy::assemble(&problem.k_set, &problem.x_dom, level.d, level.basis_used)
            {
                let mut buf = Vec::new();
                if sdp::write_sdpa_sparse(&assembly.problem, &mut buf).is_ok() {
                    write_file(
                        &args.out.join(format!("level_{:03}.dat-s", level.d)),
                        &String::from_utf8_lossy(&buf),
                    )?;
                }
            }
        }
    }

    let vol_ref = opts.vol_ref.unwrap_or(oracle.value);
    let values = seq.values();
    let rate = if values.len() >= 4 {
        approx::rate_fit(
            &values
                .iter()
                .map(|&(d, v)| (d as f64, v))
                .collect::<Vec<_>>(),
            vol_ref,
        )
        .ok()
    } else {
        None
    };

    let mut report = String::new();
    report.push_str("volume run\n==========\n\n");
    report.push_str(&format!(
        "problem: {} (n = {n}, basis = {})\n",
        args.file.display(),
        basis_name(basis)
    ));
    report.push_str(&format!(
        "degrees: {dmin}..{dmax} step {step}, seed {seed}\n\n"
    ));
    report.push_str("geometry\n--------\n");
    report.push_str(&format!(
        "inner box half-width s* = {}\nr = 1/s*              = {}\ninterior margin       = {}\n",
        fmt17(geometry.inner_box_half_width),
        fmt17(geometry.r),
        fmt17(geometry.interior_margin)
    ));
    report.push_str("inclusion K within X: statistically certified (50000 samples)\n\n");
    report.push_str("oracle\n------\n");
    report.push_str(&format!(
        "volume estimate = {} +- {} (1 std error, {} samples, seed {})\n\n",
        fmt17(oracle.value),
        fmt17(oracle.std_error.unwrap_or(f64::NAN)),
        oracle.samples,
        oracle.seed
    ));
    report.push_str("levels\n------\n");
    let mut successes = 0usize;
    for level in &seq.levels {
        match &level.result {
            Ok(r) => {
                successes += 1;
                report.push_str(&format!(
                    "d = {:3}  v_d = {}  cert_residual = {}  gap = {}  basis = {}\n",
                    r.d,
                    fmt17(r.v_d),
                    fmt17(r.cert_residual),
                    fmt17(r.solver_gaps.duality_gap),
                    basis_name(level.basis_used)
                ));
            }
            Err(f) => {
                report.push_str(&format!("d = {:3}  FAILED: {}\n", level.d, f.message));
            }
        }
    }
    let violations = seq.monotonicity_violations(hier_opts.monotonicity_tol);
    if violations.is_empty() {
        report.push_str("monotonicity: ok\n\n");
    } else {
        report.push_str(&format!("monotonicity violations: {violations:?}\n\n"));
    }
    if let Some((_, v_last)) = values.last() {
        report.push_str("diagnostics\n-----------\n");
        report.push_str(&format!(
            "vol X / v_d(max) = {}  (outer-domain looseness)\n\n",
            fmt17(problem.x_dom.volume() / v_last)
        ));
    }
    if let Some(rate) = &rate {
        report.push_str(
            "rate fits (empirical constants; gap = v_d - reference)\n-------------------------------------------------------\n",
        );
        report.push_str(&rate_table(rate));
        report.push('\n');
    }
    if args.timing {
        report.push_str("timing\n------\n");
        report.push_str(&format!(
            "certify   {certify_seconds:.3}s\nhierarchy {hierarchy_seconds:.3}s\noracle    {oracle_seconds:.3}s\n"
        ));
    }
    write_file(&args.out.join("report.txt"), &report)?;

    println!(
        "wrote {} and {}",
        csv_path.display(),
        args.out.join("report.txt").display()
    );
    for line in report.lines().take(20) {
        println!("{line}");
    }
    if successes == 0 {
        return Err(Failure {
            code: 3,
            message: "solver failed at every level".into(),
        });
    }
    Ok(())
}

fn rate_table(report: &approx::RateFitReport) -> String {
    let mut out = String::new();
    for (i, fit) in report.fits.iter().enumerate() {
        let marker = if report.best == Some(i) {
            " <- best"
        } else {
            ""
        };
        let params = fit
            .params
            .iter()
            .map(|p| fmt17(*p))
            .collect::<Vec<_>>()
            .join(", ");
        out.push_str(&format!(
            "{:<10} params = [{params}]  sse = {}{marker}\n",
            fit.model.to_string(),
            fmt17(fit.sse)
        ));
    }
    if report.degenerate {
        out.push_str("degenerate: gaps carry no usable variation\n");
    }
    out
}

pub struct ApproxArgs {
    pub file: PathBuf,
    pub degrees: Option<Vec<usize>>,
    pub grid: Option<usize>,
    pub t_values: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub basis: Option<BasisSpec>,
    pub samples: Option<usize>,
    pub out: PathBuf,
    pub timing: bool,
}

pub fn cmd_approx(args: ApproxArgs) -> CmdResult {
    let problem = read_problem(&args.file)?;
    let n = problem.k_set.dimension();
    let opts = &problem.options;
    let degrees = args
        .degrees
        .or_else(|| opts.degrees.clone())
        .unwrap_or_else(|| vec![4, 8, 16, 32, 64]);
    if degrees.is_empty() {
        return Err(Failure::usage("at least one degree required".to_string()));
    }
    let t_values = args
        .t_values
        .or_else(|| opts.t_values.clone())
        .unwrap_or_else(|| vec![0.05, 0.1]);
    if t_values.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
        return Err(Failure::usage("t values must lie in [0, 1]".to_string()));
    }
    let seed = args.seed.or(opts.seed).unwrap_or(0);
    let samples = args.samples.or(opts.samples).unwrap_or(200_000);
    let basis = args
        .basis
        .or(opts.basis)
        .map(Basis::from)
        .unwrap_or_else(|| default_basis(n));

    ensure_dir(&args.out)?;
    let t_start = Instant::now();
    let _geometry = certify_or_fail(&problem, seed)?;

    // reference volume: analytic when supplied, Monte Carlo otherwise
    let (vol_ref, vol_ref_estimate): (f64, Option<VolumeEstimate>) = match opts.vol_ref {
        Some(v) => (v, None),
        None => {
            let est =
                montecarlo::volume(&problem.k_set, &problem.x_dom, samples.max(500_000), seed);
            (est.value, Some(est))
        }
    };

    let approx_opts = ApproxOptions::default();
    // one grid shared by all degrees, sized for the largest, so the
    // feasible sets are nested and e_d is non-increasing
    let max_d = degrees.iter().copied().max().unwrap();
    let dim_max = sosvol::poly::BasisIndex::new(n, max_d as u32).len();
    let grid_points = args
        .grid
        .or(opts.grid)
        .unwrap_or(approx_opts.oversample * dim_max)
        .max(10 * dim_max);

    let mut sweep: Vec<OneSidedApprox> = Vec::with_capacity(degrees.len());
    for &d in &degrees {
        let a = approx::best_upper_l1(
            &problem.k_set,
            &problem.x_dom,
            d,
            grid_points,
            basis,
            vol_ref,
            &approx_opts,
        )
        .map_err(|e| Failure::usage(format!("degree {d}: {e}")))?;
        sweep.push(a);
    }
    let lp_seconds = t_start.elapsed().as_secs_f64();

    let mut ed_csv = String::from("d,e_d,sup_norm\n");
    for a in &sweep {
        ed_csv.push_str(&format!("{},{},{}\n", a.d, fmt17(a.e_d), fmt17(a.sup_norm)));
    }
    write_file(&args.out.join("ed.csv"), &ed_csv)?;

    let growth_flagged = match (sweep.first(), sweep.last()) {
        (Some(first), Some(last)) => last.sup_norm > 1.5 * first.sup_norm,
        _ => false,
    };

    let t_mod = Instant::now();
    let mut modulus: Vec<ModulusEstimate> = Vec::with_capacity(t_values.len());
    for &t in &t_values {
        let est =
            approx::modulus_and_tube(&problem.k_set, &problem.x_dom, t, samples, 64, 2000, seed)
                .map_err(|e| Failure::usage(format!("t = {t}: {e}")))?;
        modulus.push(est);
    }
    let modulus_seconds = t_mod.elapsed().as_secs_f64();

    let mut mod_csv = String::from("t,omega_bar,tube_vol,std_error\n");
    for est in &modulus {
        mod_csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt17(est.t),
            fmt17(est.omega_bar),
            fmt17(est.tube_vol),
            fmt17(est.std_error)
        ));
    }
    write_file(&args.out.join("modulus.csv"), &mod_csv)?;

    let mut report = String::new();
    report.push_str("approximation run\n=================\n\n");
    report.push_str(&format!(
        "problem: {} (n = {n}, basis = {}, seed {seed})\n",
        args.file.display(),
        basis_name(basis)
    ));
    match (&vol_ref_estimate, opts.vol_ref) {
        (_, Some(v)) => report.push_str(&format!("reference volume (analytic): {}\n\n", fmt17(v))),
        (Some(est), _) => report.push_str(&format!(
            "reference volume (Monte Carlo): {} +- {} (1 std error); e_d carries this uncertainty\n\n",
            fmt17(est.value),
            fmt17(est.std_error.unwrap_or(f64::NAN))
        )),
        _ => {}
    }
    report.push_str("one-sided L1 errors\n-------------------\n");
    for a in &sweep {
        report.push_str(&format!(
            "d = {:3}  e_d = {}  sup_norm = {}  worst_violation = {}\n",
            a.d,
            fmt17(a.e_d),
            fmt17(a.sup_norm),
            fmt17(a.worst_violation)
        ));
    }
    report.push_str(&format!(
        "sup-norm growth flag (last > 1.5 x first): {growth_flagged}\n\n"
    ));
    report.push_str("modulus and tube estimates\n--------------------------\n");
    for est in &modulus {
        let chain_ok = est.omega_bar <= est.tube_vol + 3.0 * est.std_error;
        report.push_str(&format!(
            "t = {}  omega_bar = {}  tube_vol = {}  std_error = {}  omega <= tube + 3se: {chain_ok}\n",
            fmt17(est.t),
            fmt17(est.omega_bar),
            fmt17(est.tube_vol),
            fmt17(est.std_error)
        ));
    }
    if modulus.len() >= 2 {
        let a = &modulus[0];
        let b = &modulus[modulus.len() - 1];
        if a.tube_vol > 0.0 && a.t > 0.0 {
            let ratio = b.tube_vol / a.tube_vol;
            let expected = b.t / a.t;
            report.push_str(&format!(
                "tube ratio estimate({})/estimate({}) = {} (expected about {} if the tube grows linearly)\n",
                fmt17(b.t),
                fmt17(a.t),
                fmt17(ratio),
                fmt17(expected)
            ));
        }
    }
    if args.timing {
        report.push_str(&format!(
            "\ntiming\n------\nlp sweep {lp_seconds:.3}s\nmodulus  {modulus_seconds:.3}s\n"
        ));
    }
    write_file(&args.out.join("report.txt"), &report)?;
    println!(
        "wrote {}, {}, {}",
        args.out.join("ed.csv").display(),
        args.out.join("modulus.csv").display(),
        args.out.join("report.txt").display()
    );
    Ok(())
}

pub struct BoundArgs {
    pub epsilon: f64,
    pub c1: f64,
    pub c2: f64,
    pub c_g: f64,
    pub r: f64,
    pub n: usize,
}

pub fn cmd_bound(args: BoundArgs) -> CmdResult {
    let inputs = DegreeBoundInputs::new(args.epsilon, args.c1, args.c2, args.c_g, args.r, args.n)
        .map_err(|e| Failure::usage(e.to_string()))?;
    let bound = approx::eval_degree_bound(&inputs);
    println!("c3(epsilon) = {}", inputs.c3);
    println!(
        "k(c3) = 3^(c3+1) r^c3 = {}",
        fmt17(approx::multiplier_growth(inputs.c3 as u32, inputs.r))
    );
    println!("log10(degree bound) = {}", fmt17(bound.log10));
    if bound.value.is_finite() {
        println!("degree bound = {}", fmt17(bound.value));
    } else {
        println!("degree bound = overflow (beyond f64 range)");
    }
    println!(
        "asymptotic form log10 exp[(3rn)^(2c1/eps)/eps^(3c2)] = {}",
        fmt17(bound.asymptotic_log10)
    );
    Ok(())
}

pub struct RateArgs {
    pub csv: PathBuf,
    pub vol_ref: f64,
    pub out: Option<PathBuf>,
}

pub fn cmd_rate(args: RateArgs) -> CmdResult {
    let text = fs::read_to_string(&args.csv)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.csv.display())))?;
    let mut points = Vec::new();
    for line in text.lines() {
        let mut fields = line.split(',');
        let (Some(a), Some(b)) = (fields.next(), fields.next()) else {
            continue;
        };
        if let (Ok(d), Ok(v)) = (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
            points.push((d, v));
        }
    }
    let report =
        approx::rate_fit(&points, args.vol_ref).map_err(|e| Failure::usage(e.to_string()))?;
    let table = rate_table(&report);
    print!("{table}");
    if let Some(best) = report.best {
        println!("best model: {}", report.fits[best].model);
    }
    if let Some(out) = &args.out {
        if let Some(dir) = out.parent() {
            if !dir.as_os_str().is_empty() {
                ensure_dir(dir)?;
            }
        }
        write_file(out, &table)?;
    }
    Ok(())
}

pub struct OracleArgs {
    pub file: PathBuf,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub low_discrepancy: bool,
    pub out: Option<PathBuf>,
}

pub fn cmd_oracle(args: OracleArgs) -> CmdResult {
    let problem = read_problem(&args.file)?;
    let seed = args.seed.or(problem.options.seed).unwrap_or(0);
    let samples = args
        .samples
        .or(problem.options.samples)
        .unwrap_or(1_000_000);
    let mode = if args.low_discrepancy {
        SamplingMode::LowDiscrepancy
    } else {
        SamplingMode::Pseudo
    };
    let est = montecarlo::volume_with_mode(&problem.k_set, &problem.x_dom, samples, seed, mode);
    match est.std_error {
        Some(se) => println!(
            "volume = {} +- {} (1 std error; 95% CI [{}, {}]; {} samples, seed {})",
            fmt17(est.value),
            fmt17(se),
            fmt17(est.value - 1.96 * se),
            fmt17(est.value + 1.96 * se),
            est.samples,
            est.seed
        ),
        None => println!(
            "volume = {} (low-discrepancy, no error model; {} samples)",
            fmt17(est.value),
            est.samples
        ),
    }
    if let Some(out) = &args.out {
        if let Some(dir) = out.parent() {
            if !dir.as_os_str().is_empty() {
                ensure_dir(dir)?;
            }
        }
        let mut csv = String::from("value,std_error,samples,seed\n");
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt17(est.value),
            est.std_error.map(fmt17).unwrap_or_else(|| "NaN".into()),
            est.samples,
            est.seed
        ));
        write_file(out, &csv)?;
    }
    Ok(())
}
