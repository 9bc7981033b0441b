//! Acceptance suite: every criterion runs at its stated tolerance and prints
//! one pass/fail line. Tolerances are pinned in the assertions.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use sosvol::approx::{self, ApproxOptions, DegreeBoundInputs, RateModel};
use sosvol::hierarchy::{self, HierarchyOptions};
use sosvol::montecarlo;
use sosvol::poly::{Basis, MultiIndex, Polynomial};
use sosvol::sdp::{self, Block, BlockMatrix, BlockSpec, SdpProblem, SolveOptions, SolveStatus};
use sosvol::semialg::{OuterDomain, SemialgebraicSet, SetRole};

fn interval_k() -> SemialgebraicSet {
    let g = Polynomial::from_terms(
        1,
        Basis::Monomial,
        &[
            (MultiIndex::zero(1), 0.25),
            (MultiIndex::axis(1, 0, 2), -1.0),
        ],
    )
    .unwrap();
    SemialgebraicSet::new(1, SetRole::InnerK, vec![g]).unwrap()
}

fn interval_x() -> OuterDomain {
    OuterDomain::boxed(1, vec![1.0]).unwrap()
}

fn disk_k() -> SemialgebraicSet {
    let g = Polynomial::from_terms(
        2,
        Basis::Monomial,
        &[
            (MultiIndex::zero(2), 0.25),
            (MultiIndex::axis(2, 0, 2), -1.0),
            (MultiIndex::axis(2, 1, 2), -1.0),
        ],
    )
    .unwrap();
    SemialgebraicSet::new(2, SetRole::InnerK, vec![g]).unwrap()
}

fn pass(number: u32, name: &str, started: Instant) {
    println!(
        "acceptance {number:02} {name}: PASS ({:.2}s)",
        started.elapsed().as_secs_f64()
    );
}

#[test]
fn acceptance_01_interval_hierarchy_monomial() {
    let started = Instant::now();
    let opts = HierarchyOptions::for_dimension(1);
    let seq = hierarchy::run(
        &interval_k(),
        &interval_x(),
        2,
        20,
        2,
        Basis::Monomial,
        &opts,
    )
    .unwrap();
    let values = seq.values();
    assert_eq!(values.len(), 10, "all ten levels must solve");
    for w in values.windows(2) {
        assert!(
            w[1].1 <= w[0].1 + 1e-6,
            "monotonicity violated: v_{} = {} > v_{} = {}",
            w[1].0,
            w[1].1,
            w[0].0,
            w[0].1
        );
    }
    for &(d, v) in &values {
        assert!(v >= 1.0 - 1e-6, "v_{d} = {v} below vol K = 1");
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "runtime {elapsed:.1}s exceeds 60s");
    pass(1, "interval hierarchy, monomial basis d=2..20", started);
}

#[test]
fn acceptance_02_chebyshev_reach_degree_100() {
    let started = Instant::now();
    // Solver tolerance 2e-8: at degree 100 the Schur complement reaches the
    // f64 conditioning floor just above the 1e-8 default.
    let opts = HierarchyOptions {
        solver: SolveOptions {
            feas_tol: 2e-8,
            gap_tol: 2e-8,
            max_iter: 200,
        },
        ..HierarchyOptions::for_dimension(1)
    };
    let level20 = hierarchy::solve_level(
        &interval_k(),
        &interval_x(),
        20,
        Basis::ChebyshevTensor,
        &opts,
    )
    .unwrap();
    let level100 = hierarchy::solve_level(
        &interval_k(),
        &interval_x(),
        100,
        Basis::ChebyshevTensor,
        &opts,
    )
    .unwrap();
    assert!(
        level100.cert_residual <= 1e-5,
        "certificate residual {} exceeds 1e-5",
        level100.cert_residual
    );
    assert!(
        level100.v_d <= level20.v_d,
        "v_100 = {} not below v_20 = {}",
        level100.v_d,
        level20.v_d
    );
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 600.0, "runtime {elapsed:.1}s exceeds 10 minutes");
    pass(2, "Chebyshev basis solves at degree 100", started);
}

#[test]
fn acceptance_03_disk_hierarchy_and_oracle() {
    let started = Instant::now();
    let k = disk_k();
    let x = OuterDomain::ball(2, 1.0).unwrap();
    let opts = HierarchyOptions::for_dimension(2);
    let seq = hierarchy::run(&k, &x, 2, 10, 2, Basis::Monomial, &opts).unwrap();
    let values = seq.values();
    assert_eq!(values.len(), 5, "all five levels must solve");
    for w in values.windows(2) {
        assert!(w[1].1 <= w[0].1 + 1e-6, "monotonicity violated: {w:?}");
    }
    for &(d, v) in &values {
        assert!(v >= PI / 4.0 - 1e-6, "v_{d} = {v} below pi/4");
    }
    let oracle = montecarlo::volume(&k, &x, 1_000_000, 42);
    let se = oracle.std_error.unwrap();
    assert!(
        (oracle.value - PI / 4.0).abs() <= 4.0 * se,
        "oracle {} vs pi/4 = {} (se {se})",
        oracle.value,
        PI / 4.0
    );
    pass(3, "disk hierarchy bounds pi/4 and oracle agrees", started);
}

#[test]
fn acceptance_04_one_sided_error_rate() {
    let started = Instant::now();
    let opts = ApproxOptions::default();
    let degrees = [4usize, 8, 16, 32, 64];
    let sweep = approx::one_sided_sweep(
        &interval_k(),
        &interval_x(),
        &degrees,
        Basis::ChebyshevTensor,
        1.0,
        &opts,
    )
    .unwrap();
    for w in sweep.windows(2) {
        assert!(
            w[1].e_d <= w[0].e_d + 1e-9,
            "e_d increased: e_{} = {} > e_{} = {}",
            w[1].d,
            w[1].e_d,
            w[0].d,
            w[0].e_d
        );
    }
    let scaled: Vec<f64> = sweep.iter().map(|a| a.d as f64 * a.e_d).collect();
    let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(lo > 0.0, "scaled errors must stay positive, got {scaled:?}");
    assert!(
        hi / lo <= 10.0,
        "d*e_d max/min ratio {} exceeds 10 ({scaled:?})",
        hi / lo
    );
    pass(4, "one-sided L1 errors scale like 1/d", started);
}

#[test]
fn acceptance_05_hierarchy_dominates_l1_error() {
    let started = Instant::now();
    let degrees = [4usize, 8, 16, 32, 64];
    let approx_opts = ApproxOptions::default();
    let sweep = approx::one_sided_sweep(
        &interval_k(),
        &interval_x(),
        &degrees,
        Basis::ChebyshevTensor,
        1.0,
        &approx_opts,
    )
    .unwrap();
    let hier_opts = HierarchyOptions {
        solver: SolveOptions {
            feas_tol: 2e-8,
            gap_tol: 2e-8,
            max_iter: 200,
        },
        ..HierarchyOptions::for_dimension(1)
    };
    for a in &sweep {
        let level = hierarchy::solve_level(
            &interval_k(),
            &interval_x(),
            a.d,
            Basis::ChebyshevTensor,
            &hier_opts,
        )
        .unwrap();
        // the feasible set of the relaxation sits inside the one-sided
        // approximation's feasible set, so its gap dominates e_d
        assert!(
            level.v_d - 1.0 >= a.e_d - 1e-5,
            "d = {}: v_d - vol K = {} below e_d = {}",
            a.d,
            level.v_d - 1.0,
            a.e_d
        );
    }
    pass(5, "volume gap dominates one-sided L1 error", started);
}

#[test]
fn acceptance_06_tube_and_modulus() {
    let started = Instant::now();
    let k = disk_k();
    let x = OuterDomain::ball(2, 1.0).unwrap();
    let cloud = approx::boundary_cloud(&k, &x, 2000, 17).unwrap();
    let mut tubes = Vec::new();
    for &t in &[0.05, 0.1] {
        let (vol, se) = approx::tube_volume_with_cloud(&x, &cloud, t, 150_000, 23);
        let exact = 2.0 * PI * t;
        assert!(
            (vol - exact).abs() <= 4.0 * se,
            "t = {t}: tube {vol} vs 2*pi*t = {exact} (se {se})"
        );
        tubes.push((t, vol, se));
    }
    let ratio = tubes[1].1 / tubes[0].1;
    assert!(
        (1.6..=2.4).contains(&ratio),
        "tube ratio {ratio} outside [1.6, 2.4]"
    );
    for &(t, tube, tube_se) in &tubes {
        let (omega, omega_se) = approx::avg_modulus(&k, &x, t, 60_000, 64, 31);
        let se = (omega_se * omega_se + tube_se * tube_se).sqrt();
        assert!(
            omega <= tube + 3.0 * se,
            "t = {t}: omega {omega} exceeds tube {tube} + 3se"
        );
    }
    pass(
        6,
        "tube volumes match the annulus and bound the modulus",
        started,
    );
}

fn constructed_problem(seed: u64, sides: &[usize], m: usize) -> (SdpProblem, DVector<f64>) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let specs: Vec<BlockSpec> = sides.iter().map(|&s| BlockSpec::Dense(s)).collect();
    let mut a_mats = Vec::with_capacity(m);
    for _ in 0..m {
        let blocks = sides
            .iter()
            .map(|&s| {
                let mut mat = DMatrix::from_fn(s, s, |_, _| rng.gen_range(-1.0..1.0));
                let t = mat.transpose();
                mat += t;
                mat *= 0.5;
                Block::Dense(mat)
            })
            .collect();
        a_mats.push(BlockMatrix { blocks });
    }
    let y_star = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
    let mut s_blocks = Vec::new();
    let mut z_blocks = Vec::new();
    for &s in sides {
        let q = DMatrix::from_fn(s, s, |_, _| rng.gen_range(-1.0..1.0))
            .qr()
            .q();
        let split = s / 2;
        let mut s_eigs = DVector::zeros(s);
        let mut z_eigs = DVector::zeros(s);
        for i in 0..s {
            if i < split {
                s_eigs[i] = rng.gen_range(0.5..2.0);
            } else {
                z_eigs[i] = rng.gen_range(0.5..2.0);
            }
        }
        s_blocks.push(Block::Dense(
            &q * DMatrix::from_diagonal(&s_eigs) * q.transpose(),
        ));
        z_blocks.push(Block::Dense(
            &q * DMatrix::from_diagonal(&z_eigs) * q.transpose(),
        ));
    }
    let s_star = BlockMatrix { blocks: s_blocks };
    let z_star = BlockMatrix { blocks: z_blocks };
    let mut constant = s_star.clone();
    for (j, a) in a_mats.iter().enumerate() {
        constant.axpy(y_star[j], a);
    }
    let objective = DVector::from_iterator(m, a_mats.iter().map(|a| a.dot(&z_star)));
    (
        SdpProblem {
            blocks: specs,
            objective,
            constraints: a_mats,
            constant,
        },
        y_star,
    )
}

#[test]
fn acceptance_07_sdp_recovery_and_residuals() {
    let started = Instant::now();
    let opts = SolveOptions::with_tolerance(1e-10);
    for trial in 0..20u64 {
        let (p, y_star) = constructed_problem(500 + trial, &[4, 3], 5);
        let sol = sdp::solve(&p, &opts).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal, "trial {trial}");
        let err = (&sol.y - &y_star)
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = 1.0 + y_star.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(
            err <= 1e-6 * scale,
            "trial {trial}: recovery error {err} exceeds 1e-6"
        );
        let r = sdp::residuals(&p, &sol);
        assert!(
            r.primal <= 1e-7 && r.dual <= 1e-7,
            "trial {trial}: independent residuals {r:?}"
        );
        assert!(r.gap <= 1e-6 * (1.0 + sol.primal_objective(&p).abs()));
    }
    pass(7, "constructed SDP optima recovered and certified", started);
}

#[test]
fn acceptance_08_degree_bound_evaluator() {
    let started = Instant::now();
    let inputs = DegreeBoundInputs::new(2.0, 1.0, 1.0, 1.0, 1.0, 1).unwrap();
    assert_eq!(inputs.c3, 1);
    let bound = approx::eval_degree_bound(&inputs);
    let ln_bound = bound.log10 * std::f64::consts::LN_10;
    assert!(
        (ln_bound - 27.0).abs() <= 1e-10 * 27.0,
        "log-domain value {ln_bound} differs from 27"
    );
    let mut prev = f64::INFINITY;
    for i in 0..10 {
        let eps = 0.4 + 0.3 * i as f64;
        let b =
            approx::eval_degree_bound(&DegreeBoundInputs::new(eps, 1.0, 1.0, 1.0, 1.3, 2).unwrap());
        assert!(
            b.log10 <= prev + 1e-12,
            "bound increased at eps = {eps}: {} > {prev}",
            b.log10
        );
        prev = b.log10;
    }
    pass(8, "degree bound matches the hand-evaluated case", started);
}

#[test]
fn acceptance_09_rate_fitting() {
    let started = Instant::now();
    let power: Vec<(f64, f64)> = [4, 8, 16, 32, 64]
        .iter()
        .map(|&d| (d as f64, 5.0 / (d as f64 * d as f64)))
        .collect();
    let report = approx::rate_fit(&power, 0.0).unwrap();
    let b = report.fits[0].params[1];
    assert!((b - 2.0).abs() <= 0.05, "power-law exponent {b}");

    let logdata: Vec<(f64, f64)> = [4, 8, 16, 32, 64, 128]
        .iter()
        .map(|&d| (d as f64, 1.0 / (d as f64).ln()))
        .collect();
    let report = approx::rate_fit(&logdata, 0.0).unwrap();
    let best = report.best.expect("non-degenerate data");
    assert_eq!(report.fits[best].model, RateModel::Log);
    pass(9, "rate fits recover synthetic laws", started);
}

fn run_cli(args: &[&str]) {
    let output = Command::new(env!("CARGO_BIN_EXE_sosvol"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        output.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

#[test]
fn acceptance_10_byte_identical_csvs() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let interval = fixture("interval.json");
    let interval = interval.to_str().unwrap();
    for (out_a, out_b, args) in [
        (
            dir.path().join("vol-a"),
            dir.path().join("vol-b"),
            vec![
                "volume",
                interval,
                "--dmax",
                "8",
                "--seed",
                "11",
                "--samples",
                "200000",
            ],
        ),
        (
            dir.path().join("apx-a"),
            dir.path().join("apx-b"),
            vec![
                "approx",
                interval,
                "--degrees",
                "4,8",
                "--t-values",
                "0.05,0.1",
                "--seed",
                "11",
                "--samples",
                "30000",
            ],
        ),
    ] {
        let mut run_a = args.clone();
        run_a.extend(["--out", out_a.to_str().unwrap()]);
        run_cli(&run_a);
        let mut run_b = args.clone();
        run_b.extend(["--out", out_b.to_str().unwrap()]);
        run_cli(&run_b);
        let mut csvs: Vec<String> = std::fs::read_dir(&out_a)
            .unwrap()
            .filter_map(|e| {
                let name = e.unwrap().file_name().into_string().unwrap();
                name.ends_with(".csv").then_some(name)
            })
            .collect();
        csvs.sort();
        assert!(!csvs.is_empty());
        for name in csvs {
            let a = std::fs::read(out_a.join(&name)).unwrap();
            let b = std::fs::read(out_b.join(&name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }
    // the oracle command is deterministic as well
    let oracle_a = dir.path().join("oracle-a.csv");
    let oracle_b = dir.path().join("oracle-b.csv");
    run_cli(&[
        "oracle",
        interval,
        "--samples",
        "100000",
        "--seed",
        "3",
        "--out",
        oracle_a.to_str().unwrap(),
    ]);
    run_cli(&[
        "oracle",
        interval,
        "--samples",
        "100000",
        "--seed",
        "3",
        "--out",
        oracle_b.to_str().unwrap(),
    ]);
    assert_eq!(
        std::fs::read(&oracle_a).unwrap(),
        std::fs::read(&oracle_b).unwrap()
    );
    pass(10, "identical seeds reproduce byte-identical CSVs", started);
}
