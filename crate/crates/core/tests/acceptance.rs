//! Acceptance suite: every release-gating check in one place, one PASS/FAIL
//! line per criterion. Run with `--nocapture` to see the lines as they
//! complete:
//!
//! ```text
//! cargo test --release -p sgam --test acceptance -- --nocapture
//! ```
//!
//! The reproduction studies (criteria 4 and 5) pin a master seed, a reduced
//! grid and a path-fit iteration cap; their thresholds are wide because the
//! randomness of the original studies is not seed-reproducible.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::path::PathBuf;
use std::time::Instant;

use sgam::oracle;
use sgam::*;

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn spambase_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/spambase.csv")
}

/// Fit settings for the tuning paths of the reproduction studies: selection
/// quality saturates well before full convergence, and the weak-penalty end
/// of each path is near-separable, so a cap keeps the sweeps inside their
/// runtime budgets.
fn path_fit_config() -> FitConfig {
    FitConfig {
        max_iterations: 800,
        tolerance: 1e-7,
        ..FitConfig::default()
    }
}

fn criterion_1_prox_oracle() -> Outcome {
    let t0 = Instant::now();
    let sparse_group_dev = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0xAC01, i));
            let d = rng.random_range(1..=3);
            let m = rng.random_range(1..=3);
            let b = Array2::from_shape_fn((d, m), |_| rng.random_range(-3.0..3.0));
            let lambda = rng.random_range(0.05..1.5);
            let kappa = rng.random_range(0.05..1.5);
            let step = rng.random_range(0.2..1.2);
            let w = PenaltyWeights::constant(lambda, kappa, d, m).unwrap();
            let got = prox_sparse_group(&b, &w, step).unwrap();
            let want = oracle::grid_prox_sparse_group_constant(&b, lambda, kappa, step, 1e-2);
            got.iter()
                .zip(want.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);

    let sorted_l1_dev = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0xAC02, i));
            let v = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            let mut w = [rng.random_range(0.0..2.0), rng.random_range(0.0..2.0)];
            if w[0] < w[1] {
                w.swap(0, 1);
            }
            let got = prox_sorted_l1(&v, &w).unwrap();
            let want = oracle::grid_prox_sorted_l1_2d(v, w, 1e-3);
            (got[0] - want[0]).abs().max((got[1] - want[1]).abs())
        })
        .reduce(|| 0.0, f64::max);

    let elapsed = t0.elapsed();
    Outcome {
        name: "1 prox oracle equivalence",
        passed: sparse_group_dev <= 2e-2 && sorted_l1_dev <= 2e-3 && elapsed.as_secs() < 120,
        detail: format!(
            "max dev {sparse_group_dev:.2e} (sparse group, tol 2e-2), {sorted_l1_dev:.2e} (sorted-l1, tol 2e-3), {elapsed:.1?}"
        ),
    }
}

fn criterion_2_gradient_check() -> Outcome {
    let t0 = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0xAC03, i));
        let n = rng.random_range(5..=30);
        let d = rng.random_range(1..=3);
        let m = rng.random_range(1..=4);
        let x = Array2::from_shape_fn((n, d), |_| rng.random::<f64>());
        let design = expand(&x, &BasisSpec::cosine(m).unwrap()).unwrap();
        let y: Vec<u8> = (0..n)
            .map(|_| u8::from(rng.random::<f64>() < 0.5))
            .collect();
        let coef = CoefficientMatrix::new(
            Array2::from_shape_fn((d, m), |_| rng.random_range(-1.0..1.0)),
            rng.random_range(-0.5..0.5),
        );
        let (gb, gmu) = logistic_gradient(&coef, &design, &y).unwrap();
        let (fd_b, fd_mu) =
            oracle::finite_difference_gradient(coef.b(), coef.mu(), &design, &y, 1e-5);
        for (a, f) in gb
            .iter()
            .chain(std::iter::once(&gmu))
            .zip(fd_b.iter().chain(std::iter::once(&fd_mu)))
        {
            let err = (a - f).abs() / (f.abs()).max(1e-3);
            let abs_ok = (a - f).abs() <= 1e-8;
            if !abs_ok {
                worst = worst.max(err);
            }
        }
    }
    let elapsed = t0.elapsed();
    Outcome {
        name: "2 gradient finite-difference check",
        passed: worst <= 1e-5 && elapsed.as_secs() < 30,
        detail: format!("worst relative dev {worst:.2e} (tol 1e-5), {elapsed:.1?}"),
    }
}

fn criterion_3_solver_consistency() -> Outcome {
    let t0 = Instant::now();
    // (a) nonincreasing objective traces on 50 random problems.
    let mut trace_ok = true;
    for i in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0xAC04, i));
        let n = rng.random_range(20..=60);
        let d = rng.random_range(1..=3);
        let m = rng.random_range(1..=3);
        let x = Array2::from_shape_fn((n, d), |_| rng.random::<f64>());
        let design = expand(&x, &BasisSpec::cosine(m).unwrap()).unwrap();
        let y: Vec<u8> = (0..n)
            .map(|k| u8::from((k % 3 == 0) ^ (rng.random::<f64>() < 0.3)))
            .collect();
        if y.iter().all(|&v| v == 0) || y.iter().all(|&v| v == 1) {
            continue;
        }
        let w = if i % 2 == 0 {
            PenaltyWeights::constant(rng.random_range(0.0..0.4), rng.random_range(0.0..0.4), d, m)
                .unwrap()
        } else {
            slope_weights(
                n,
                d,
                m,
                rng.random_range(0.1..1.0),
                rng.random_range(0.1..1.0),
            )
            .unwrap()
        };
        let cfg = FitConfig {
            max_iterations: 400,
            ..FitConfig::default()
        };
        let fitted = fit(&design, &y, &w, &cfg).unwrap();
        trace_ok &= fitted
            .objective_trace
            .windows(2)
            .all(|p| p[1] <= p[0] + 1e-10);
    }

    // (b) the unpenalized fit against long-run plain gradient descent.
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0xAC05, 0));
    let x = Array2::from_shape_fn((50, 2), |_| rng.random::<f64>());
    let design = expand(&x, &BasisSpec::cosine(2).unwrap()).unwrap();
    let y: Vec<u8> = (0..50)
        .map(|_| u8::from(rng.random::<f64>() < 0.5))
        .collect();
    let w0 = PenaltyWeights::constant(0.0, 0.0, 2, 2).unwrap();
    let cfg = FitConfig {
        tolerance: 1e-14,
        max_iterations: 50_000,
        ..FitConfig::default()
    };
    let fitted = fit(&design, &y, &w0, &cfg).unwrap();
    let (gd_b, gd_mu) = oracle::plain_gd_logistic(&design, &y, 400_000, 1e-10);
    let mut unpen_dev = (fitted.coefficients.mu() - gd_mu).abs();
    for (a, b) in fitted.coefficients.b().iter().zip(gd_b.iter()) {
        unpen_dev = unpen_dev.max((a - b).abs());
    }

    // (c) constant-weight Slope and Lasso produce the same objective.
    let w_lasso = PenaltyWeights::constant(0.25, 0.15, 2, 2).unwrap();
    let w_slope = PenaltyWeights::new(vec![0.25; 2], vec![0.15; 2]).unwrap();
    let f_lasso = fit(&design, &y, &w_lasso, &FitConfig::default()).unwrap();
    let f_slope = fit(&design, &y, &w_slope, &FitConfig::default()).unwrap();
    let slope_dev = (f_lasso.objective() - f_slope.objective()).abs();

    let elapsed = t0.elapsed();
    Outcome {
        name: "3 solver consistency",
        passed: trace_ok && unpen_dev <= 1e-4 && slope_dev <= 1e-8,
        detail: format!(
            "traces nonincreasing: {trace_ok}; unpenalized vs GD dev {unpen_dev:.2e} (tol 1e-4); slope-lasso objective dev {slope_dev:.2e} (tol 1e-8), {elapsed:.1?}"
        ),
    }
}

struct SimOutputs {
    /// `(d, n)` keyed CSV and mean-excess per sparse group Lasso.
    runs: Vec<(usize, usize, String, f64)>,
}

fn run_simulation_block(threads: usize) -> SimOutputs {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("pool");
    let harness = HarnessConfig {
        m: Some(8),
        folds: 10,
        grid_axis: log_grid(1e-2, 1e1, 5),
        fit: path_fit_config(),
        ..HarnessConfig::default()
    };
    let mut runs = Vec::new();
    for (d, n) in [(10usize, 30usize), (10, 1000), (30, 30), (30, 1000)] {
        let cfg = SimConfig {
            d,
            n,
            replications: 10,
            test_size: 100,
            seed: 42,
        };
        let report =
            pool.install(|| run_experiment(&cfg, &[Method::SparseGroupLasso], &harness).unwrap());
        let excess = report.row(Method::SparseGroupLasso).unwrap().avg_excess();
        runs.push((d, n, report.to_csv(), excess));
    }
    SimOutputs { runs }
}

fn criterion_4_simulation(sim: &SimOutputs, elapsed: std::time::Duration) -> Outcome {
    let get = |d: usize, n: usize| {
        sim.runs
            .iter()
            .find(|r| r.0 == d && r.1 == n)
            .map(|r| r.3)
            .unwrap()
    };
    let e10_1000 = get(10, 1000);
    let e30_1000 = get(30, 1000);
    let e10_30 = get(10, 30);
    let e30_30 = get(30, 30);
    let a = e10_1000 <= 0.12;
    let b = e30_1000 <= 0.10;
    let c = e10_1000 < e10_30 && e30_1000 < e30_30;
    let in_budget = elapsed.as_secs() < 1800;
    Outcome {
        name: "4 simulation reproduction",
        passed: a && b && c && in_budget,
        detail: format!(
            "sgL avg excess: d10/n1000 {e10_1000:.3} (≤0.12: {a}), d30/n1000 {e30_1000:.3} (≤0.10: {b}); trend n1000<n30: d10 {e10_1000:.3}<{e10_30:.3}, d30 {e30_1000:.3}<{e30_30:.3} ({c}); {elapsed:.0?} (<30 min: {in_budget})"
        ),
    }
}

fn spambase_config() -> SpamBenchConfig {
    SpamBenchConfig {
        train_size: 300,
        seed: 1,
        basis: BasisSpec::cosine(16).unwrap(),
        grid_axis: log_grid(1e-2, 1e1, 9),
        folds: 10,
        fit: path_fit_config(),
        mode: TuningMode::HoldoutOnTest,
        methods: vec![Method::Lasso, Method::GroupLasso, Method::SparseGroupLasso],
    }
}

fn run_spambase_block(threads: usize) -> Result<SpamBenchReport> {
    let ds = load_csv(&spambase_path(), &LabelColumn::Last, false)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("pool");
    pool.install(|| run_spam_bench(&ds, &spambase_config()))
}

fn criterion_5_spambase(report: &SpamBenchReport, elapsed: std::time::Duration) -> Outcome {
    let split_ok = report.train_size == 300 && report.test_size == 4301;
    let in_budget = elapsed.as_secs() < 600;
    let sgl = report.outcome(Method::SparseGroupLasso).unwrap();
    let gl = report.outcome(Method::GroupLasso).unwrap();
    let err_ok = sgl.test_error <= 0.12;
    let feat_ok = (10..=40).contains(&sgl.selected.len());
    let count_ok = sgl.nonzero_coefficients <= gl.nonzero_coefficients;
    Outcome {
        name: "5 spambase reproduction",
        passed: split_ok && err_ok && feat_ok && count_ok && in_budget,
        detail: format!(
            "split {}/{} ({split_ok}); sgL test error {:.4} (≤0.12: {err_ok}); selected {} in [10,40]: {feat_ok}; nonzero {} ≤ group's {}: {count_ok}; {elapsed:.0?} (<10 min: {in_budget})",
            report.train_size,
            report.test_size,
            sgl.test_error,
            sgl.selected.len(),
            sgl.nonzero_coefficients,
            gl.nonzero_coefficients,
        ),
    }
}

fn criterion_6_determinism(sim1: &SimOutputs, spam1: &SpamBenchReport) -> Outcome {
    let t0 = Instant::now();
    let sim2 = run_simulation_block(2);
    let spam2 = run_spambase_block(2).unwrap();
    let sim_same = sim1
        .runs
        .iter()
        .zip(sim2.runs.iter())
        .all(|(a, b)| a.2 == b.2);
    let spam_same = spam1.to_csv() == spam2.to_csv();
    Outcome {
        name: "6 determinism across thread counts",
        passed: sim_same && spam_same,
        detail: format!(
            "sim CSVs identical: {sim_same}; spambase CSVs identical: {spam_same} (1 vs 2 threads), {:.1?}",
            t0.elapsed()
        ),
    }
}

fn criterion_7_orthonormality() -> Outcome {
    let t0 = Instant::now();
    const GRID: usize = 100_000;
    const TOP: usize = 32;
    let mut worst = 0.0f64;
    for kind in [BasisKind::Cosine, BasisKind::HaarWavelet] {
        let spec = BasisSpec::new(kind, TOP).unwrap();
        let mut values = Array2::<f64>::zeros((TOP, GRID));
        for l in 1..=TOP {
            for g in 0..GRID {
                let x = (g as f64 + 0.5) / GRID as f64;
                values[[l - 1, g]] = spec.eval(l, x).unwrap();
            }
        }
        let gram = values.dot(&values.t()) / GRID as f64;
        for a in 0..TOP {
            for b in 0..TOP {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((gram[[a, b]] - target).abs());
            }
        }
    }
    let elapsed = t0.elapsed();
    Outcome {
        name: "7 basis orthonormality",
        passed: worst <= 1e-2 && elapsed.as_secs() < 10,
        detail: format!("max Gram deviation {worst:.2e} (tol 1e-2), {elapsed:.1?}"),
    }
}

#[test]
fn acceptance() {
    let mut outcomes = Vec::new();
    outcomes.push(criterion_1_prox_oracle());
    outcomes.push(criterion_2_gradient_check());
    outcomes.push(criterion_3_solver_consistency());

    let t_sim = Instant::now();
    let sim = run_simulation_block(1);
    outcomes.push(criterion_4_simulation(&sim, t_sim.elapsed()));

    let t_spam = Instant::now();
    let spam = run_spambase_block(1).expect("spambase data present under data/");
    outcomes.push(criterion_5_spambase(&spam, t_spam.elapsed()));

    outcomes.push(criterion_6_determinism(&sim, &spam));
    outcomes.push(criterion_7_orthonormality());

    let mut all_pass = true;
    for o in &outcomes {
        println!(
            "criterion {}: {} — {}",
            o.name,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        all_pass &= o.passed;
    }
    assert!(
        all_pass,
        "acceptance criteria failed: {:?}",
        outcomes
            .iter()
            .filter(|o| !o.passed)
            .map(|o| o.name)
            .collect::<Vec<_>>()
    );
}
