//! Diagnostic self-checks: the numerical core against the brute-force
//! oracles, on seeded random instances sized to finish within a minute.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sgam::oracle;
use sgam::{
    derive_seed, expand, logistic_gradient, logistic_loss, prox_group_l2, prox_sorted_l1,
    prox_sparse_group, soft_threshold, BasisSpec, CoefficientMatrix, PenaltyWeights,
};

struct Property {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn report(p: &Property) {
    println!(
        "{} ... {} ({})",
        p.name,
        if p.passed { "pass" } else { "FAIL" },
        p.detail
    );
}

fn sorted_l1_vs_grid(inject_fault: bool) -> Property {
    let mut worst = 0.0f64;
    for i in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0x5C01, i));
        let v = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
        let mut w = [rng.random_range(0.0..2.0), rng.random_range(0.0..2.0)];
        if w[0] < w[1] {
            w.swap(0, 1);
        }
        let mut got = prox_sorted_l1(&v, &w).expect("valid weights");
        if inject_fault && i == 0 {
            got[0] += 0.005;
        }
        let want = oracle::grid_prox_sorted_l1_2d(v, w, 1e-3);
        worst = worst.max((got[0] - want[0]).abs().max((got[1] - want[1]).abs()));
    }
    Property {
        name: "prox_sorted_l1 vs 2-d grid oracle",
        passed: worst <= 2e-3,
        detail: format!("max deviation {worst:.2e}, tolerance 2e-3"),
    }
}

fn sparse_group_vs_grid() -> Property {
    let mut worst = 0.0f64;
    for i in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0x5C02, i));
        let d = rng.random_range(1..=3);
        let m = rng.random_range(1..=3);
        let b = Array2::from_shape_fn((d, m), |_| rng.random_range(-3.0..3.0));
        let lambda = rng.random_range(0.05..1.5);
        let kappa = rng.random_range(0.05..1.5);
        let step = rng.random_range(0.2..1.2);
        let w = PenaltyWeights::constant(lambda, kappa, d, m).expect("valid weights");
        let got = prox_sparse_group(&b, &w, step).expect("valid prox call");
        let want = oracle::grid_prox_sparse_group_constant(&b, lambda, kappa, step, 1e-2);
        for (a, o) in got.iter().zip(want.iter()) {
            worst = worst.max((a - o).abs());
        }
    }
    Property {
        name: "prox_sparse_group vs dense grid oracle",
        passed: worst <= 2e-2,
        detail: format!("max deviation {worst:.2e}, tolerance 2e-2"),
    }
}

fn equal_weight_collapse() -> Property {
    let mut worst = 0.0f64;
    for i in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0x5C03, i));
        let m = rng.random_range(1..10);
        let v: Vec<f64> = (0..m).map(|_| rng.random_range(-4.0..4.0)).collect();
        let t = rng.random_range(0.0..2.0);
        let sorted = prox_sorted_l1(&v, &vec![t; m]).expect("constant weights");
        let soft = soft_threshold(&v, t);
        for (a, b) in sorted.iter().zip(soft.iter()) {
            worst = worst.max((a - b).abs());
        }
    }
    Property {
        name: "equal-weight sorted prox collapses to soft threshold",
        passed: worst <= 1e-12,
        detail: format!("max deviation {worst:.2e}, tolerance 1e-12"),
    }
}

fn group_prox_closed_form() -> Property {
    let mut worst = 0.0f64;
    for i in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(0x5C04, i));
        let m = rng.random_range(1..8);
        let row: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
        let t = rng.random_range(0.0..3.0);
        let got = prox_group_l2(&row, t);
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        let shrink = (1.0 - t / norm).max(0.0);
        for (g, r) in got.iter().zip(row.iter()) {
            worst = worst.max((g - shrink * r).abs());
        }
    }
    Property {
        name: "prox_group_l2 block soft-thresholding formula",
        passed: worst <= 1e-12,
        detail: format!("max deviation {worst:.2e}, tolerance 1e-12"),
    }
}

fn random_instance(seed: u64, max_n: usize) -> (sgam::ExpandedDesign, Vec<u8>, CoefficientMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(5..=max_n);
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
    (design, y, coef)
}

fn gradient_vs_finite_differences() -> Property {
    let mut worst = 0.0f64;
    for i in 0..40u64 {
        let (design, y, coef) = random_instance(derive_seed(0x5C05, i), 30);
        let (gb, gmu) = logistic_gradient(&coef, &design, &y).expect("valid instance");
        let (fd_b, fd_mu) =
            oracle::finite_difference_gradient(coef.b(), coef.mu(), &design, &y, 1e-5);
        for (a, f) in gb
            .iter()
            .chain(std::iter::once(&gmu))
            .zip(fd_b.iter().chain(std::iter::once(&fd_mu)))
        {
            if (a - f).abs() > 1e-8 {
                worst = worst.max((a - f).abs() / f.abs().max(1e-3));
            }
        }
    }
    Property {
        name: "logistic gradient vs central finite differences",
        passed: worst <= 1e-5,
        detail: format!("worst relative deviation {worst:.2e}, tolerance 1e-5"),
    }
}

fn loss_vs_direct_summation() -> Property {
    let mut worst = 0.0f64;
    for i in 0..30u64 {
        let (design, y, coef) = random_instance(derive_seed(0x5C06, i), 40);
        let fast = logistic_loss(&coef, &design, &y).expect("valid instance");
        let slow = oracle::naive_logistic_loss(coef.b(), coef.mu(), &design, &y);
        worst = worst.max((fast - slow).abs() / slow.abs().max(1e-12));
    }
    Property {
        name: "logistic loss vs compensated direct summation",
        passed: worst <= 1e-5,
        detail: format!("worst relative deviation {worst:.2e}, tolerance 1e-5"),
    }
}

/// Run every property; returns the number of failures.
pub fn run(inject_fault: bool) -> usize {
    let properties = [
        sorted_l1_vs_grid(inject_fault),
        sparse_group_vs_grid(),
        equal_weight_collapse(),
        group_prox_closed_form(),
        gradient_vs_finite_differences(),
        loss_vs_direct_summation(),
    ];
    let mut failures = 0;
    for p in &properties {
        report(p);
        if !p.passed {
            failures += 1;
        }
    }
    if failures == 0 {
        println!("all {} self-checks passed", properties.len());
    } else {
        println!("{failures} self-check(s) FAILED");
    }
    failures
}
