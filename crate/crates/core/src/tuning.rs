//! Penalty weight schedules and K-fold cross-validation over warm-started
//! regularization paths.
//!
//! The schedules follow the theory: constant weights
//! `λ = C₁·√(ln d / n)`, `κ = C₂·√(ln n / n)` for the Lasso family, and the
//! decaying sequences `λ_j = C₁·√(ln(de/j)/n)`, `κ_ℓ = C₂·√(ln(ne/ℓ)/n)` for
//! the Slope family. Cross-validation searches a grid of `(C₁, C₂)`
//! multipliers, traversed from the strongest penalties to the weakest with
//! warm starts.

use ndarray::ArrayView2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::{expand, BasisSpec};
use crate::data_io::Scaler;
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::model::{assemble_model, Method};
use crate::penalty::PenaltyWeights;
use crate::solver::{fit_path, FitConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    LassoConstant,
    SlopeDecaying,
}

/// A schedule shape with its two multipliers.
#[derive(Debug, Clone, Copy)]
pub struct WeightSchedule {
    pub kind: ScheduleKind,
    pub c1: f64,
    pub c2: f64,
}

impl WeightSchedule {
    pub fn build(&self, n: usize, d: usize, m: usize) -> Result<PenaltyWeights> {
        match self.kind {
            ScheduleKind::LassoConstant => lasso_weights(n, d, m, self.c1, self.c2),
            ScheduleKind::SlopeDecaying => slope_weights(n, d, m, self.c1, self.c2),
        }
    }
}

fn check_schedule_args(n: usize, d: usize, m: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidConfig(
            "need n ≥ 2 for weight schedules".into(),
        ));
    }
    if d == 0 || m == 0 {
        return Err(Error::InvalidConfig("need d ≥ 1 and m ≥ 1".into()));
    }
    Ok(())
}

fn check_positive(name: &str, c: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "{name} must be positive and finite, got {c}"
        )));
    }
    Ok(())
}

/// `λ_j ≡ C₁·√(max(ln d, 1)/n)`, `κ_ℓ ≡ C₂·√(ln n / n)`. The `max(ln d, 1)`
/// guard keeps the group penalty alive at `d = 1`, where `ln d = 0` would
/// zero it out.
pub fn lasso_weights(n: usize, d: usize, m: usize, c1: f64, c2: f64) -> Result<PenaltyWeights> {
    check_schedule_args(n, d, m)?;
    check_positive("C1", c1)?;
    check_positive("C2", c2)?;
    let nf = n as f64;
    let lambda = c1 * ((d as f64).ln().max(1.0) / nf).sqrt();
    let kappa = c2 * (nf.ln() / nf).sqrt();
    PenaltyWeights::constant(lambda, kappa, d, m)
}

/// `λ_j = C₁·√(ln(de/j)/n)` and `κ_ℓ = C₂·√(ln(ne/ℓ)/n)`: strictly
/// decreasing, with `λ_d = C₁·√(1/n)` since `ln e = 1`.
pub fn slope_weights(n: usize, d: usize, m: usize, c1: f64, c2: f64) -> Result<PenaltyWeights> {
    check_schedule_args(n, d, m)?;
    check_positive("C1", c1)?;
    check_positive("C2", c2)?;
    if m > n {
        return Err(Error::InvalidConfig(format!(
            "slope entry weights need m ≤ n, got m = {m}, n = {n}"
        )));
    }
    let nf = n as f64;
    let lambda: Vec<f64> = (1..=d)
        .map(|j| c1 * ((d as f64 * std::f64::consts::E / j as f64).ln() / nf).sqrt())
        .collect();
    let kappa: Vec<f64> = (1..=m)
        .map(|l| c2 * ((nf * std::f64::consts::E / l as f64).ln() / nf).sqrt())
        .collect();
    PenaltyWeights::new(lambda, kappa)
}

/// Weights for a named method. `Lasso` runs with the group penalty switched
/// off (`λ ≡ 0`) and `GroupLasso` with the entrywise penalty off (`κ ≡ 0`);
/// the Slope method requires both axes active.
pub fn method_weights(
    method: Method,
    n: usize,
    d: usize,
    m: usize,
    c1: f64,
    c2: f64,
) -> Result<PenaltyWeights> {
    check_schedule_args(n, d, m)?;
    let nf = n as f64;
    match method {
        Method::Lasso => {
            check_positive("C2", c2)?;
            let kappa = c2 * (nf.ln() / nf).sqrt();
            PenaltyWeights::constant(0.0, kappa, d, m)
        }
        Method::GroupLasso => {
            check_positive("C1", c1)?;
            let lambda = c1 * ((d as f64).ln().max(1.0) / nf).sqrt();
            PenaltyWeights::constant(lambda, 0.0, d, m)
        }
        Method::SparseGroupLasso => lasso_weights(n, d, m, c1, c2),
        Method::SparseGroupSlope => slope_weights(n, d, m, c1, c2),
    }
}

/// Log-spaced grid axis, `count` points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect()
}

/// Default 13-point axis spanning `10⁻²` to `10¹`.
pub fn default_grid_axis() -> Vec<f64> {
    log_grid(1e-2, 1e1, 13)
}

/// The `(C₁, C₂)` grid a method searches: one-dimensional for the methods
/// with a dead axis, the full product otherwise.
pub fn method_grid(method: Method, axis: &[f64]) -> Vec<(f64, f64)> {
    match method {
        Method::Lasso => axis.iter().map(|&c2| (0.0, c2)).collect(),
        Method::GroupLasso => axis.iter().map(|&c1| (c1, 0.0)).collect(),
        Method::SparseGroupLasso | Method::SparseGroupSlope => axis
            .iter()
            .flat_map(|&c1| axis.iter().map(move |&c2| (c1, c2)))
            .collect(),
    }
}

/// Cross-validation outcome: per grid point the mean validation
/// misclassification over folds and its standard error, plus the chosen
/// point (minimum mean error, ties broken toward the larger penalties).
#[derive(Debug, Clone)]
pub struct CvReport {
    pub grid: Vec<(f64, f64)>,
    pub mean_error: Vec<f64>,
    pub std_error: Vec<f64>,
    pub chosen: usize,
    pub folds: usize,
    pub seed: u64,
}

impl CvReport {
    pub fn chosen_point(&self) -> (f64, f64) {
        self.grid[self.chosen]
    }

    /// CSV with one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("c1,c2,mean_error,se,chosen\n");
        for (i, &(c1, c2)) in self.grid.iter().enumerate() {
            out.push_str(&format!(
                "{c1},{c2},{},{},{}\n",
                self.mean_error[i],
                self.std_error[i],
                u8::from(i == self.chosen)
            ));
        }
        out
    }
}

/// Assign each sample to one of `folds` folds such that every training
/// complement contains both classes, resampling up to 100 times.
fn make_folds(y: &[u8], folds: usize, seed: u64) -> Result<Vec<usize>> {
    let n = y.len();
    for attempt in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, attempt));
        let mut indices: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            indices.swap(i, j);
        }
        let mut assignment = vec![0usize; n];
        for (pos, &idx) in indices.iter().enumerate() {
            assignment[idx] = pos % folds;
        }
        let ok = (0..folds).all(|f| {
            let mut pos = 0usize;
            let mut neg = 0usize;
            let mut val = 0usize;
            for (i, &a) in assignment.iter().enumerate() {
                if a == f {
                    val += 1;
                } else if y[i] == 1 {
                    pos += 1;
                } else {
                    neg += 1;
                }
            }
            val > 0 && pos > 0 && neg > 0
        });
        if ok {
            return Ok(assignment);
        }
    }
    Err(Error::DegenerateFolds(
        "could not build folds with both classes in every training part after 100 attempts".into(),
    ))
}

/// Traversal order over grid indices: strongest penalties first so warm
/// starts walk the path from sparse to dense.
pub(crate) fn traversal_order(grid: &[(f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| {
        let (a1, a2) = grid[a];
        let (b1, b2) = grid[b];
        (b1, b2)
            .partial_cmp(&(a1, a2))
            .expect("grid constants are finite")
    });
    order
}

/// K-fold cross-validation of a method over a `(C₁, C₂)` grid. Folds run in
/// parallel; each fold fits the whole grid as one warm-started path on the
/// fold's training design. Fold assignment depends only on `seed`, so the
/// report is reproducible regardless of the parallelism.
#[allow(clippy::too_many_arguments)]
pub fn cross_validate(
    x: ArrayView2<'_, f64>,
    y: &[u8],
    basis: &BasisSpec,
    method: Method,
    grid: &[(f64, f64)],
    folds: usize,
    seed: u64,
    fit_cfg: &FitConfig,
) -> Result<CvReport> {
    let n = x.nrows();
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty cross-validation grid".into()));
    }
    if folds < 2 || folds > n {
        return Err(Error::InvalidConfig(format!(
            "folds must lie in [2, {n}], got {folds}"
        )));
    }
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {n} samples",
            y.len()
        )));
    }
    let assignment = make_folds(y, folds, seed)?;
    let order = traversal_order(grid);

    // errors[fold][grid index]
    let errors: Vec<Vec<f64>> = (0..folds)
        .into_par_iter()
        .map(|f| -> Result<Vec<f64>> {
            let train_idx: Vec<usize> = (0..n).filter(|&i| assignment[i] != f).collect();
            let val_idx: Vec<usize> = (0..n).filter(|&i| assignment[i] == f).collect();
            let x_train = x.select(ndarray::Axis(0), &train_idx);
            let y_train: Vec<u8> = train_idx.iter().map(|&i| y[i]).collect();
            let x_val = x.select(ndarray::Axis(0), &val_idx);
            let y_val: Vec<u8> = val_idx.iter().map(|&i| y[i]).collect();

            let scaler = Scaler::fit(x_train.view())?;
            let design = expand(&scaler.apply(x_train.view()), basis)?;
            let weights: Vec<PenaltyWeights> = order
                .iter()
                .map(|&g| {
                    let (c1, c2) = grid[g];
                    method_weights(method, design.n(), design.d(), design.m(), c1, c2)
                })
                .collect::<Result<_>>()?;
            let path = fit_path(&design, &y_train, &weights, fit_cfg)?;

            let mut fold_errors = vec![0.0; grid.len()];
            for (pos, fitted) in path.iter().enumerate() {
                let model = assemble_model(&scaler, basis, method, &fitted.coefficients)?;
                fold_errors[order[pos]] = model.misclassification_rate(x_val.view(), &y_val)?;
            }
            Ok(fold_errors)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut mean_error = vec![0.0; grid.len()];
    let mut std_error = vec![0.0; grid.len()];
    for g in 0..grid.len() {
        let vals: Vec<f64> = errors.iter().map(|fold| fold[g]).collect();
        let mean = vals.iter().sum::<f64>() / folds as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (folds as f64 - 1.0);
        mean_error[g] = mean;
        std_error[g] = (var / folds as f64).sqrt();
    }

    // Minimum mean error; ties go to the sparser model (larger penalty sum,
    // then larger C1).
    let mut chosen = 0usize;
    for g in 1..grid.len() {
        let better = mean_error[g] < mean_error[chosen];
        let tie = mean_error[g] == mean_error[chosen];
        let sparser = {
            let (a1, a2) = grid[g];
            let (b1, b2) = grid[chosen];
            (a1 + a2, a1) > (b1 + b2, b1)
        };
        if better || (tie && sparser) {
            chosen = g;
        }
    }

    Ok(CvReport {
        grid: grid.to_vec(),
        mean_error,
        std_error,
        chosen,
        folds,
        seed,
    })
}
