//! Brute-force reference implementations backing the self-check command and
//! the verification suites.
//!
//! Everything here trades speed for transparency: dense grid searches for the
//! proximal operators, finite differences for the gradient, compensated
//! direct summation for the loss, and plain gradient descent for unpenalized
//! fits. None of it shares code with the implementations it checks.
//!
//! Two reductions keep the grids tractable, both exact properties of the
//! minimized objectives rather than of any implementation. First, a
//! minimizer always aligns with the signs of the input: flipping a
//! coordinate's sign to match the input never increases the quadratic term
//! and leaves every penalty term unchanged. Second, a minimizer is
//! entrywise dominated by the input: clipping `|z_i|` down to `|v_i|` moves
//! the quadratic term down and every penalty term down, so the search space
//! per coordinate is `[0, |v_i|]`.

use ndarray::Array2;

use crate::basis::ExpandedDesign;
use crate::penalty::PenaltyWeights;

/// Grid minimizer of `½‖x − v‖² + w₁·|x|_(1) + w₂·|x|_(2)` over a
/// two-dimensional magnitude grid of the given resolution.
pub fn grid_prox_sorted_l1_2d(v: [f64; 2], w: [f64; 2], res: f64) -> [f64; 2] {
    let a = [v[0].abs(), v[1].abs()];
    let n0 = (a[0] / res).ceil() as usize;
    let n1 = (a[1] / res).ceil() as usize;
    let mut best = f64::INFINITY;
    let mut arg = [0.0, 0.0];
    for i in 0..=n0 {
        let x0 = i as f64 * res;
        let q0 = 0.5 * (x0 - a[0]) * (x0 - a[0]);
        for j in 0..=n1 {
            let x1 = j as f64 * res;
            let q1 = 0.5 * (x1 - a[1]) * (x1 - a[1]);
            let (hi, lo) = if x0 >= x1 { (x0, x1) } else { (x1, x0) };
            let f = q0 + q1 + w[0] * hi + w[1] * lo;
            if f < best {
                best = f;
                arg = [x0, x1];
            }
        }
    }
    [v[0].signum() * arg[0], v[1].signum() * arg[1]]
}

/// Grid minimizer of the row objective
/// `½‖z − v‖² + lam·‖z‖₂ + kap·‖z‖₁` for `m ≤ 3`.
fn grid_row_constant(v: &[f64], lam: f64, kap: f64, res: f64) -> Vec<f64> {
    let m = v.len();
    assert!((1..=3).contains(&m), "grid oracle supports m ≤ 3");
    let a: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    // Per-axis grids of magnitudes with the separable part precomputed.
    let axes: Vec<Vec<f64>> = a
        .iter()
        .map(|&ai| {
            let n = (ai / res).ceil() as usize;
            (0..=n).map(|i| i as f64 * res).collect()
        })
        .collect();
    let seps: Vec<Vec<f64>> = axes
        .iter()
        .zip(a.iter())
        .map(|(axis, &ai)| {
            axis.iter()
                .map(|&x| 0.5 * (x - ai) * (x - ai) + kap * x)
                .collect()
        })
        .collect();
    let sqs: Vec<Vec<f64>> = axes
        .iter()
        .map(|axis| axis.iter().map(|&x| x * x).collect())
        .collect();

    let mut best = f64::INFINITY;
    let mut arg = vec![0.0; m];
    match m {
        1 => {
            for (i0, &x0) in axes[0].iter().enumerate() {
                let f = seps[0][i0] + lam * x0;
                if f < best {
                    best = f;
                    arg[0] = x0;
                }
            }
        }
        2 => {
            for (i0, &x0) in axes[0].iter().enumerate() {
                for (i1, &x1) in axes[1].iter().enumerate() {
                    let f = seps[0][i0] + seps[1][i1] + lam * (sqs[0][i0] + sqs[1][i1]).sqrt();
                    if f < best {
                        best = f;
                        arg[0] = x0;
                        arg[1] = x1;
                    }
                }
            }
        }
        _ => {
            for (i0, &x0) in axes[0].iter().enumerate() {
                let s0 = seps[0][i0];
                let r0 = sqs[0][i0];
                for (i1, &x1) in axes[1].iter().enumerate() {
                    let s01 = s0 + seps[1][i1];
                    let r01 = r0 + sqs[1][i1];
                    for (i2, &x2) in axes[2].iter().enumerate() {
                        let f = s01 + seps[2][i2] + lam * (r01 + sqs[2][i2]).sqrt();
                        if f < best {
                            best = f;
                            arg[0] = x0;
                            arg[1] = x1;
                            arg[2] = x2;
                        }
                    }
                }
            }
        }
    }
    arg.iter()
        .zip(v.iter())
        .map(|(&mag, &vi)| vi.signum() * mag)
        .collect()
}

/// Grid minimizer of `½‖Z − B‖²_F + step·(λΣ‖Z_j‖₂ + κΣ|Z_jℓ|)` for constant
/// weights. The objective separates across rows, so the full grid factors
/// into per-row grids of dimension `m ≤ 3`.
pub fn grid_prox_sparse_group_constant(
    b: &Array2<f64>,
    lambda: f64,
    kappa: f64,
    step: f64,
    res: f64,
) -> Array2<f64> {
    let (d, m) = b.dim();
    let mut out = Array2::zeros((d, m));
    for j in 0..d {
        let row: Vec<f64> = b.row(j).to_vec();
        let sol = grid_row_constant(&row, step * lambda, step * kappa, res);
        for (l, v) in sol.into_iter().enumerate() {
            out[[j, l]] = v;
        }
    }
    out
}

/// Joint grid minimizer of `½‖Z − B‖²_F + step·‖Z‖_{λ,κ}` for general sorted
/// weights on a 2×2 matrix. The sorted row-norm term couples the rows, so no
/// factorization applies and all four coordinates are searched jointly.
pub fn grid_prox_sparse_group_slope(
    b: &Array2<f64>,
    w: &PenaltyWeights,
    step: f64,
    res: f64,
) -> Array2<f64> {
    assert_eq!(b.dim(), (2, 2), "joint slope oracle supports 2×2 only");
    let lam = [step * w.row_weights()[0], step * w.row_weights()[1]];
    let kap = [step * w.entry_weights()[0], step * w.entry_weights()[1]];
    let a = [
        [b[[0, 0]].abs(), b[[0, 1]].abs()],
        [b[[1, 0]].abs(), b[[1, 1]].abs()],
    ];
    let axis = |ai: f64| -> Vec<f64> {
        let n = (ai / res).ceil() as usize;
        (0..=n).map(|i| i as f64 * res).collect()
    };
    let ax = [
        [axis(a[0][0]), axis(a[0][1])],
        [axis(a[1][0]), axis(a[1][1])],
    ];

    let mut best = f64::INFINITY;
    let mut arg = [[0.0f64; 2]; 2];
    for &x00 in &ax[0][0] {
        let q00 = 0.5 * (x00 - a[0][0]) * (x00 - a[0][0]);
        for &x01 in &ax[0][1] {
            let q0 = q00 + 0.5 * (x01 - a[0][1]) * (x01 - a[0][1]);
            let r0 = (x00 * x00 + x01 * x01).sqrt();
            let e0 = kap[0] * x00.max(x01) + kap[1] * x00.min(x01);
            for &x10 in &ax[1][0] {
                let q10 = 0.5 * (x10 - a[1][0]) * (x10 - a[1][0]);
                for &x11 in &ax[1][1] {
                    let q = q0 + q10 + 0.5 * (x11 - a[1][1]) * (x11 - a[1][1]);
                    let r1 = (x10 * x10 + x11 * x11).sqrt();
                    let e1 = kap[0] * x10.max(x11) + kap[1] * x10.min(x11);
                    let group = lam[0] * r0.max(r1) + lam[1] * r0.min(r1);
                    let f = q + e0 + e1 + group;
                    if f < best {
                        best = f;
                        arg = [[x00, x01], [x10, x11]];
                    }
                }
            }
        }
    }
    let mut out = Array2::zeros((2, 2));
    for j in 0..2 {
        for l in 0..2 {
            out[[j, l]] = b[[j, l]].signum() * arg[j][l];
        }
    }
    out
}

#[inline]
fn stable_sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn eta_direct(b: &Array2<f64>, mu: f64, design: &ExpandedDesign, i: usize) -> f64 {
    let mut eta = mu;
    for j in 0..design.d() {
        for l in 0..design.m() {
            eta += b[[j, l]] * design.psi(i, j, l);
        }
    }
    eta
}

/// Logistic loss by direct per-sample summation with Kahan compensation and
/// `ln_1p`-based softplus branches. Independent of the solver's vectorized
/// evaluation path.
pub fn naive_logistic_loss(b: &Array2<f64>, mu: f64, design: &ExpandedDesign, y: &[u8]) -> f64 {
    let n = design.n();
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (i, &yi) in y.iter().enumerate() {
        let eta = eta_direct(b, mu, design, i);
        let softplus = if eta > 0.0 {
            eta + (-eta).exp().ln_1p()
        } else {
            eta.exp().ln_1p()
        };
        let term = softplus - f64::from(yi) * eta;
        let t = sum + (term - comp);
        comp = (t - sum) - (term - comp);
        sum = t;
    }
    sum / n as f64
}

/// Central finite differences of [`naive_logistic_loss`] in every coefficient
/// and the intercept.
pub fn finite_difference_gradient(
    b: &Array2<f64>,
    mu: f64,
    design: &ExpandedDesign,
    y: &[u8],
    h: f64,
) -> (Array2<f64>, f64) {
    let (d, m) = b.dim();
    let mut grad = Array2::zeros((d, m));
    for j in 0..d {
        for l in 0..m {
            let mut plus = b.clone();
            plus[[j, l]] += h;
            let mut minus = b.clone();
            minus[[j, l]] -= h;
            grad[[j, l]] = (naive_logistic_loss(&plus, mu, design, y)
                - naive_logistic_loss(&minus, mu, design, y))
                / (2.0 * h);
        }
    }
    let grad_mu = (naive_logistic_loss(b, mu + h, design, y)
        - naive_logistic_loss(b, mu - h, design, y))
        / (2.0 * h);
    (grad, grad_mu)
}

/// Long-run plain gradient descent on the unpenalized logistic loss, with the
/// gradient assembled by direct loops. Used as the independent reference for
/// `λ = κ = 0` fits.
pub fn plain_gd_logistic(
    design: &ExpandedDesign,
    y: &[u8],
    max_iter: usize,
    grad_tol: f64,
) -> (Array2<f64>, f64) {
    let (n, d, m) = (design.n(), design.d(), design.m());
    // Conservative step from the Frobenius bound on the spectral norm.
    let frob2: f64 = design.flat().iter().map(|v| v * v).sum();
    let step = if frob2 > 0.0 {
        4.0 * n as f64 / frob2
    } else {
        1.0
    };

    let mut b = Array2::<f64>::zeros((d, m));
    let mut mu = 0.0f64;
    for _ in 0..max_iter {
        let mut gb = Array2::<f64>::zeros((d, m));
        let mut gmu = 0.0f64;
        for (i, &yi) in y.iter().enumerate() {
            let r = stable_sigmoid(eta_direct(&b, mu, design, i)) - f64::from(yi);
            gmu += r;
            for j in 0..d {
                for l in 0..m {
                    gb[[j, l]] += r * design.psi(i, j, l);
                }
            }
        }
        gb.mapv_inplace(|v| v / n as f64);
        gmu /= n as f64;
        let gnorm = (gb.iter().map(|v| v * v).sum::<f64>() + gmu * gmu).sqrt();
        if gnorm < grad_tol {
            break;
        }
        b.zip_mut_with(&gb, |x, g| *x -= step * g);
        mu -= step * gmu;
    }
    (b, mu)
}
