//! Accelerated proximal gradient minimization of the penalized logistic
//! objective
//!
//! ```text
//! F(B, μ) = (1/n)·Σ_i [softplus(η_i) − y_i·η_i]  +  ‖B‖_{λ,κ}
//! ```
//!
//! where `η_i = μ + Σ_{j,ℓ} Ψ[i][j][ℓ]·B[j][ℓ]`. The intercept is never
//! penalized: the proximal step touches `B` only while `μ` takes a plain
//! gradient step. Momentum restarts on any objective increase, which keeps
//! the recorded trace nonincreasing.

use ndarray::{Array1, Array2, ArrayView1};

use crate::basis::ExpandedDesign;
use crate::error::{Error, Result};
use crate::penalty::{
    prox_sparse_group, sparse_group_slope_norm, CoefficientMatrix, PenaltyWeights,
};

#[derive(Debug, Clone)]
pub struct FitConfig {
    pub max_iterations: usize,
    /// Relative objective change below which the fit is declared converged.
    pub tolerance: f64,
    /// Multiplier applied to the step size when backtracking, in (0, 1).
    pub backtracking: f64,
    /// Starting step size; estimated from the design spectrum when absent.
    pub initial_step: Option<f64>,
    /// FISTA-style momentum with restart on objective increase.
    pub acceleration: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            tolerance: 1e-8,
            backtracking: 0.5,
            initial_step: None,
            acceleration: true,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be positive".into(),
            ));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        if !(self.backtracking > 0.0 && self.backtracking < 1.0) {
            return Err(Error::InvalidConfig(
                "backtracking factor must lie in (0, 1)".into(),
            ));
        }
        if let Some(s) = self.initial_step {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidConfig("initial step must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub coefficients: CoefficientMatrix,
    /// Objective value at the start and after every iteration.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl FitResult {
    pub fn objective(&self) -> f64 {
        *self
            .objective_trace
            .last()
            .expect("trace holds at least the initial objective")
    }
}

#[inline]
pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^t)` in the overflow-safe branch form.
#[inline]
fn softplus(t: f64) -> f64 {
    if t > 30.0 {
        t + (-t).exp()
    } else if t < -30.0 {
        t.exp()
    } else {
        t.exp().ln_1p()
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn check_labels(y: &[u8], n: usize) -> Result<()> {
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} labels for {} samples",
            y.len(),
            n
        )));
    }
    for (i, &v) in y.iter().enumerate() {
        if v > 1 {
            return Err(Error::NonBinaryLabel {
                index: i,
                found: v.to_string(),
            });
        }
    }
    Ok(())
}

fn check_coef(coef_dims: (usize, usize), design: &ExpandedDesign) -> Result<()> {
    if coef_dims != (design.d(), design.m()) {
        return Err(Error::DimensionMismatch(format!(
            "coefficients are {}×{} but the design expands {}×{}",
            coef_dims.0,
            coef_dims.1,
            design.d(),
            design.m()
        )));
    }
    Ok(())
}

fn flat_view(b: &Array2<f64>) -> ArrayView1<'_, f64> {
    ArrayView1::from(b.as_slice().expect("coefficients are contiguous"))
}

fn linear_predictor(b: &Array2<f64>, mu: f64, design: &ExpandedDesign) -> Array1<f64> {
    let mut eta = design.flat().dot(&flat_view(b));
    eta.mapv_inplace(|v| v + mu);
    eta
}

fn loss_of_eta(eta: &Array1<f64>, y: &[u8]) -> f64 {
    let n = eta.len() as f64;
    eta.iter()
        .zip(y.iter())
        .map(|(&e, &yi)| softplus(e) - f64::from(yi) * e)
        .sum::<f64>()
        / n
}

/// Average logistic loss `(1/n)·Σ softplus(η_i) − y_i·η_i`.
pub fn logistic_loss(coef: &CoefficientMatrix, design: &ExpandedDesign, y: &[u8]) -> Result<f64> {
    check_coef(coef.dims(), design)?;
    check_labels(y, design.n())?;
    let eta = linear_predictor(coef.b(), coef.mu(), design);
    Ok(loss_of_eta(&eta, y))
}

/// Gradient of the average logistic loss in the coefficients and the
/// intercept: `∇B = (1/n)·Ψᵀ(σ(η) − y)`, `∇μ = mean(σ(η) − y)`.
pub fn logistic_gradient(
    coef: &CoefficientMatrix,
    design: &ExpandedDesign,
    y: &[u8],
) -> Result<(Array2<f64>, f64)> {
    check_coef(coef.dims(), design)?;
    check_labels(y, design.n())?;
    let eta = linear_predictor(coef.b(), coef.mu(), design);
    let residual = residual_of_eta(&eta, y);
    Ok(gradient_of_residual(&residual, design))
}

fn residual_of_eta(eta: &Array1<f64>, y: &[u8]) -> Array1<f64> {
    let mut r = eta.clone();
    r.zip_mut_with(
        &Array1::from_iter(y.iter().map(|&v| f64::from(v))),
        |e, yi| *e = sigmoid(*e) - yi,
    );
    r
}

fn gradient_of_residual(residual: &Array1<f64>, design: &ExpandedDesign) -> (Array2<f64>, f64) {
    let n = design.n() as f64;
    let flat = design.flat().t().dot(residual);
    let grad = flat
        .into_shape_with_order((design.d(), design.m()))
        .expect("gradient reshapes to coefficient dims");
    let grad_mu = residual.sum() / n;
    (grad / n, grad_mu)
}

/// Step size `4n/‖Ψ‖²_op`, the inverse of the logistic Lipschitz bound, with
/// the operator norm estimated by 20 power-iteration steps on the flattened
/// design.
fn estimate_initial_step(design: &ExpandedDesign) -> f64 {
    let a = design.flat();
    let cols = a.ncols();
    if cols == 0 {
        return 1.0;
    }
    let mut v = Array1::from_elem(cols, 1.0 / (cols as f64).sqrt());
    let mut sigma2 = 0.0;
    for _ in 0..20 {
        let u = a.dot(&v);
        let w = a.t().dot(&u);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= f64::MIN_POSITIVE {
            return 1.0;
        }
        sigma2 = norm;
        v = w / norm;
    }
    4.0 * design.n() as f64 / sigma2
}

struct ProxStep {
    b: Array2<f64>,
    mu: f64,
    smooth: f64,
    step: f64,
}

/// One backtracking prox-gradient step from `(from_b, from_mu)`. On return
/// the majorization inequality holds at the returned step size, so stepping
/// from the current iterate can never increase the objective.
fn prox_gradient_step(
    from_b: &Array2<f64>,
    from_mu: f64,
    design: &ExpandedDesign,
    y: &[u8],
    w: &PenaltyWeights,
    backtracking: f64,
    mut step: f64,
) -> Result<ProxStep> {
    let eta = linear_predictor(from_b, from_mu, design);
    let f_from = loss_of_eta(&eta, y);
    let residual = residual_of_eta(&eta, y);
    let (grad_b, grad_mu) = gradient_of_residual(&residual, design);

    loop {
        let mut shifted = from_b.clone();
        shifted.zip_mut_with(&grad_b, |b, g| *b -= step * g);
        let b_new = prox_sparse_group(&shifted, w, step)?;
        let mu_new = from_mu - step * grad_mu;

        let eta_new = linear_predictor(&b_new, mu_new, design);
        let f_new = loss_of_eta(&eta_new, y);

        let mut inner = 0.0;
        let mut dist2 = 0.0;
        for (bn, (bo, g)) in b_new.iter().zip(from_b.iter().zip(grad_b.iter())) {
            let diff = bn - bo;
            inner += g * diff;
            dist2 += diff * diff;
        }
        let dmu = mu_new - from_mu;
        inner += grad_mu * dmu;
        dist2 += dmu * dmu;

        let bound = f_from + inner + dist2 / (2.0 * step);
        if f_new <= bound + 1e-12 * bound.abs().max(1.0) || step < 1e-18 {
            return Ok(ProxStep {
                b: b_new,
                mu: mu_new,
                smooth: f_new,
                step,
            });
        }
        step *= backtracking;
    }
}

/// Minimize the penalized logistic objective from the neutral start
/// `B = 0`, `μ = logit(clamp(ȳ, 0.01, 0.99))`.
pub fn fit(
    design: &ExpandedDesign,
    y: &[u8],
    w: &PenaltyWeights,
    cfg: &FitConfig,
) -> Result<FitResult> {
    fit_from(design, y, w, cfg, None)
}

/// Minimize the penalized logistic objective from a warm start.
pub fn fit_warm(
    design: &ExpandedDesign,
    y: &[u8],
    w: &PenaltyWeights,
    cfg: &FitConfig,
    init: &CoefficientMatrix,
) -> Result<FitResult> {
    fit_from(design, y, w, cfg, Some(init))
}

fn fit_from(
    design: &ExpandedDesign,
    y: &[u8],
    w: &PenaltyWeights,
    cfg: &FitConfig,
    init: Option<&CoefficientMatrix>,
) -> Result<FitResult> {
    cfg.validate()?;
    check_labels(y, design.n())?;
    let (d, m) = (design.d(), design.m());
    let (wd, wm) = w.dims();
    if (wd, wm) != (d, m) {
        return Err(Error::DimensionMismatch(format!(
            "weights are for {wd}×{wm} but the design expands {d}×{m}"
        )));
    }
    let n = design.n();
    if n < 2 {
        return Err(Error::InvalidConfig("need at least two samples".into()));
    }
    let positives = y.iter().filter(|&&v| v == 1).count();
    if positives == 0 || positives == n {
        return Err(Error::SingleClass);
    }

    let ybar = positives as f64 / n as f64;
    let (mut x_b, mut x_mu) = match init {
        Some(c) => {
            check_coef(c.dims(), design)?;
            (c.b().clone(), c.mu())
        }
        None => (Array2::zeros((d, m)), logit(ybar.clamp(0.01, 0.99))),
    };

    let mut step = cfg
        .initial_step
        .unwrap_or_else(|| estimate_initial_step(design));
    let penalty = |b: &Array2<f64>| sparse_group_slope_norm(b, w);

    let mut fx =
        logistic_loss(&CoefficientMatrix::new(x_b.clone(), x_mu), design, y)? + penalty(&x_b)?;
    let mut trace = Vec::with_capacity(cfg.max_iterations + 1);
    trace.push(fx);

    let mut y_b = x_b.clone();
    let mut y_mu = x_mu;
    let mut theta = 1.0f64;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..cfg.max_iterations {
        iterations += 1;
        let mut attempt = prox_gradient_step(&y_b, y_mu, design, y, w, cfg.backtracking, step)?;
        let mut fz = attempt.smooth + penalty(&attempt.b)?;

        if fz > fx {
            // Momentum overshot: restart and step from the current iterate,
            // which the majorization bound guarantees is a descent step.
            theta = 1.0;
            attempt = prox_gradient_step(&x_b, x_mu, design, y, w, cfg.backtracking, attempt.step)?;
            fz = attempt.smooth + penalty(&attempt.b)?;
        }
        step = attempt.step;

        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let beta = if cfg.acceleration {
            (theta - 1.0) / theta_next
        } else {
            0.0
        };
        y_b = &attempt.b + &((&attempt.b - &x_b) * beta);
        y_mu = attempt.mu + beta * (attempt.mu - x_mu);
        theta = theta_next;

        let rel_change = (fx - fz).abs() / fx.abs().max(1.0);
        x_b = attempt.b;
        x_mu = attempt.mu;
        fx = fz.min(fx);
        trace.push(fx);

        if rel_change < cfg.tolerance {
            converged = true;
            break;
        }
    }

    Ok(FitResult {
        coefficients: CoefficientMatrix::new(x_b, x_mu),
        objective_trace: trace,
        iterations,
        converged,
    })
}

/// Fit a sequence of weight settings, warm-starting each fit from the
/// previous solution. This is the regularization-path primitive behind
/// cross-validation; traverse from the strongest penalty to the weakest.
pub fn fit_path(
    design: &ExpandedDesign,
    y: &[u8],
    weights: &[PenaltyWeights],
    cfg: &FitConfig,
) -> Result<Vec<FitResult>> {
    let mut results = Vec::with_capacity(weights.len());
    let mut previous: Option<CoefficientMatrix> = None;
    for w in weights {
        let fitted = match previous.as_ref() {
            Some(init) => fit_warm(design, y, w, cfg, init)?,
            None => fit(design, y, w, cfg)?,
        };
        previous = Some(fitted.coefficients.clone());
        results.push(fitted);
    }
    Ok(results)
}
