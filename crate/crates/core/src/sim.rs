//! Simulation study harness: correlated uniform designs, three true additive
//! components, Bernoulli labels, the Bayes oracle and replicated experiment
//! reports.

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::{BasisKind, BasisSpec};
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::model::{fit_model, Method};
use crate::solver::FitConfig;
use crate::tuning::{cross_validate, default_grid_axis, method_grid};

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub d: usize,
    pub n: usize,
    pub replications: usize,
    pub test_size: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(d: usize, n: usize, seed: u64) -> Self {
        Self {
            d,
            n,
            replications: 10,
            test_size: 100,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 3 {
            return Err(Error::InvalidConfig(
                "simulation needs d ≥ 3: the three active components live on the first three features"
                    .into(),
            ));
        }
        if self.n < 10 {
            return Err(Error::InvalidConfig("simulation needs n ≥ 10".into()));
        }
        if self.replications == 0 || self.test_size == 0 {
            return Err(Error::InvalidConfig(
                "replications and test size must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Knobs of the experiment that are not part of the statistical design:
/// basis, truncation, CV grid and folds, solver settings.
#[derive(Debug, Clone)]
pub struct HarnessConfig {
    pub basis: BasisKind,
    /// Basis truncation; `None` uses `min(n, 128)`.
    pub m: Option<usize>,
    pub folds: usize,
    pub grid_axis: Vec<f64>,
    pub fit: FitConfig,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        Self {
            basis: BasisKind::Cosine,
            m: None,
            folds: 10,
            grid_axis: default_grid_axis(),
            fit: FitConfig::default(),
        }
    }
}

/// `X_ij = (W_ij + U_i)/2` with `W_ij`, `U_i` i.i.d. uniform on `[0, 1]`:
/// every pair of features has correlation 1/2. Per sample, the shared `U_i`
/// is drawn first and then the row of `W_ij`.
pub fn gen_design(n: usize, d: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Array2::zeros((n, d));
    for i in 0..n {
        let u: f64 = rng.random();
        for j in 0..d {
            let w: f64 = rng.random();
            x[[i, j]] = (w + u) / 2.0;
        }
    }
    x
}

fn g1_raw(x: f64) -> f64 {
    (x - 0.6).abs()
}

fn g2_raw(x: f64) -> f64 {
    (2.0 * x - 1.0) * (2.0 * x - 1.0)
}

fn g3_raw(x: f64) -> f64 {
    let s = (2.0 * std::f64::consts::PI * x).sin();
    s / (2.0 - s)
}

const RAW_COMPONENTS: [fn(f64) -> f64; 3] = [g1_raw, g2_raw, g3_raw];

/// The centering/scaling maps fitted on a training design, so the same true
/// logit can be evaluated on later (test) designs without re-centering.
#[derive(Debug, Clone)]
pub struct ComponentTransform {
    centers: [f64; 3],
    scales: [f64; 3],
}

impl ComponentTransform {
    /// Evaluate the true logit `g(x) = Σ_c (g_c(x_c) − center_c)·scale_c`.
    pub fn logit(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        (0..x.nrows())
            .map(|i| {
                (0..3)
                    .map(|c| (RAW_COMPONENTS[c](x[[i, c]]) - self.centers[c]) * self.scales[c])
                    .sum()
            })
            .collect()
    }
}

/// True logit of the simulation on a training design: the three raw
/// components evaluated on the first three features, each centred to mean
/// zero and scaled to unit Euclidean norm. There is no intercept.
#[derive(Debug, Clone)]
pub struct TrueLogit {
    pub g: Vec<f64>,
    pub components: [Vec<f64>; 3],
    pub transform: ComponentTransform,
}

pub fn true_logit(x: ArrayView2<'_, f64>) -> Result<TrueLogit> {
    let (n, d) = x.dim();
    if d < 3 {
        return Err(Error::InvalidConfig(format!(
            "true logit needs d ≥ 3 features, got {d}"
        )));
    }
    let mut centers = [0.0; 3];
    let mut scales = [0.0; 3];
    let mut components: [Vec<f64>; 3] = [vec![], vec![], vec![]];
    for c in 0..3 {
        let raw: Vec<f64> = (0..n).map(|i| RAW_COMPONENTS[c](x[[i, c]])).collect();
        let center = raw.iter().sum::<f64>() / n as f64;
        let centred: Vec<f64> = raw.iter().map(|v| v - center).collect();
        let norm = centred.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidConfig(format!(
                "component {c} is constant on this design; cannot normalize"
            )));
        }
        centers[c] = center;
        scales[c] = 1.0 / norm;
        components[c] = centred.iter().map(|v| v / norm).collect();
    }
    let g: Vec<f64> = (0..n)
        .map(|i| components[0][i] + components[1][i] + components[2][i])
        .collect();
    Ok(TrueLogit {
        g,
        components,
        transform: ComponentTransform { centers, scales },
    })
}

/// Independent Bernoulli labels with `P(Y = 1) = σ(g_i)`.
pub fn gen_labels(g: &[f64], seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    g.iter()
        .map(|&gi| u8::from(rng.random::<f64>() < crate::solver::sigmoid(gi)))
        .collect()
}

/// The Bayes oracle `I{g ≥ 0}` elementwise.
pub fn bayes_classify(g: &[f64]) -> Vec<u8> {
    g.iter().map(|&v| u8::from(v >= 0.0)).collect()
}

/// Per-replication outcomes of one method.
#[derive(Debug, Clone)]
pub struct MethodRow {
    pub method: Method,
    pub excess_risk: Vec<f64>,
    pub selected_features: Vec<usize>,
    pub nonzero_coefficients: Vec<usize>,
}

impl MethodRow {
    pub fn avg_excess(&self) -> f64 {
        self.excess_risk.iter().sum::<f64>() / self.excess_risk.len() as f64
    }

    pub fn avg_selected(&self) -> f64 {
        self.selected_features.iter().sum::<usize>() as f64 / self.selected_features.len() as f64
    }

    pub fn avg_nonzero(&self) -> f64 {
        self.nonzero_coefficients.iter().sum::<usize>() as f64
            / self.nonzero_coefficients.len() as f64
    }
}

/// Everything a `(d, n)` experiment produced, raw values included.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub d: usize,
    pub n: usize,
    pub replications: usize,
    pub seed: u64,
    pub rows: Vec<MethodRow>,
}

impl ExperimentReport {
    pub fn row(&self, method: Method) -> Option<&MethodRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    /// One CSV row per `(method, replication)` with the raw values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "d,n,method,replication,excess_risk,selected_features,nonzero_coefficients\n",
        );
        for row in &self.rows {
            for r in 0..row.excess_risk.len() {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    self.d,
                    self.n,
                    row.method,
                    r,
                    row.excess_risk[r],
                    row.selected_features[r],
                    row.nonzero_coefficients[r],
                ));
            }
        }
        out
    }
}

/// Aligned-text table over a set of reports, grouped by `d` with one row per
/// `n`: average excess risk with the average counts `(features; coefficients)`
/// beneath, one column per method.
pub fn format_table(reports: &[ExperimentReport]) -> String {
    if reports.is_empty() {
        return String::new();
    }
    let methods: Vec<Method> = reports[0].rows.iter().map(|r| r.method).collect();
    const COL: usize = 20;
    let mut out = String::new();
    out.push_str(&format!("{:>6}", "n"));
    for m in &methods {
        out.push_str(&format!("  {:<COL$}", m.to_string()));
    }
    out.push('\n');

    let mut d_values: Vec<usize> = Vec::new();
    for rep in reports {
        if !d_values.contains(&rep.d) {
            d_values.push(rep.d);
        }
    }
    for d in d_values {
        out.push_str(&format!("d = {d}\n"));
        for rep in reports.iter().filter(|r| r.d == d) {
            out.push_str(&format!("{:>6}", rep.n));
            for m in &methods {
                match rep.row(*m) {
                    Some(row) => out.push_str(&format!("  {:<COL$.3}", row.avg_excess())),
                    None => out.push_str(&format!("  {:<COL$}", "-")),
                }
            }
            out.push('\n');
            out.push_str(&format!("{:>6}", ""));
            for m in &methods {
                match rep.row(*m) {
                    Some(row) => {
                        let counts =
                            format!("({:.1}; {:.1})", row.avg_selected(), row.avg_nonzero());
                        out.push_str(&format!("  {counts:<COL$}"));
                    }
                    None => out.push_str(&format!("  {:<COL$}", "-")),
                }
            }
            out.push('\n');
        }
    }
    out
}

struct ReplicationOutcome {
    // One entry per method, in the order requested.
    excess: Vec<f64>,
    selected: Vec<usize>,
    nonzero: Vec<usize>,
}

/// Run the full experiment: per replication, draw a training set, tune every
/// method by K-fold cross-validation, fit at the chosen constants and score
/// the excess risk over the Bayes oracle on a fresh test set. Replications
/// run in parallel; each one derives its seeds from the master seed and its
/// own index, so the report does not depend on the thread count.
pub fn run_experiment(
    cfg: &SimConfig,
    methods: &[Method],
    harness: &HarnessConfig,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    if methods.is_empty() {
        return Err(Error::InvalidConfig("no methods requested".into()));
    }
    let outcomes: Vec<ReplicationOutcome> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| run_replication(cfg, methods, harness, rep))
        .collect::<Result<Vec<_>>>()?;

    let rows = methods
        .iter()
        .enumerate()
        .map(|(k, &method)| MethodRow {
            method,
            excess_risk: outcomes.iter().map(|o| o.excess[k]).collect(),
            selected_features: outcomes.iter().map(|o| o.selected[k]).collect(),
            nonzero_coefficients: outcomes.iter().map(|o| o.nonzero[k]).collect(),
        })
        .collect();

    Ok(ExperimentReport {
        d: cfg.d,
        n: cfg.n,
        replications: cfg.replications,
        seed: cfg.seed,
        rows,
    })
}

fn run_replication(
    cfg: &SimConfig,
    methods: &[Method],
    harness: &HarnessConfig,
    rep: usize,
) -> Result<ReplicationOutcome> {
    let base = derive_seed(cfg.seed, rep as u64);
    let mut last_err = None;
    // A failed attempt (degenerate labels or folds) reruns with a fresh
    // derived seed, at most 3 retries.
    for attempt in 0..4u64 {
        let s = derive_seed(base, attempt);
        match try_replication(cfg, methods, harness, s) {
            Ok(outcome) => return Ok(outcome),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.expect("at least one attempt ran"))
}

fn try_replication(
    cfg: &SimConfig,
    methods: &[Method],
    harness: &HarnessConfig,
    seed: u64,
) -> Result<ReplicationOutcome> {
    let x_train = gen_design(cfg.n, cfg.d, derive_seed(seed, 0));
    let truth = true_logit(x_train.view())?;
    let y_train = gen_labels(&truth.g, derive_seed(seed, 1));

    let x_test = gen_design(cfg.test_size, cfg.d, derive_seed(seed, 2));
    let g_test = truth.transform.logit(x_test.view());
    let y_test = gen_labels(&g_test, derive_seed(seed, 3));

    let oracle_labels = bayes_classify(&g_test);
    let oracle_error = oracle_labels
        .iter()
        .zip(y_test.iter())
        .filter(|(a, b)| a != b)
        .count() as f64
        / cfg.test_size as f64;

    let m = harness
        .m
        .unwrap_or_else(|| BasisSpec::default_truncation(cfg.n));
    let basis = BasisSpec::new(harness.basis, m)?;
    let cv_seed = derive_seed(seed, 4);

    let mut excess = Vec::with_capacity(methods.len());
    let mut selected = Vec::with_capacity(methods.len());
    let mut nonzero = Vec::with_capacity(methods.len());
    for &method in methods {
        let grid = method_grid(method, &harness.grid_axis);
        let report = cross_validate(
            x_train.view(),
            &y_train,
            &basis,
            method,
            &grid,
            harness.folds,
            cv_seed,
            &harness.fit,
        )?;
        let (c1, c2) = report.chosen_point();
        let (model, _) = fit_model(
            x_train.view(),
            &y_train,
            basis,
            method,
            c1,
            c2,
            &harness.fit,
        )?;
        let error = model.misclassification_rate(x_test.view(), &y_test)?;
        excess.push(error - oracle_error);
        selected.push(model.selected_features(0.0).len());
        nonzero.push(model.nonzero_coefficients());
    }
    Ok(ReplicationOutcome {
        excess,
        selected,
        nonzero,
    })
}
