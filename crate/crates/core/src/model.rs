//! Fitted classifiers: evaluate the additive logit, classify, report
//! probabilities and selected features, serialize to JSON.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::data_io::Scaler;
use crate::error::{Error, Result};
use crate::penalty::CoefficientMatrix;
use crate::solver::{self, FitConfig, FitResult};
use crate::tuning;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lasso,
    GroupLasso,
    SparseGroupLasso,
    SparseGroupSlope,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Lasso,
        Method::GroupLasso,
        Method::SparseGroupLasso,
        Method::SparseGroupSlope,
    ];
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Method::Lasso => "lasso",
            Method::GroupLasso => "grouplasso",
            Method::SparseGroupLasso => "sparsegrouplasso",
            Method::SparseGroupSlope => "sparsegroupslope",
        };
        write!(f, "{name}")
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "lasso" => Ok(Method::Lasso),
            "grouplasso" => Ok(Method::GroupLasso),
            "sparsegrouplasso" => Ok(Method::SparseGroupLasso),
            "sparsegroupslope" => Ok(Method::SparseGroupSlope),
            other => Err(Error::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }
}

/// A fitted SpAM classifier: basis, per-feature scaling ranges, coefficients
/// and the method that produced them. Prediction maps each raw feature
/// through its stored min-max range (clamped into `[0, 1]`), evaluates the
/// basis on nonzero rows only and thresholds the logit at zero.
#[derive(Debug, Clone)]
pub struct SpamModel {
    basis: BasisSpec,
    scaler: Vec<(f64, f64)>,
    coef: CoefficientMatrix,
    method: Method,
}

impl SpamModel {
    pub fn new(
        basis: BasisSpec,
        scaler: Vec<(f64, f64)>,
        coef: CoefficientMatrix,
        method: Method,
    ) -> Result<Self> {
        let (d, m) = coef.dims();
        if scaler.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "{} scaler entries for {d} features",
                scaler.len()
            )));
        }
        if m != basis.truncation() {
            return Err(Error::DimensionMismatch(format!(
                "coefficients have {m} columns but the basis truncation is {}",
                basis.truncation()
            )));
        }
        for (j, &(lo, hi)) in scaler.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidConfig(format!(
                    "scaler range for feature {j} must satisfy min < max, got ({lo}, {hi})"
                )));
            }
        }
        Ok(Self {
            basis,
            scaler,
            coef,
            method,
        })
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn coefficients(&self) -> &CoefficientMatrix {
        &self.coef
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn scaler(&self) -> &[(f64, f64)] {
        &self.scaler
    }

    pub fn num_features(&self) -> usize {
        self.scaler.len()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.scaler.len() {
            return Err(Error::DimensionMismatch(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.scaler.len()
            )));
        }
        if let Some(idx) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::OutOfDomain {
                row: 0,
                col: idx,
                value: x[idx],
            });
        }
        Ok(())
    }

    /// `ĝ(x) = μ + Σ_{j,ℓ} B[j][ℓ]·ψ_ℓ(scale(x_j))`.
    pub fn predict_logit(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.logit_unchecked(x))
    }

    fn logit_unchecked(&self, x: &[f64]) -> f64 {
        let m = self.basis.truncation();
        let b = self.coef.b();
        let mut g = self.coef.mu();
        for (j, (&xj, &(lo, hi))) in x.iter().zip(self.scaler.iter()).enumerate() {
            let row = b.row(j);
            if row.iter().all(|&v| v == 0.0) {
                continue;
            }
            let scaled = ((xj - lo) / (hi - lo)).clamp(0.0, 1.0);
            for l in 1..=m {
                let beta = row[l - 1];
                if beta != 0.0 {
                    g += beta * self.basis.eval_unchecked(l, scaled);
                }
            }
        }
        g
    }

    /// `I{ĝ(x) ≥ 0}`: ties at exactly zero go to class 1.
    pub fn classify(&self, x: &[f64]) -> Result<u8> {
        Ok(u8::from(self.predict_logit(x)? >= 0.0))
    }

    /// `σ(ĝ(x))` with the overflow-safe logistic.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        Ok(solver::sigmoid(self.predict_logit(x)?))
    }

    /// Features whose coefficient row has ℓ2-norm strictly above `threshold`.
    /// The proximal operator produces exact zeros, so the default threshold
    /// of zero recovers the support without numerical dust.
    pub fn selected_features(&self, threshold: f64) -> Vec<usize> {
        assert!(threshold >= 0.0, "threshold must be nonnegative");
        self.coef
            .b()
            .rows()
            .into_iter()
            .enumerate()
            .filter(|(_, row)| row.iter().map(|v| v * v).sum::<f64>().sqrt() > threshold)
            .map(|(j, _)| j)
            .collect()
    }

    pub fn nonzero_coefficients(&self) -> usize {
        self.coef.nonzero_count()
    }

    /// Fraction of rows of `x` whose predicted class differs from `y`.
    pub fn misclassification_rate(&self, x: ArrayView2<'_, f64>, y: &[u8]) -> Result<f64> {
        let n = x.nrows();
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {n} samples",
                y.len()
            )));
        }
        if n == 0 {
            return Err(Error::InvalidConfig("empty evaluation set".into()));
        }
        if x.ncols() != self.scaler.len() {
            return Err(Error::DimensionMismatch(format!(
                "input has {} features, model expects {}",
                x.ncols(),
                self.scaler.len()
            )));
        }
        let mut wrong = 0usize;
        let mut row_buf = vec![0.0; x.ncols()];
        for (i, row) in x.rows().into_iter().enumerate() {
            for (dst, src) in row_buf.iter_mut().zip(row.iter()) {
                *dst = *src;
            }
            let label = u8::from(self.logit_unchecked(&row_buf) >= 0.0);
            if label != y[i] {
                wrong += 1;
            }
        }
        Ok(wrong as f64 / n as f64)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelDocument::from(self))?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(s)?;
        doc.into_model()
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()?).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }
}

/// On-disk model schema. Numbers are written in shortest round-trip form, so
/// a save/load cycle reproduces every coefficient bit for bit.
#[derive(Serialize, Deserialize)]
struct ModelDocument {
    basis_kind: crate::basis::BasisKind,
    m: usize,
    scaler_min: Vec<f64>,
    scaler_max: Vec<f64>,
    mu: f64,
    b: Vec<Vec<f64>>,
    method: Method,
    version: String,
}

impl From<&SpamModel> for ModelDocument {
    fn from(model: &SpamModel) -> Self {
        ModelDocument {
            basis_kind: model.basis.kind(),
            m: model.basis.truncation(),
            scaler_min: model.scaler.iter().map(|r| r.0).collect(),
            scaler_max: model.scaler.iter().map(|r| r.1).collect(),
            mu: model.coef.mu(),
            b: model
                .coef
                .b()
                .rows()
                .into_iter()
                .map(|row| row.to_vec())
                .collect(),
            method: model.method,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

impl ModelDocument {
    fn into_model(self) -> Result<SpamModel> {
        let d = self.b.len();
        if self.scaler_min.len() != d || self.scaler_max.len() != d {
            return Err(Error::DimensionMismatch(
                "scaler arrays do not match the coefficient rows".into(),
            ));
        }
        let mut b = Array2::zeros((d, self.m));
        for (j, row) in self.b.iter().enumerate() {
            if row.len() != self.m {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient row {j} has {} entries, expected {}",
                    row.len(),
                    self.m
                )));
            }
            for (l, &v) in row.iter().enumerate() {
                b[[j, l]] = v;
            }
        }
        let scaler = self.scaler_min.into_iter().zip(self.scaler_max).collect();
        SpamModel::new(
            BasisSpec::new(self.basis_kind, self.m)?,
            scaler,
            CoefficientMatrix::new(b, self.mu),
            self.method,
        )
    }
}

/// Scale, expand and fit in one call: the standard path from a raw feature
/// matrix to a fitted model. Constant columns are dropped from the fit and
/// come back as zero rows with placeholder ranges, so the model keeps the
/// full feature layout of the input.
pub fn fit_model(
    x: ArrayView2<'_, f64>,
    y: &[u8],
    basis: BasisSpec,
    method: Method,
    c1: f64,
    c2: f64,
    cfg: &FitConfig,
) -> Result<(SpamModel, FitResult)> {
    let scaler = Scaler::fit(x)?;
    let x01 = scaler.apply(x);
    let design = crate::basis::expand(&x01, &basis)?;
    let weights = tuning::method_weights(method, design.n(), design.d(), design.m(), c1, c2)?;
    let fitted = solver::fit(&design, y, &weights, cfg)?;
    let model = assemble_model(&scaler, &basis, method, &fitted.coefficients)?;
    Ok((model, fitted))
}

/// Re-insert dropped rows and attach scaling metadata to fitted coefficients.
pub(crate) fn assemble_model(
    scaler: &Scaler,
    basis: &BasisSpec,
    method: Method,
    coef: &CoefficientMatrix,
) -> Result<SpamModel> {
    let m = basis.truncation();
    let kept = scaler.kept_indices();
    let d_full = scaler.num_features();
    let mut b_full = Array2::zeros((d_full, m));
    for (fit_row, &orig) in kept.iter().enumerate() {
        b_full.row_mut(orig).assign(&coef.b().row(fit_row));
    }
    SpamModel::new(
        *basis,
        scaler.feature_ranges(),
        CoefficientMatrix::new(b_full, coef.mu()),
        method,
    )
}
