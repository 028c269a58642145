//! Orthonormal bases on the unit interval and expansion of raw feature
//! matrices into the design tensor of basis evaluations.
//!
//! Two bases are supported: the cosine series `1, √2·cos(πℓx)` and the Haar
//! wavelet family indexed by `ℓ = 2^h + k`. The constant function is excluded
//! from expansions because every additive component is centred by the
//! unpenalized intercept.

use ndarray::{Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisKind {
    Cosine,
    HaarWavelet,
}

impl std::fmt::Display for BasisKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BasisKind::Cosine => write!(f, "cosine"),
            BasisKind::HaarWavelet => write!(f, "haar"),
        }
    }
}

impl std::str::FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cosine" | "cos" => Ok(BasisKind::Cosine),
            "haar" | "haar_wavelet" | "haarwavelet" => Ok(BasisKind::HaarWavelet),
            other => Err(Error::InvalidConfig(format!("unknown basis '{other}'"))),
        }
    }
}

/// A basis family together with the truncation level `m`: the number of
/// non-constant basis functions kept per feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    kind: BasisKind,
    truncation: usize,
}

impl BasisSpec {
    pub fn new(kind: BasisKind, truncation: usize) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::InvalidConfig(
                "basis truncation must be at least 1".into(),
            ));
        }
        Ok(Self { kind, truncation })
    }

    pub fn cosine(truncation: usize) -> Result<Self> {
        Self::new(BasisKind::Cosine, truncation)
    }

    pub fn haar(truncation: usize) -> Result<Self> {
        Self::new(BasisKind::HaarWavelet, truncation)
    }

    /// Default truncation for a sample of size `n`. The theory only ever
    /// needs `m ≪ n`, so the full `m = n` expansion is capped at 128.
    pub fn default_truncation(n: usize) -> usize {
        n.clamp(1, 128)
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Evaluate the `l`-th basis function at `x ∈ [0, 1]`. `l = 0` is the
    /// constant function for the cosine family and is not defined for Haar.
    pub fn eval(&self, l: usize, x: f64) -> Result<f64> {
        match self.kind {
            BasisKind::Cosine => eval_cosine(l, x),
            BasisKind::HaarWavelet => eval_haar(l, x),
        }
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, l: usize, x: f64) -> f64 {
        match self.kind {
            BasisKind::Cosine => eval_cosine_unchecked(l, x),
            BasisKind::HaarWavelet => eval_haar_unchecked(l, x),
        }
    }
}

#[inline]
fn check_unit_interval(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfDomain {
            row: 0,
            col: 0,
            value: x,
        });
    }
    Ok(())
}

/// `ψ_0 ≡ 1`, `ψ_ℓ(x) = √2·cos(πℓx)` for `ℓ ≥ 1`.
pub fn eval_cosine(l: usize, x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    Ok(eval_cosine_unchecked(l, x))
}

#[inline]
fn eval_cosine_unchecked(l: usize, x: f64) -> f64 {
    if l == 0 {
        1.0
    } else {
        SQRT_2 * (PI * l as f64 * x).cos()
    }
}

/// Decompose a Haar index `ℓ ≥ 1` into `(h, k)` with `ℓ = 2^h + k` and
/// `0 ≤ k ≤ 2^h − 1`.
#[inline]
pub fn haar_split(l: usize) -> (u32, usize) {
    assert!(l >= 1, "Haar index must be at least 1");
    let h = l.ilog2();
    (h, l - (1usize << h))
}

/// Inverse of [`haar_split`].
#[inline]
pub fn haar_index(h: u32, k: usize) -> usize {
    debug_assert!(k < (1usize << h));
    (1usize << h) + k
}

/// Haar wavelet `ψ_{hk}(x) = 2^{h/2}·ψ(2^h·x − k)` with the step mother
/// wavelet. `x = 1` takes the value of the left-adjacent interval so that
/// `|ψ|` is constant over the closure of its support.
pub fn eval_haar(l: usize, x: f64) -> Result<f64> {
    check_unit_interval(x)?;
    Ok(eval_haar_unchecked(l, x))
}

#[inline]
fn eval_haar_unchecked(l: usize, x: f64) -> f64 {
    let (h, k) = haar_split(l);
    let scale = (1u64 << h) as f64;
    let amp = scale.sqrt();
    if x == 1.0 {
        // Left-limit convention: only the last wavelet of the level is live.
        return if k == (1usize << h) - 1 { -amp } else { 0.0 };
    }
    let t = scale * x - k as f64;
    if !(0.0..1.0).contains(&t) {
        0.0
    } else if t < 0.5 {
        amp
    } else {
        -amp
    }
}

/// The `n × d × m` tensor of basis evaluations `Ψ[i][j][ℓ−1] = ψ_ℓ(X[i][j])`,
/// stored flat as an `n × (d·m)` matrix so the solver can treat the model as
/// a linear predictor over `d·m` columns.
#[derive(Debug, Clone)]
pub struct ExpandedDesign {
    values: Array2<f64>,
    n: usize,
    d: usize,
    m: usize,
}

impl ExpandedDesign {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Tensor access: `ψ_{l+1}(X[i][j])` with `l` zero-based over the
    /// non-constant functions.
    #[inline]
    pub fn psi(&self, i: usize, j: usize, l: usize) -> f64 {
        self.values[[i, j * self.m + l]]
    }

    /// The flattened `n × (d·m)` view backing the tensor.
    pub fn flat(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn sample(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }
}

/// Expand a raw `n × d` matrix with entries in `[0, 1]` into the design
/// tensor. Rows are expanded independently (and in parallel); the output is
/// identical for any degree of parallelism.
pub fn expand(x: &Array2<f64>, spec: &BasisSpec) -> Result<ExpandedDesign> {
    let (n, d) = x.dim();
    if d == 0 {
        return Err(Error::DimensionMismatch(
            "design must have at least one feature".into(),
        ));
    }
    for i in 0..n {
        for j in 0..d {
            let v = x[[i, j]];
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfDomain {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    let m = spec.truncation();
    let mut values = Array2::<f64>::zeros((n, d * m));
    let slice = values
        .as_slice_mut()
        .expect("freshly allocated array is contiguous");
    slice
        .par_chunks_mut(d * m)
        .enumerate()
        .for_each(|(i, row)| {
            for j in 0..d {
                let xij = x[[i, j]];
                for l in 1..=m {
                    row[j * m + (l - 1)] = spec.eval_unchecked(l, xij);
                }
            }
        });
    Ok(ExpandedDesign { values, n, d, m })
}
