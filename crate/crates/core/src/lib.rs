//! Sparse generalized additive model (SpAM) classification.
//!
//! Binary classifiers of the form `I{ĝ(x) ≥ 0}` where the logit
//! `ĝ(x) = μ + Σ_j Σ_ℓ β_{jℓ}·ψ_ℓ(x_j)` is fitted by penalized logistic
//! regression over orthonormal basis expansions, with sparse group Lasso or
//! sparse group Slope penalties on the coefficient matrix. The crate also
//! ships the simulation and benchmark harnesses used to evaluate the
//! classifiers.

pub mod basis;
pub mod data_io;
pub mod error;
pub mod model;
pub mod oracle;
pub mod penalty;
pub mod sim;
pub mod solver;
pub mod spambase;
pub mod tuning;

pub use basis::{expand, BasisKind, BasisSpec, ExpandedDesign};
pub use data_io::{load_csv, load_features_csv, split, write_csv, Dataset, LabelColumn, Scaler};
pub use error::{Error, Result};
pub use model::{fit_model, Method, SpamModel};
pub use penalty::{
    prox_group_l2, prox_sorted_l1, prox_sparse_group, soft_threshold, sparse_group_slope_norm,
    CoefficientMatrix, PenaltyWeights,
};
pub use sim::{
    bayes_classify, format_table, gen_design, gen_labels, run_experiment, true_logit,
    ExperimentReport, HarnessConfig, SimConfig, TrueLogit,
};
pub use solver::{fit, fit_path, fit_warm, logistic_gradient, logistic_loss, FitConfig, FitResult};
pub use spambase::{run_spam_bench, SpamBenchConfig, SpamBenchReport, TuningMode};
pub use tuning::{
    cross_validate, default_grid_axis, lasso_weights, log_grid, method_grid, method_weights,
    slope_weights, CvReport, ScheduleKind, WeightSchedule,
};

/// Derive a child seed from a master seed and a stream index (splitmix64).
/// Used everywhere a deterministic fan-out of randomness is needed.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
