//! Cross-validated tuning on simulated data: the chosen sparse group Lasso
//! model must land well under a loose excess-risk ceiling. Ten replications
//! keep the noise manageable; the bound is wide for the same reason.

use sgam::*;

#[test]
fn cv_chosen_sparse_group_lasso_beats_loose_excess_bound() {
    let cfg = SimConfig {
        d: 10,
        n: 300,
        replications: 10,
        test_size: 100,
        seed: 42,
    };
    let harness = HarnessConfig {
        m: Some(8),
        folds: 10,
        grid_axis: log_grid(1e-2, 1e1, 5),
        fit: FitConfig {
            max_iterations: 800,
            tolerance: 1e-7,
            ..FitConfig::default()
        },
        ..HarnessConfig::default()
    };
    let report = run_experiment(&cfg, &[Method::SparseGroupLasso], &harness).unwrap();
    let avg = report.row(Method::SparseGroupLasso).unwrap().avg_excess();
    assert!(
        avg < 0.15,
        "average excess risk {avg} should stay below 0.15 at d = 10, n = 300"
    );
}
