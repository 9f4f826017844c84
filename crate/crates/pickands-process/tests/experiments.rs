//! Desk-scale experiment checks that sit between the unit tests and the
//! acceptance suite: full-size replication counts, moderate runtime.

use pickands_process::evt_core::{KSequence, TailGrid, TailModel};
use pickands_process::limit_gaussian::gamma_constructive;
use pickands_process::mc_harness::{run_covariance_experiment, run_normality_experiment};
use pickands_process::samplers::RngStream;

#[test]
fn covariance_matches_kernel_on_a_ten_point_grid() {
    // Empirical covariance of the centered process across ten levels stays
    // within 25% relative Frobenius error of the constructive kernel.
    let model = TailModel::pareto(1.0).unwrap();
    let grid = TailGrid::linspace(0.3, 0.7, 10).unwrap();
    let report = run_covariance_experiment(
        &model,
        100_000,
        1000,
        &grid,
        10_000,
        &RngStream::new(2024, 0),
    )
    .unwrap();
    let err = report.frobenius_rel_error.unwrap();
    assert!(err < 0.25, "relative Frobenius error {err}");
    assert_eq!(report.excluded, 0);
}

#[test]
fn light_tail_variance_matches_kernel_at_half() {
    // Exponential data (working exponent 0): the centered variance at level
    // 1/2 approaches (1 - 1/4)/(log 2)^4, about 3.249.
    let model = TailModel::exponential();
    let grid = TailGrid::singleton(0.5).unwrap();
    let report = run_normality_experiment(
        &model,
        &KSequence::constant(1000),
        100_000,
        &grid,
        10_000,
        &RngStream::new(2025, 0),
    )
    .unwrap();
    let variance = report.point(0).variance;
    let kernel = gamma_constructive(0.5, 0.5, 0.0);
    assert!((kernel - 3.249).abs() < 1e-3);
    assert!(
        (variance - kernel).abs() <= 0.2 * kernel,
        "variance {variance} vs kernel {kernel}"
    );
    assert!(report.point(0).ks_p_value.unwrap() > 0.01);
}
