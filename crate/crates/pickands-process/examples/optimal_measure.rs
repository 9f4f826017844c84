//! Find the variance-minimizing measure on a support grid and compare the
//! resulting integral estimator against the classical point-mass choice.
//!
//! ```bash
//! cargo run --example optimal_measure
//! ```

use pickands_process::evt_core::{TailGrid, TailModel};
use pickands_process::functionals::{normalized_estimate, GridMeasure};
use pickands_process::limit_gaussian::{gamma_constructive, CovarianceKernel};
use pickands_process::optimizer::{optimize_measure, MassConstraint, OptimizationProblem};
use pickands_process::samplers::{sample_sorted, RngStream};

fn main() -> pickands_process::Result<()> {
    let k_exponent = 1.0;
    let grid = TailGrid::linspace(0.3, 0.7, 21)?;
    let kernel = CovarianceKernel::constructive(k_exponent)?;

    for constraint in [MassConstraint::UnitMass, MassConstraint::UnitMassNonNegative] {
        let problem = OptimizationProblem::from_kernel(&kernel, &grid, constraint)?;
        let out = optimize_measure(&problem, &grid)?;
        println!(
            "{constraint:?}: sigma2 = {:.4} (point mass at 1/2: {:.4}), kkt residual = {:.2e}",
            out.sigma2,
            gamma_constructive(0.5, 0.5, k_exponent),
            out.kkt_residual
        );
    }

    // Run both estimators on one sample and compare standard errors.
    let model = TailModel::pareto(k_exponent)?;
    let (n, k) = (100_000, 1000);
    let sample = sample_sorted(&model, n, &RngStream::new(5, 0))?;

    let problem = OptimizationProblem::from_kernel(&kernel, &grid, MassConstraint::UnitMass)?;
    let optimal = optimize_measure(&problem, &grid)?.measure;
    let dirac = GridMeasure::dirac(0.5)?;

    let with_optimal = normalized_estimate(&sample, k, &optimal, &kernel, Some(k_exponent))?;
    let with_dirac = normalized_estimate(&sample, k, &dirac, &kernel, Some(k_exponent))?;
    println!(
        "\noptimal measure: estimate = {:.4} +/- {:.4}",
        with_optimal.estimate, with_optimal.std_error
    );
    println!(
        "point mass:      estimate = {:.4} +/- {:.4}",
        with_dirac.estimate, with_dirac.std_error
    );
    Ok(())
}
