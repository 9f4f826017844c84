//! Monte Carlo check that the centered estimator is asymptotically normal
//! with the constructive kernel's variance, pointwise and for the integral
//! estimator.
//!
//! ```bash
//! cargo run --example mc_normality
//! ```

use pickands_process::evt_core::{KSequence, TailGrid, TailModel};
use pickands_process::functionals::GridMeasure;
use pickands_process::limit_gaussian::gamma_constructive;
use pickands_process::mc_harness::{
    run_integral_normality_experiment, run_normality_experiment,
};
use pickands_process::samplers::RngStream;

fn main() -> pickands_process::Result<()> {
    let model = TailModel::pareto(1.0)?;
    let (n, k, reps) = (50_000, 500, 4000);

    let grid = TailGrid::linspace(0.4, 0.6, 3)?;
    let report = run_normality_experiment(
        &model,
        &KSequence::constant(k as u64),
        n,
        &grid,
        reps,
        &RngStream::new(0, 0),
    )?;
    println!(
        "pointwise normality, n = {n}, k = {k}, {} replications ({} excluded):",
        report.reps_used, report.excluded
    );
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>8}",
        "s", "mean", "variance", "kernel", "KS p"
    );
    for p in &report.points {
        println!(
            "{:>6.2} {:>10.4} {:>10.4} {:>10.4} {:>8.4}",
            p.s,
            p.mean,
            p.variance,
            gamma_constructive(p.s, p.s, model.k_of_gamma()),
            p.ks_p_value.unwrap_or(f64::NAN)
        );
    }

    let measure = GridMeasure::uniform_on(grid.points())?;
    let integral =
        run_integral_normality_experiment(&model, n, k, &measure, reps, &RngStream::new(0, 0))?;
    let section = integral.integral.as_ref().expect("integral section");
    println!(
        "\nintegral estimator over {} levels: mean = {:.4}, k * variance = {:.4}, sigma2 = {:.4}",
        measure.len(),
        section.mean,
        k as f64 * section.variance,
        section.sigma2
    );
    println!(
        "z-scores vs standard normal: KS statistic = {:.4}, p = {:.4}",
        section.z_ks_statistic.unwrap(),
        section.z_ks_p_value.unwrap()
    );
    Ok(())
}
