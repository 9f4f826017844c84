//! Verify the Wiener scaling of the uniform order-statistic fluctuations:
//! variance `s` per level and covariance `min(s, t)` across levels.
//!
//! ```bash
//! cargo run --example lemma_scaling
//! ```

use pickands_process::mc_harness::run_lemma1_experiment;
use pickands_process::samplers::RngStream;

fn main() -> pickands_process::Result<()> {
    let (n, k, reps) = (100_000, 1000, 5000);
    let levels = [0.25, 0.5, 1.0];
    let report = run_lemma1_experiment(n, k, &levels, reps, &RngStream::new(55, 0))?;

    println!("n = {n}, k = {k}, {reps} replications");
    println!("{:>6} {:>12} {:>8}", "s", "variance", "target");
    for p in &report.points {
        println!("{:>6.2} {:>12.4} {:>8.2}", p.s, p.variance, p.s);
    }

    let cov = report.covariance.as_ref().unwrap();
    println!("\ncovariance across levels (target min(s, t)):");
    for (i, row) in cov.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:8.4}")).collect();
        println!("  s={:<5} {}", levels[i], cells.join(" "));
    }
    println!(
        "\nrelative Frobenius error vs the min kernel: {:.4}",
        report.frobenius_rel_error.unwrap()
    );
    Ok(())
}
