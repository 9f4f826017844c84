//! Simulate paths of the limiting Gaussian process and verify that their
//! empirical covariance reproduces the kernel.
//!
//! ```bash
//! cargo run --example limit_paths
//! ```

use pickands_process::evt_core::TailGrid;
use pickands_process::limit_gaussian::{gamma_constructive, simulate_limit_paths};
use pickands_process::samplers::RngStream;

fn main() -> pickands_process::Result<()> {
    let k_exponent = 1.0;
    let grid = TailGrid::linspace(0.3, 0.7, 10)?;
    let n_paths = 5000;
    let paths = simulate_limit_paths(k_exponent, &grid, n_paths, &RngStream::new(88, 0))?;

    println!("simulated {n_paths} paths on {} grid points", grid.len());
    println!("first path: {:?}\n", &paths[0].values[..4.min(grid.len())]);

    // Empirical covariance against the kernel, entry by entry on the
    // diagonal and in aggregate.
    let dim = grid.len();
    let mut mean = vec![0.0f64; dim];
    for p in &paths {
        for (m, v) in mean.iter_mut().zip(&p.values) {
            *m += v / n_paths as f64;
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    println!("{:>6} {:>12} {:>12}", "s", "empirical", "kernel");
    for i in 0..dim {
        let mut var = 0.0;
        for p in &paths {
            var += (p.values[i] - mean[i]).powi(2) / (n_paths as f64 - 1.0);
        }
        println!(
            "{:>6.3} {:>12.4} {:>12.4}",
            grid.points()[i],
            var,
            gamma_constructive(grid.points()[i], grid.points()[i], k_exponent)
        );
    }
    for i in 0..dim {
        for j in 0..dim {
            let mut cov = 0.0;
            for p in &paths {
                cov += (p.values[i] - mean[i]) * (p.values[j] - mean[j])
                    / (n_paths as f64 - 1.0);
            }
            let reference =
                gamma_constructive(grid.points()[i], grid.points()[j], k_exponent);
            num += (cov - reference).powi(2);
            den += reference * reference;
        }
    }
    println!(
        "\nrelative Frobenius error of the empirical covariance: {:.4}",
        (num / den).sqrt()
    );
    Ok(())
}
