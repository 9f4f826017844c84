//! Estimate the tail index of a simulated heavy-tailed sample over a grid
//! of tail levels.
//!
//! ```bash
//! cargo run --example tail_index_estimate
//! ```

use pickands_process::evt_core::{TailGrid, TailModel};
use pickands_process::pickands::{kappa_star_path, pickands_path, theoretical_path};
use pickands_process::samplers::{sample_sorted, RngStream};

fn main() -> pickands_process::Result<()> {
    let model = TailModel::pareto(1.0)?;
    let (n, k) = (100_000, 1000);
    let sample = sample_sorted(&model, n, &RngStream::new(7, 0))?;
    let grid = TailGrid::linspace(0.3, 0.7, 9)?;

    let estimate = pickands_path(&sample, k, &grid);
    let reference = theoretical_path(&model, n, k, &grid);
    let centered = kappa_star_path(&sample, model.index(), k, &grid);

    println!("model {} with n = {n}, k = {k}", model.id());
    println!("{:>6} {:>10} {:>10} {:>12}", "s", "P_n(s)", "p_n(s)", "kappa*(s)");
    for (i, &s) in grid.points().iter().enumerate() {
        println!(
            "{s:>6.3} {:>10.4} {:>10.4} {:>12.4}",
            estimate.values[i], reference.values[i], centered.values[i]
        );
    }
    println!(
        "\nclassical three-order-statistic estimate: P_n(1/2) = {:.4} (target {})",
        estimate.values[4],
        model.k_of_gamma()
    );
    Ok(())
}
