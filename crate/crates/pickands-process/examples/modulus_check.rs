//! Continuity-modulus diagnostic: the sup of normalized increments of
//! simulated limit paths against the soft bound `2 L`.
//!
//! Exceeding the bound is reported, not fatal: the underlying statement is
//! an almost-sure limit, not a finite-sample guarantee.
//!
//! ```bash
//! cargo run --example modulus_check
//! ```

use pickands_process::evt_core::TailGrid;
use pickands_process::mc_harness::run_modulus_experiment;
use pickands_process::samplers::RngStream;

fn main() -> pickands_process::Result<()> {
    let grid = TailGrid::linspace(0.2, 0.8, 400)?;
    let h_values = [0.02, 0.01, 0.005];
    for k_exponent in [0.0, 1.0] {
        let report =
            run_modulus_experiment(k_exponent, &grid, 500, &h_values, &RngStream::new(99, 0))?;
        let section = report.modulus.as_ref().expect("modulus section");
        println!(
            "K = {k_exponent}: L = {:.3}, soft bound 2L = {:.3}",
            section.l, section.bound
        );
        for (h, ratio) in section.h_values.iter().zip(&section.sup_ratios) {
            println!("  h = {h:<6} sup ratio = {ratio:.3}");
        }
        for w in &section.warnings {
            println!("  warning: {w}");
        }
    }
    Ok(())
}
