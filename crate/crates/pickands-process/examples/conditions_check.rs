//! Check the rank-growth condition for several rank rules and the
//! regularity conditions for models with nonzero correction functions.
//!
//! ```bash
//! cargo run --example conditions_check
//! ```

use pickands_process::evt_core::{
    check_condition_k, check_rc, AuxFunction, DomainCase, ExtremeIndex, KSequence, TailModel,
};

fn main() -> pickands_process::Result<()> {
    let ns = [1_000u64, 100_000, 10_000_000];

    for rule in [KSequence::sqrt(), KSequence::log(), KSequence::linear()] {
        let verdict = check_condition_k(&rule, &ns)?;
        println!(
            "rule {:<8} k = {:?}  accepted = {}",
            rule.id(),
            verdict.k_values,
            verdict.accepted
        );
    }

    // Exact families have zero correction functions, so the regularity
    // conditions hold identically.
    let exact = TailModel::pareto(1.0)?;
    let rc = check_rc(&exact, &KSequence::sqrt(), 2.0, 0.5, &ns)?;
    println!(
        "\n{}: rc1 = {:?} (trend to zero: {})",
        exact.id(),
        rc.rc1_values,
        rc.rc1_trend_to_zero
    );

    // A heavy-tail model with p(u) = sqrt(u): the scaled sup decays like
    // sqrt(8) k / sqrt(n), visible in the values below.
    let perturbed = TailModel::new(
        "pareto-with-sqrt-p",
        DomainCase::Frechet,
        ExtremeIndex::new(1.0)?,
        None,
        0.0,
        1.0,
        AuxFunction::from_fn(|u: f64| u.sqrt()),
        AuxFunction::Zero,
    )?;
    let rc = check_rc(&perturbed, &KSequence::power(1.0 / 3.0), 2.0, 0.5, &ns)?;
    println!(
        "{}: rc1 = {:?} (trend to zero at the default factor: {})",
        "pareto-with-sqrt-p", rc.rc1_values, rc.rc1_trend_to_zero
    );
    Ok(())
}
