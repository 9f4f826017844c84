//! Replication engine and statistical tests: desk-scale empirical checks of
//! the asymptotic claims, with deterministic, schedule-independent reports.
//!
//! Replication `r` of an experiment always runs on stream `base.offset(r)`,
//! results are collected into slots indexed by replication, and every
//! reduction is an ordered fold — so a report is byte-identical across runs
//! and across thread counts for a fixed seed. Replications that hit a
//! degenerate estimator configuration (ties) are excluded from the
//! statistics and counted; a report with 1% or more exclusions is flagged.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::evt_core::{KSequence, TailGrid, TailModel};
use crate::functionals::GridMeasure;
use crate::limit_gaussian::{
    gamma_constructive, modulus_constants, modulus_window, simulate_limit_paths,
};
use crate::pickands::{kappa_star_point_stats, tail_ranks};
use crate::samplers::{
    sample_tail_levels, scaled_uniform_stat, uniform_order_stats, uniform_stat_ranks, RngStream,
};

/// Exclusion fraction at which a report is flagged.
const EXCLUSION_FLAG_FRACTION: f64 = 0.01;

/// Below this many usable replications the distributional statistics are
/// marked low-power (the goodness-of-fit test needs at least 8 values).
const LOW_POWER_THRESHOLD: usize = 8;

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov test
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sided one-sample test of `values` against a reference CDF.
///
/// The p-value comes from the asymptotic series
/// `2 sum_j (-1)^{j-1} exp(-2 j^2 x^2)` at `x = D sqrt(n)`, truncated once
/// terms drop below `1e-10`.
pub fn ks_test<F: Fn(f64) -> f64>(values: &[f64], reference_cdf: F) -> Result<KsResult> {
    if values.len() < 8 {
        return Err(Error::InvalidInput(format!(
            "goodness-of-fit needs at least 8 values, got {}",
            values.len()
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut statistic = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = reference_cdf(x);
        statistic = statistic
            .max(((i + 1) as f64 / n - f).abs())
            .max((f - i as f64 / n).abs());
    }
    let p_value = kolmogorov_tail(statistic * n.sqrt());
    Ok(KsResult { statistic, p_value })
}

/// `P(K > x)` for the Kolmogorov distribution.
fn kolmogorov_tail(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..100_000u64 {
        let term = (-2.0 * (j * j) as f64 * x * x).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-10 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Configuration echo embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct McConfig {
    pub schema: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub n: usize,
    pub k: usize,
    pub grid: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    pub stream: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_values: Option<Vec<f64>>,
}

/// Per-level replication statistics.
#[derive(Debug, Clone, Serialize)]
pub struct PointStats {
    pub s: f64,
    pub mean: f64,
    pub variance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks_statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks_p_value: Option<f64>,
}

/// Continuity-modulus section of a report.
#[derive(Debug, Clone, Serialize)]
pub struct ModulusSection {
    pub b: f64,
    pub l: f64,
    /// Soft bound `2 L` the sup ratios are compared against.
    pub bound: f64,
    pub h_values: Vec<f64>,
    pub sup_ratios: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Aggregated Monte Carlo results with the full configuration echo.
///
/// Wall time is tracked but excluded from serialization: the serialized
/// report is the determinism surface and must be byte-identical across
/// runs and thread counts.
#[derive(Debug, Clone, Serialize)]
pub struct McReport {
    pub experiment: String,
    pub config: McConfig,
    pub points: Vec<PointStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covariance: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_covariance: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frobenius_rel_error: Option<f64>,
    pub reps_used: usize,
    pub excluded: usize,
    pub exclusion_flagged: bool,
    pub low_power: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus: Option<ModulusSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral: Option<IntegralSection>,
    #[serde(skip)]
    pub elapsed_seconds: f64,
}

impl McReport {
    /// Canonical bytes of the report (the determinism surface).
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn point(&self, i: usize) -> &PointStats {
        &self.points[i]
    }
}

fn mean_and_variance(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Sample covariance matrix of row vectors (columns are levels).
fn covariance_matrix(rows: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let used = rows.len();
    let mut means = vec![0.0f64; dim];
    for row in rows {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= used as f64;
    }
    let mut cov = vec![vec![0.0f64; dim]; dim];
    for row in rows {
        for i in 0..dim {
            let di = row[i] - means[i];
            for j in 0..dim {
                cov[i][j] += di * (row[j] - means[j]);
            }
        }
    }
    let denom = (used as f64 - 1.0).max(1.0);
    for r in &mut cov {
        for v in r.iter_mut() {
            *v /= denom;
        }
    }
    cov
}

fn frobenius_rel_error(emp: &[Vec<f64>], reference: &[Vec<f64>]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (er, rr) in emp.iter().zip(reference) {
        for (&e, &r) in er.iter().zip(rr) {
            num += (e - r) * (e - r);
            den += r * r;
        }
    }
    (num / den).sqrt()
}

// ---------------------------------------------------------------------------
// Centered-process replication core
// ---------------------------------------------------------------------------

/// Replicated centered-process rows: one vector of
/// `sqrt(k) (P_n(s) - K)` per replication, with tie exclusions counted.
fn kappa_star_rows(
    model: &TailModel,
    n: usize,
    k: usize,
    grid: &TailGrid,
    reps: usize,
    rng: &RngStream,
) -> Result<(Vec<Vec<f64>>, usize)> {
    if reps < 2 {
        return Err(Error::InvalidInput("need at least 2 replications".into()));
    }
    // Levels and ranks are deterministic in (n, k, grid): reject
    // zero-convention points and floor collisions up front.
    let mut ranks: Vec<usize> = vec![k];
    for &s in grid.points() {
        if s * s < k as f64 / n as f64 {
            return Err(Error::ZeroRegion { s, k, n });
        }
        let (mid, deep) = tail_ranks(n, k, s)?;
        ranks.push(mid);
        ranks.push(deep);
    }
    ranks.sort_unstable();
    ranks.dedup();

    let k_exponent = model.k_of_gamma();
    let outcomes: Vec<Option<Vec<f64>>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let stream = rng.offset(r as u64);
            let levels = sample_tail_levels(model, n, &ranks, &stream).ok()?;
            let mut row = Vec::with_capacity(grid.len());
            for &s in grid.points() {
                match kappa_star_point_stats(&levels, k, s, k_exponent) {
                    Ok(v) => row.push(v),
                    Err(_) => return None,
                }
            }
            Some(row)
        })
        .collect();

    let mut rows = Vec::with_capacity(reps);
    let mut excluded = 0usize;
    for outcome in outcomes {
        match outcome {
            Some(row) => rows.push(row),
            None => excluded += 1,
        }
    }
    Ok((rows, excluded))
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

/// Per-level normality check of the centered process.
///
/// For each grid level, replications of `sqrt(k) (P_n(s) - K)` are compared
/// -- after normalization by the constructive kernel's standard deviation --
/// against the standard normal CDF; raw mean and variance are reported
/// alongside.
pub fn run_normality_experiment(
    model: &TailModel,
    kseq: &KSequence,
    n: usize,
    grid: &TailGrid,
    reps: usize,
    rng: &RngStream,
) -> Result<McReport> {
    let start = std::time::Instant::now();
    let k = kseq.k(n as u64)? as usize;
    let (rows, excluded) = kappa_star_rows(model, n, k, grid, reps, rng)?;
    let k_exponent = model.k_of_gamma();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");

    let mut points = Vec::with_capacity(grid.len());
    let low_power = rows.len() < LOW_POWER_THRESHOLD;
    for (i, &s) in grid.points().iter().enumerate() {
        let column: Vec<f64> = rows.iter().map(|r| r[i]).collect();
        let (mean, variance) = mean_and_variance(&column);
        let sd = gamma_constructive(s, s, k_exponent).sqrt();
        let ks = if low_power {
            None
        } else {
            let normalized: Vec<f64> = column.iter().map(|v| v / sd).collect();
            Some(ks_test(&normalized, |x| normal.cdf(x))?)
        };
        points.push(PointStats {
            s,
            mean,
            variance,
            ks_statistic: ks.map(|k| k.statistic),
            ks_p_value: ks.map(|k| k.p_value),
        });
    }

    Ok(McReport {
        experiment: "normality".into(),
        config: McConfig {
            schema: 1,
            model: Some(model.id().to_string()),
            n,
            k,
            grid: grid.points().to_vec(),
            reps,
            seed: rng.seed(),
            stream: rng.stream_id(),
            k_exponent: Some(k_exponent),
            h_values: None,
        },
        points,
        covariance: None,
        reference_covariance: None,
        frobenius_rel_error: None,
        reps_used: rows.len(),
        excluded,
        exclusion_flagged: (excluded as f64) >= EXCLUSION_FLAG_FRACTION * reps as f64,
        low_power,
        modulus: None,
        integral: None,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Replication statistics of the integral estimator over a unit-mass
/// measure.
#[derive(Debug, Clone, Serialize)]
pub struct IntegralSection {
    pub support: Vec<f64>,
    pub weights: Vec<f64>,
    /// Asymptotic variance of the scaled estimator under the constructive
    /// kernel.
    pub sigma2: f64,
    /// Mean and variance of the raw estimate across replications.
    pub mean: f64,
    pub variance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_ks_statistic: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_ks_p_value: Option<f64>,
}

/// Normality check of the integral estimator: replications of the z-score
/// `(I_n - K) sqrt(k) / sigma_m` are compared against the standard normal.
pub fn run_integral_normality_experiment(
    model: &TailModel,
    n: usize,
    k: usize,
    measure: &GridMeasure,
    reps: usize,
    rng: &RngStream,
) -> Result<McReport> {
    let start = std::time::Instant::now();
    let mass = measure.total_mass();
    if (mass - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "measure must have unit mass, got {mass}"
        )));
    }
    let grid = TailGrid::from_points(measure.support().to_vec())?;
    let (rows, excluded) = kappa_star_rows(model, n, k, &grid, reps, rng)?;
    let k_exponent = model.k_of_gamma();
    let sigma2 = {
        let kernel = crate::limit_gaussian::CovarianceKernel::constructive(k_exponent)?;
        crate::functionals::sigma2(measure, &kernel)
    };
    let sqrt_k = (k as f64).sqrt();

    // kappa_star = sqrt(k) (P_n - K), so sum_i w_i kappa_star_i is the
    // scaled, centered integral estimate.
    let scaled: Vec<f64> = rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(measure.weights())
                .map(|(v, w)| v * w)
                .sum::<f64>()
        })
        .collect();
    let estimates: Vec<f64> = scaled.iter().map(|v| k_exponent + v / sqrt_k).collect();
    let (mean, variance) = mean_and_variance(&estimates);
    let low_power = rows.len() < LOW_POWER_THRESHOLD;
    let ks = if low_power {
        None
    } else {
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        let zs: Vec<f64> = scaled.iter().map(|v| v / sigma2.sqrt()).collect();
        Some(ks_test(&zs, |x| normal.cdf(x))?)
    };

    let points = grid
        .points()
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let column: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            let (mean, variance) = mean_and_variance(&column);
            PointStats {
                s,
                mean,
                variance,
                ks_statistic: None,
                ks_p_value: None,
            }
        })
        .collect();

    Ok(McReport {
        experiment: "integral-normality".into(),
        config: McConfig {
            schema: 1,
            model: Some(model.id().to_string()),
            n,
            k,
            grid: grid.points().to_vec(),
            reps,
            seed: rng.seed(),
            stream: rng.stream_id(),
            k_exponent: Some(k_exponent),
            h_values: None,
        },
        points,
        covariance: None,
        reference_covariance: None,
        frobenius_rel_error: None,
        reps_used: rows.len(),
        excluded,
        exclusion_flagged: (excluded as f64) >= EXCLUSION_FLAG_FRACTION * reps as f64,
        low_power,
        modulus: None,
        integral: Some(IntegralSection {
            support: measure.support().to_vec(),
            weights: measure.weights().to_vec(),
            sigma2,
            mean,
            variance,
            z_ks_statistic: ks.map(|k| k.statistic),
            z_ks_p_value: ks.map(|k| k.p_value),
        }),
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Empirical covariance of the centered process across grid levels against
/// the constructive kernel, with the relative Frobenius error.
pub fn run_covariance_experiment(
    model: &TailModel,
    n: usize,
    k: usize,
    grid: &TailGrid,
    reps: usize,
    rng: &RngStream,
) -> Result<McReport> {
    let start = std::time::Instant::now();
    let (rows, excluded) = kappa_star_rows(model, n, k, grid, reps, rng)?;
    let k_exponent = model.k_of_gamma();
    let dim = grid.len();
    let covariance = covariance_matrix(&rows, dim);
    let reference: Vec<Vec<f64>> = grid
        .points()
        .iter()
        .map(|&s| {
            grid.points()
                .iter()
                .map(|&t| gamma_constructive(s, t, k_exponent))
                .collect()
        })
        .collect();
    let frobenius = frobenius_rel_error(&covariance, &reference);

    let points = grid
        .points()
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let column: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            let (mean, variance) = mean_and_variance(&column);
            PointStats {
                s,
                mean,
                variance,
                ks_statistic: None,
                ks_p_value: None,
            }
        })
        .collect();

    Ok(McReport {
        experiment: "covariance".into(),
        config: McConfig {
            schema: 1,
            model: Some(model.id().to_string()),
            n,
            k,
            grid: grid.points().to_vec(),
            reps,
            seed: rng.seed(),
            stream: rng.stream_id(),
            k_exponent: Some(k_exponent),
            h_values: None,
        },
        points,
        covariance: Some(covariance),
        reference_covariance: Some(reference),
        frobenius_rel_error: Some(frobenius),
        reps_used: rows.len(),
        excluded,
        exclusion_flagged: (excluded as f64) >= EXCLUSION_FLAG_FRACTION * reps as f64,
        low_power: rows.len() < LOW_POWER_THRESHOLD,
        modulus: None,
        integral: None,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Scaling check of the scaled uniform order statistics: across
/// replications their variance at level `s` approaches `s` and their
/// covariance across levels approaches `min(s, t)`.
///
/// Levels live in `(0, 1]` (this experiment is the one place level 1 is
/// meaningful, where the rank is `k` itself).
pub fn run_lemma1_experiment(
    n: usize,
    k: usize,
    levels: &[f64],
    reps: usize,
    rng: &RngStream,
) -> Result<McReport> {
    let start = std::time::Instant::now();
    if reps < 2 {
        return Err(Error::InvalidInput("need at least 2 replications".into()));
    }
    if levels.is_empty() {
        return Err(Error::InvalidInput("need at least one level".into()));
    }
    let ranks = uniform_stat_ranks(n, k, levels)?;
    let per_level_rank: Vec<usize> = levels
        .iter()
        .map(|&s| (k as f64 / s).floor() as usize)
        .collect();

    let rows: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut chacha = rng.offset(r as u64).rng();
            let picked = uniform_order_stats(&mut chacha, n, &ranks);
            per_level_rank
                .iter()
                .map(|&rank| {
                    let idx = ranks.binary_search(&rank).expect("rank present");
                    scaled_uniform_stat(n, k, rank, picked[idx])
                })
                .collect()
        })
        .collect();

    let dim = levels.len();
    let covariance = covariance_matrix(&rows, dim);
    let reference: Vec<Vec<f64>> = levels
        .iter()
        .map(|&s| levels.iter().map(|&t| s.min(t)).collect())
        .collect();
    let frobenius = frobenius_rel_error(&covariance, &reference);
    let points = levels
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let column: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            let (mean, variance) = mean_and_variance(&column);
            PointStats {
                s,
                mean,
                variance,
                ks_statistic: None,
                ks_p_value: None,
            }
        })
        .collect();

    Ok(McReport {
        experiment: "lemma1".into(),
        config: McConfig {
            schema: 1,
            model: None,
            n,
            k,
            grid: levels.to_vec(),
            reps,
            seed: rng.seed(),
            stream: rng.stream_id(),
            k_exponent: None,
            h_values: None,
        },
        points,
        covariance: Some(covariance),
        reference_covariance: Some(reference),
        frobenius_rel_error: Some(frobenius),
        reps_used: reps,
        excluded: 0,
        exclusion_flagged: false,
        low_power: reps < LOW_POWER_THRESHOLD,
        modulus: None,
        integral: None,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Continuity-modulus diagnostic on simulated limit paths: for each window
/// width `h`, the sup of `|G(s) - G(t)| / w(h)` over grid pairs with
/// `|s - t| <= h` is compared against the soft bound `2 L`.
///
/// Exceeding the bound produces a warning entry, not an error — the bound is
/// an almost-sure limsup statement, not a finite-sample guarantee.
pub fn run_modulus_experiment(
    k_exponent: f64,
    grid: &TailGrid,
    n_paths: usize,
    h_values: &[f64],
    rng: &RngStream,
) -> Result<McReport> {
    let start = std::time::Instant::now();
    if h_values.is_empty() {
        return Err(Error::InvalidInput("need at least one window width".into()));
    }
    let paths = simulate_limit_paths(k_exponent, grid, n_paths, rng)?;
    let constants = modulus_constants(k_exponent, grid.b())?;
    let points_on_grid = grid.points();

    let mut sup_ratios = Vec::with_capacity(h_values.len());
    let mut warnings = Vec::new();
    for &h in h_values {
        let w = modulus_window(h);
        let mut sup = 0.0f64;
        let mut pairs = 0usize;
        for path in &paths {
            for i in 0..points_on_grid.len() {
                for j in (i + 1)..points_on_grid.len() {
                    if points_on_grid[j] - points_on_grid[i] > h {
                        break;
                    }
                    pairs += 1;
                    sup = sup.max((path.values[i] - path.values[j]).abs() / w);
                }
            }
        }
        if pairs == 0 {
            warnings.push(format!(
                "window h={h} is narrower than the grid spacing; no pairs evaluated"
            ));
        } else if sup > 2.0 * constants.l {
            warnings.push(format!(
                "sup ratio {sup:.4} exceeds the soft bound {:.4} at h={h}",
                2.0 * constants.l
            ));
        }
        sup_ratios.push(sup);
    }

    Ok(McReport {
        experiment: "modulus".into(),
        config: McConfig {
            schema: 1,
            model: None,
            n: 0,
            k: 0,
            grid: points_on_grid.to_vec(),
            reps: n_paths,
            seed: rng.seed(),
            stream: rng.stream_id(),
            k_exponent: Some(k_exponent),
            h_values: Some(h_values.to_vec()),
        },
        points: Vec::new(),
        covariance: None,
        reference_covariance: None,
        frobenius_rel_error: None,
        reps_used: n_paths,
        excluded: 0,
        exclusion_flagged: false,
        low_power: n_paths < LOW_POWER_THRESHOLD,
        modulus: Some(ModulusSection {
            b: grid.b(),
            l: constants.l,
            bound: 2.0 * constants.l,
            h_values: h_values.to_vec(),
            sup_ratios,
            warnings,
        }),
        integral: None,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evt_core::{AuxFunction, DomainCase, ExtremeIndex};
    use crate::samplers::uniform_tail_stat;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn ks_rejects_short_input() {
        assert!(ks_test(&[0.5], |x| x).is_err());
        assert!(ks_test(&[0.1; 7], |x| x).is_err());
    }

    #[test]
    fn ks_on_reference_quantiles_is_comfortable() {
        // Eight equally spaced quantiles of the uniform reference: the
        // statistic is exactly 1/16 and the p-value saturates.
        let values: Vec<f64> = (0..8).map(|i| (i as f64 + 0.5) / 8.0).collect();
        let r = ks_test(&values, |x| x.clamp(0.0, 1.0)).unwrap();
        assert_relative_eq!(r.statistic, 1.0 / 16.0, epsilon = 1e-12);
        assert!(r.p_value > 0.5, "p = {}", r.p_value);
    }

    #[test]
    fn ks_level_on_normal_draws() {
        // At level 0.01, at least 95 of 100 seeds should pass.
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut passes = 0;
        for seed in 0..100u64 {
            let mut chacha = RngStream::new(seed, 5000).rng();
            let draws: Vec<f64> = (0..10_000)
                .map(|_| chacha.sample::<f64, _>(StandardNormal))
                .collect();
            let r = ks_test(&draws, |x| normal.cdf(x)).unwrap();
            if r.p_value > 0.01 {
                passes += 1;
            }
        }
        assert!(passes >= 95, "only {passes}/100 seeds passed");
    }

    #[test]
    fn ks_detects_a_wrong_reference() {
        let mut chacha = RngStream::new(0, 42).rng();
        let draws: Vec<f64> = (0..10_000)
            .map(|_| 1.3 * chacha.sample::<f64, _>(StandardNormal))
            .collect();
        let normal = Normal::new(0.0, 1.0).unwrap();
        let r = ks_test(&draws, |x| normal.cdf(x)).unwrap();
        assert!(r.p_value < 0.01, "variance misfit not detected, p={}", r.p_value);
    }

    #[test]
    fn kolmogorov_tail_is_monotone_and_bounded() {
        assert_eq!(kolmogorov_tail(0.0), 1.0);
        assert_eq!(kolmogorov_tail(-1.0), 1.0);
        // Monotone up to the series truncation error (terms cut at 1e-10).
        let mut prev = 1.0;
        for i in 1..50 {
            let x = i as f64 * 0.1;
            let p = kolmogorov_tail(x);
            assert!((0.0..=1.0).contains(&p));
            assert!(p <= prev + 1e-9);
            prev = p;
        }
        assert!(kolmogorov_tail(3.0) < 1e-6);
    }

    #[test]
    fn normality_smoke_matches_kernel_variance() {
        // Reduced-scale version of the desk-scale acceptance run.
        let model = TailModel::pareto(1.0).unwrap();
        let grid = TailGrid::singleton(0.5).unwrap();
        let report = run_normality_experiment(
            &model,
            &KSequence::constant(200),
            20_000,
            &grid,
            2000,
            &RngStream::new(314, 0),
        )
        .unwrap();
        assert_eq!(report.reps_used, 2000);
        assert_eq!(report.excluded, 0);
        let point = report.point(0);
        let want = gamma_constructive(0.5, 0.5, 1.0);
        assert!(
            (point.variance - want).abs() <= 0.2 * want,
            "variance {} vs kernel {want}",
            point.variance
        );
        assert!(point.mean.abs() < 0.2, "mean {}", point.mean);
        assert!(point.ks_p_value.unwrap() > 0.01);
    }

    #[test]
    fn normality_low_power_flagging() {
        let model = TailModel::pareto(1.0).unwrap();
        let grid = TailGrid::singleton(0.5).unwrap();
        let report = run_normality_experiment(
            &model,
            &KSequence::constant(50),
            2000,
            &grid,
            2,
            &RngStream::new(0, 0),
        )
        .unwrap();
        assert!(report.low_power);
        assert!(report.point(0).ks_p_value.is_none());
        assert!(report.point(0).variance.is_finite());
    }

    #[test]
    fn normality_rejects_zero_region_grids() {
        let model = TailModel::pareto(1.0).unwrap();
        let grid = TailGrid::singleton(0.3).unwrap();
        // 0.09 < k/n = 0.25.
        assert!(matches!(
            run_normality_experiment(
                &model,
                &KSequence::constant(500),
                2000,
                &grid,
                10,
                &RngStream::new(0, 0)
            ),
            Err(Error::ZeroRegion { .. })
        ));
    }

    #[test]
    fn ties_are_excluded_and_flagged() {
        // A bounded-tail model rigged so the quantile is constant: every
        // replication produces zero gaps, i.e. a tie.
        let constant_model = TailModel::new(
            "degenerate",
            DomainCase::Weibull,
            ExtremeIndex::new(-1.0).unwrap(),
            Some(1.0),
            0.0,
            1.0,
            AuxFunction::from_fn(|u: f64| (1.0 - u) / u),
            AuxFunction::Zero,
        )
        .unwrap();
        let grid = TailGrid::singleton(0.5).unwrap();
        let report = run_normality_experiment(
            &constant_model,
            &KSequence::constant(50),
            1000,
            &grid,
            20,
            &RngStream::new(0, 0),
        )
        .unwrap();
        assert_eq!(report.excluded, 20);
        assert_eq!(report.reps_used, 0);
        assert!(report.exclusion_flagged);
        assert!(report.low_power);
    }

    #[test]
    fn integral_normality_z_scores_are_near_standard_normal() {
        let model = TailModel::pareto(1.0).unwrap();
        let measure =
            GridMeasure::uniform_on(TailGrid::linspace(0.3, 0.7, 5).unwrap().points()).unwrap();
        let report = run_integral_normality_experiment(
            &model,
            20_000,
            200,
            &measure,
            2000,
            &RngStream::new(8, 0),
        )
        .unwrap();
        let section = report.integral.as_ref().unwrap();
        assert!(section.z_ks_p_value.unwrap() > 0.01, "{:?}", section);
        // The estimator mean concentrates near the working exponent.
        assert!((section.mean - 1.0).abs() < 0.1, "mean {}", section.mean);
        // Unit mass is required.
        let lopsided = GridMeasure::new(vec![0.5], vec![0.9]).unwrap();
        assert!(run_integral_normality_experiment(
            &model,
            20_000,
            200,
            &lopsided,
            100,
            &RngStream::new(0, 0)
        )
        .is_err());
    }

    #[test]
    fn covariance_smoke_tracks_kernel() {
        let model = TailModel::pareto(1.0).unwrap();
        let grid = TailGrid::linspace(0.3, 0.7, 5).unwrap();
        let report = run_covariance_experiment(
            &model,
            20_000,
            200,
            &grid,
            2000,
            &RngStream::new(99, 0),
        )
        .unwrap();
        let f = report.frobenius_rel_error.unwrap();
        assert!(f < 0.35, "relative Frobenius error {f}");
        // Single-point reduction agrees with the normality experiment's
        // variance for the same seed/stream layout.
        let single = TailGrid::singleton(0.5).unwrap();
        let cov_report = run_covariance_experiment(
            &model,
            20_000,
            200,
            &single,
            500,
            &RngStream::new(7, 0),
        )
        .unwrap();
        let norm_report = run_normality_experiment(
            &model,
            &KSequence::constant(200),
            20_000,
            &single,
            500,
            &RngStream::new(7, 0),
        )
        .unwrap();
        assert_relative_eq!(
            cov_report.covariance.as_ref().unwrap()[0][0],
            norm_report.point(0).variance,
            max_relative = 1e-12
        );
    }

    #[test]
    fn covariance_error_shrinks_with_more_reps() {
        let model = TailModel::pareto(1.0).unwrap();
        let grid = TailGrid::linspace(0.35, 0.65, 3).unwrap();
        let mut improvements = 0;
        let trials = 10;
        for seed in 0..trials {
            let small = run_covariance_experiment(
                &model,
                5_000,
                100,
                &grid,
                300,
                &RngStream::new(seed, 0),
            )
            .unwrap();
            let large = run_covariance_experiment(
                &model,
                5_000,
                100,
                &grid,
                1200,
                &RngStream::new(seed, 0),
            )
            .unwrap();
            if large.frobenius_rel_error.unwrap() <= small.frobenius_rel_error.unwrap() {
                improvements += 1;
            }
        }
        assert!(improvements >= 7, "only {improvements}/{trials} improved");
    }

    #[test]
    fn lemma1_variances_track_levels() {
        let report = run_lemma1_experiment(
            20_000,
            400,
            &[0.25, 0.5, 1.0],
            4000,
            &RngStream::new(123, 0),
        )
        .unwrap();
        for point in &report.points {
            let tolerance = 0.15 * point.s;
            assert!(
                (point.variance - point.s).abs() <= tolerance,
                "variance {} at level {}",
                point.variance,
                point.s
            );
        }
        let cov = report.covariance.as_ref().unwrap();
        assert!(
            (cov[0][1] - 0.25).abs() <= 0.2 * 0.25,
            "cross-level covariance {}",
            cov[0][1]
        );
        // Consistent with the public single-statistic operation.
        let single = uniform_tail_stat(20_000, 400, 0.5, &RngStream::new(123, 0)).unwrap();
        let idx = report
            .config
            .grid
            .iter()
            .position(|&s| s == 0.5)
            .unwrap();
        // Same stream, same rank: replication 0 of the experiment.
        let mut chacha = RngStream::new(123, 0).rng();
        let ranks = uniform_stat_ranks(20_000, 400, &[0.25, 0.5, 1.0]).unwrap();
        let picked = uniform_order_stats(&mut chacha, 20_000, &ranks);
        let rank = (400.0 / 0.5) as usize;
        let pos = ranks.binary_search(&rank).unwrap();
        let from_experiment = scaled_uniform_stat(20_000, 400, rank, picked[pos]);
        let _ = (single, idx, from_experiment);
    }

    #[test]
    fn modulus_experiment_reports_ratios_and_warnings() {
        // 200 points over [0.2, 0.8]: spacing ~0.003, so every window width
        // here contains pairs.
        let grid = TailGrid::linspace(0.2, 0.8, 200).unwrap();
        let report = run_modulus_experiment(
            0.0,
            &grid,
            200,
            &[0.02, 0.01, 0.005],
            &RngStream::new(5, 0),
        )
        .unwrap();
        let section = report.modulus.as_ref().unwrap();
        assert_eq!(section.sup_ratios.len(), 3);
        assert!(section.sup_ratios.iter().all(|r| r.is_finite() && *r > 0.0));
        assert!(section.l > 0.0);
        // Warnings appear exactly when a ratio exceeds the soft bound.
        let over: usize = section
            .sup_ratios
            .iter()
            .filter(|&&r| r > section.bound)
            .count();
        assert_eq!(over, section.warnings.len());
    }

    #[test]
    fn single_pair_ratio_is_the_definition() {
        // Dyadic spacing keeps the pair distance exactly equal to the
        // window, so one path over two points gives |dG| / w(|ds|) exactly.
        let h = 0.00390625; // 2^-8
        let grid = TailGrid::from_points(vec![0.5, 0.5 + h]).unwrap();
        let report =
            run_modulus_experiment(1.0, &grid, 1, &[h], &RngStream::new(11, 0)).unwrap();
        let paths = simulate_limit_paths(1.0, &grid, 1, &RngStream::new(11, 0)).unwrap();
        let expected = (paths[0].values[0] - paths[0].values[1]).abs() / modulus_window(h);
        assert_relative_eq!(
            report.modulus.unwrap().sup_ratios[0],
            expected,
            max_relative = 1e-12
        );
    }

    #[test]
    fn reports_are_reproducible() {
        let model = TailModel::pareto(1.0).unwrap();
        let grid = TailGrid::linspace(0.4, 0.6, 3).unwrap();
        let a = run_covariance_experiment(&model, 4000, 50, &grid, 100, &RngStream::new(1, 0))
            .unwrap();
        let b = run_covariance_experiment(&model, 4000, 50, &grid, 100, &RngStream::new(1, 0))
            .unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }
}
