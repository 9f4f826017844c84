//! The estimator core: the tail-level process built from three order
//! statistics, its deterministic quantile analogue, and the centered
//! processes feeding the limit theory.
//!
//! For a level `s` in `(0, 1)` and base rank `k`, the estimator reads the
//! sample at the ranks-from-the-top `k`, `floor(k/s)` and `floor(k/s^2)` and
//! returns `log(gap ratio) / log(1/s)`. Below the threshold `s^2 >= k/n` the
//! process is 0 by convention. Rank collisions after flooring, repeated
//! values at the used ranks, and gaps of mixed sign raise a typed
//! [`Error::Tie`] instead of silently contributing zeros: degenerate points
//! must be visible to anything aggregating over replications.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evt_core::{ExtremeIndex, SortedSample, TailGrid, TailModel};
use crate::samplers::TailLevels;

// ---------------------------------------------------------------------------
// Order-statistic access
// ---------------------------------------------------------------------------

/// Read access to a sample's top order statistics (`j = 1` is the maximum).
pub(crate) trait TopOrderStats {
    fn sample_n(&self) -> usize;
    fn x_from_top(&self, j: usize) -> Option<f64>;
}

impl TopOrderStats for SortedSample {
    fn sample_n(&self) -> usize {
        self.n()
    }

    fn x_from_top(&self, j: usize) -> Option<f64> {
        self.from_top(j)
    }
}

impl TopOrderStats for TailLevels {
    fn sample_n(&self) -> usize {
        self.n()
    }

    fn x_from_top(&self, j: usize) -> Option<f64> {
        self.from_top(j)
    }
}

// ---------------------------------------------------------------------------
// Point evaluation
// ---------------------------------------------------------------------------

/// Ranks-from-the-top touched by the estimator at level `s`.
///
/// Also used by the harness to know which order statistics to sample.
pub(crate) fn tail_ranks(n: usize, k: usize, s: f64) -> Result<(usize, usize)> {
    let mid = (k as f64 / s).floor();
    let deep = (k as f64 / (s * s)).floor();
    if deep > n as f64 {
        return Err(Error::InvalidInput(format!(
            "rank floor(k/s^2) = {deep} exceeds the sample size {n}"
        )));
    }
    let (mid, deep) = (mid as usize, deep as usize);
    if mid == k {
        return Err(Error::Tie(format!(
            "level s={s} floors to the base rank (floor(k/s) = k = {k})"
        )));
    }
    if deep == mid {
        return Err(Error::Tie(format!(
            "levels collide (floor(k/s) = floor(k/s^2) = {mid} at s={s})"
        )));
    }
    Ok((mid, deep))
}

fn validate_point(n: usize, k: usize, s: f64) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "base rank k={k} must lie in [1, n={n}]"
        )));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidInput(format!(
            "level s must lie in (0, 1), got {s}"
        )));
    }
    Ok(())
}

/// `log(num/den) / log(1/s)` with the tie discipline applied to the gaps.
fn log_gap_ratio(num: f64, den: f64, s: f64) -> Result<f64> {
    if num == 0.0 || den == 0.0 {
        return Err(Error::Tie(
            "repeated values at the used tail levels (zero gap)".into(),
        ));
    }
    if (num > 0.0) != (den > 0.0) {
        return Err(Error::Tie("tail gaps have mixed signs".into()));
    }
    Ok((num / den).ln() / (1.0 / s).ln())
}

pub(crate) fn pickands_point_stats<T: TopOrderStats>(stats: &T, k: usize, s: f64) -> Result<f64> {
    let n = stats.sample_n();
    validate_point(n, k, s)?;
    if s * s < k as f64 / n as f64 {
        // Below the threshold the process is 0 by convention.
        return Ok(0.0);
    }
    let (mid, deep) = tail_ranks(n, k, s)?;
    let fetch = |j: usize| {
        stats.x_from_top(j).ok_or_else(|| {
            Error::InvalidInput(format!("order statistic {j} from the top unavailable"))
        })
    };
    let x_base = fetch(k)?;
    let x_mid = fetch(mid)?;
    let x_deep = fetch(deep)?;
    log_gap_ratio(x_base - x_mid, x_mid - x_deep, s)
}

/// Estimator at a single level.
pub fn pickands_point(sample: &SortedSample, k: usize, s: f64) -> Result<f64> {
    pickands_point_stats(sample, k, s)
}

/// Deterministic analogue of [`pickands_point`] with order statistics
/// replaced by the model's tail quantiles at `k/n`, `floor(k/s)/n` and
/// `floor(k/s^2)/n`. Both gaps are negative for increasing tails; their
/// ratio is positive, matching the sample version up to simultaneous
/// negation.
pub fn theoretical_pickands(model: &TailModel, n: usize, k: usize, s: f64) -> Result<f64> {
    validate_point(n, k, s)?;
    let (mid, deep) = tail_ranks(n, k, s)?;
    let q = |rank: usize| model.quantile_inclusive(rank as f64 / n as f64);
    let q_base = q(k);
    let q_mid = q(mid);
    let q_deep = q(deep);
    log_gap_ratio(q_mid - q_base, q_deep - q_mid, s)
}

pub(crate) fn kappa_star_point_stats<T: TopOrderStats>(
    stats: &T,
    k: usize,
    s: f64,
    k_exponent: f64,
) -> Result<f64> {
    let n = stats.sample_n();
    if s * s < k as f64 / n as f64 {
        return Err(Error::ZeroRegion { s, k, n });
    }
    let p = pickands_point_stats(stats, k, s)?;
    Ok((k as f64).sqrt() * (p - k_exponent))
}

// ---------------------------------------------------------------------------
// Paths over grids
// ---------------------------------------------------------------------------

/// Which process a path holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PathKind {
    #[serde(rename = "P_n")]
    Pickands,
    #[serde(rename = "p_n")]
    Theoretical,
    #[serde(rename = "kappa_n")]
    Kappa,
    #[serde(rename = "kappa_star")]
    KappaStar,
    #[serde(rename = "gaussian_limit")]
    GaussianLimit,
}

/// A per-point evaluation problem recorded instead of a value.
#[derive(Debug, Clone, Serialize)]
pub struct PointIssue {
    pub index: usize,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathMeta {
    pub n: usize,
    pub k: usize,
    pub kind: PathKind,
    /// Points whose value is a NaN sentinel, with the reason.
    pub issues: Vec<PointIssue>,
}

/// Process values over a grid. Failed points carry NaN and are listed in
/// `meta.issues`; they are never silently zero.
#[derive(Debug, Clone, Serialize)]
pub struct ProcessPath {
    pub grid: TailGrid,
    pub values: Vec<f64>,
    pub meta: PathMeta,
}

impl ProcessPath {
    pub fn is_clean(&self) -> bool {
        self.meta.issues.is_empty()
    }
}

fn path_over_grid<F: FnMut(f64) -> Result<f64>>(
    grid: &TailGrid,
    n: usize,
    k: usize,
    kind: PathKind,
    mut eval: F,
) -> ProcessPath {
    let mut values = Vec::with_capacity(grid.len());
    let mut issues = Vec::new();
    for (index, &s) in grid.points().iter().enumerate() {
        match eval(s) {
            Ok(v) => values.push(v),
            Err(e) => {
                values.push(f64::NAN);
                issues.push(PointIssue {
                    index,
                    message: e.to_string(),
                });
            }
        }
    }
    ProcessPath {
        grid: grid.clone(),
        values,
        meta: PathMeta { n, k, kind, issues },
    }
}

/// Estimator path over a grid; per-point failures become NaN annotations.
pub fn pickands_path(sample: &SortedSample, k: usize, grid: &TailGrid) -> ProcessPath {
    path_over_grid(grid, sample.n(), k, PathKind::Pickands, |s| {
        pickands_point_stats(sample, k, s)
    })
}

/// Deterministic quantile-analogue path.
pub fn theoretical_path(model: &TailModel, n: usize, k: usize, grid: &TailGrid) -> ProcessPath {
    path_over_grid(grid, n, k, PathKind::Theoretical, |s| {
        theoretical_pickands(model, n, k, s)
    })
}

/// Centered path `sqrt(k) (estimate - deterministic analogue)`.
///
/// Points below the zero-convention threshold are annotated rather than
/// centered: a conventional zero would corrupt downstream statistics.
pub fn kappa_path(
    sample: &SortedSample,
    model: &TailModel,
    k: usize,
    grid: &TailGrid,
) -> ProcessPath {
    let n = sample.n();
    path_over_grid(grid, n, k, PathKind::Kappa, |s| {
        if s * s < k as f64 / n as f64 {
            return Err(Error::ZeroRegion { s, k, n });
        }
        let p = pickands_point_stats(sample, k, s)?;
        let q = theoretical_pickands(model, n, k, s)?;
        Ok((k as f64).sqrt() * (p - q))
    })
}

/// Centered path `sqrt(k) (estimate - K(gamma))` against the constant limit.
pub fn kappa_star_path(
    sample: &SortedSample,
    gamma: ExtremeIndex,
    k: usize,
    grid: &TailGrid,
) -> ProcessPath {
    let k_exponent = gamma.k_of_gamma();
    path_over_grid(grid, sample.n(), k, PathKind::KappaStar, |s| {
        kappa_star_point_stats(sample, k, s, k_exponent)
    })
}
