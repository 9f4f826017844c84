//! Deterministic, stream-seeded sampling from tail models.
//!
//! Randomness is always addressed by a ([`seed`](RngStream::seed),
//! [`stream_id`](RngStream::stream_id)) pair mapped onto a counter-based
//! generator: the same pair reproduces the same draws byte-for-byte on any
//! platform and under any thread schedule, and distinct stream ids give
//! statistically independent streams. Monte Carlo replication `r` always
//! runs on stream id `base + r`, which is what makes parallel and serial
//! runs identical.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::evt_core::{SortedSample, TailModel};

/// Address of a reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Stream for replication `r` relative to this one.
    pub fn offset(&self, r: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id: self.stream_id.wrapping_add(r),
        }
    }

    pub(crate) fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// `n` uniforms on the open interval `(0, 1)`.
///
/// Each draw is `(x >> 11 + 1/2) * 2^-53` from a 64-bit word, which centers
/// the values away from both endpoints, so tail quantile evaluation stays
/// finite without any clamping.
pub(crate) fn uniforms_open(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    let mut words = vec![0u64; n];
    rng.fill(&mut words[..]);
    words
        .into_iter()
        .map(|x| ((x >> 11) as f64 + 0.5) * SCALE)
        .collect()
}

/// `n` i.i.d. draws from the model, sorted ascending; deterministic in `rng`.
pub fn sample_sorted(model: &TailModel, n: usize, rng: &RngStream) -> Result<SortedSample> {
    if n < 4 {
        return Err(Error::InvalidInput(format!(
            "estimation needs at least 4 observations, got n={n}"
        )));
    }
    let mut chacha = rng.rng();
    let uniforms = uniforms_open(&mut chacha, n);
    let values: Vec<f64> = uniforms
        .into_iter()
        .map(|u| model.quantile_inclusive(u))
        .collect();
    SortedSample::from_unsorted(values)
}

/// Smallest-`rank` order statistics of `n` fresh uniforms, for the given
/// 1-based ranks (ascending, distinct). Returned values align with `ranks`.
///
/// Selection is nested: partition at the largest rank first, then refine the
/// prefix, so the cost stays close to one pass over the sample instead of a
/// full sort.
pub(crate) fn uniform_order_stats(
    rng: &mut ChaCha8Rng,
    n: usize,
    ranks: &[usize],
) -> Vec<f64> {
    debug_assert!(!ranks.is_empty());
    debug_assert!(ranks.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(*ranks.last().unwrap() <= n);
    let mut u = uniforms_open(rng, n);
    let mut out = vec![0.0; ranks.len()];
    let mut upper = n;
    for (slot, &rank) in ranks.iter().enumerate().rev() {
        let (_, pivot, _) = u[..upper].select_nth_unstable_by(rank - 1, f64::total_cmp);
        out[slot] = *pivot;
        upper = rank;
    }
    out
}

/// Top order statistics of a model sample at the given ranks-from-the-top
/// (`j = 1` is the sample maximum). Distributionally identical to drawing
/// [`sample_sorted`] on the same stream and reading the same ranks.
#[derive(Debug, Clone)]
pub(crate) struct TailLevels {
    n: usize,
    ranks_from_top: Vec<usize>,
    values: Vec<f64>,
}

impl TailLevels {
    pub(crate) fn n(&self) -> usize {
        self.n
    }

    /// `j`-th largest observation if `j` is one of the sampled ranks.
    pub(crate) fn from_top(&self, j: usize) -> Option<f64> {
        self.ranks_from_top
            .binary_search(&j)
            .ok()
            .map(|i| self.values[i])
    }
}

/// Draw only the order statistics a tail estimator will touch.
///
/// `ranks_from_top` must be ascending and distinct. The `j`-th largest model
/// draw is the quantile transform of the `j`-th smallest uniform because the
/// tail quantile is non-increasing.
pub(crate) fn sample_tail_levels(
    model: &TailModel,
    n: usize,
    ranks_from_top: &[usize],
    rng: &RngStream,
) -> Result<TailLevels> {
    if n < 4 {
        return Err(Error::InvalidInput(format!(
            "estimation needs at least 4 observations, got n={n}"
        )));
    }
    if ranks_from_top.is_empty() || *ranks_from_top.last().unwrap() > n {
        return Err(Error::InvalidInput(
            "requested order-statistic ranks exceed the sample size".into(),
        ));
    }
    let mut chacha = rng.rng();
    let uniforms = uniform_order_stats(&mut chacha, n, ranks_from_top);
    let values: Vec<f64> = uniforms
        .into_iter()
        .map(|u| model.quantile_inclusive(u))
        .collect();
    Ok(TailLevels {
        n,
        ranks_from_top: ranks_from_top.to_vec(),
        values,
    })
}

/// One replication of the scaled uniform tail statistic
/// `sqrt(k) ((n / floor(k/s)) U_(floor(k/s), n) - 1)`.
///
/// Its variance over replications approaches `s`, and its covariance across
/// levels approaches `min(s, t)`, the scaling law checked by the
/// Monte Carlo harness.
pub fn uniform_tail_stat(n: usize, k: usize, s: f64, rng: &RngStream) -> Result<f64> {
    let ranks = uniform_stat_ranks(n, k, &[s])?;
    let mut chacha = rng.rng();
    let us = uniform_order_stats(&mut chacha, n, &ranks);
    Ok(scaled_uniform_stat(n, k, ranks[0], us[0]))
}

pub(crate) fn scaled_uniform_stat(n: usize, k: usize, rank: usize, u: f64) -> f64 {
    (k as f64).sqrt() * ((n as f64 / rank as f64) * u - 1.0)
}

/// Ranks `floor(k/s)` for a list of levels, validated against `[1, n]` and
/// returned sorted ascending and deduplicated.
pub(crate) fn uniform_stat_ranks(n: usize, k: usize, s_levels: &[f64]) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let mut ranks = Vec::with_capacity(s_levels.len());
    for &s in s_levels {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "level s must lie in (0, 1], got {s}"
            )));
        }
        let rank = (k as f64 / s).floor();
        if !(rank >= 1.0 && rank <= n as f64) {
            return Err(Error::InvalidInput(format!(
                "order-statistic rank floor(k/s) = {rank} out of range [1, {n}]"
            )));
        }
        ranks.push(rank as usize);
    }
    ranks.sort_unstable();
    ranks.dedup();
    Ok(ranks)
}
