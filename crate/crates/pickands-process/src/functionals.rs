//! Integral estimators over finitely supported measures and their
//! asymptotic variance.
//!
//! A unit-mass measure `m` on levels inside `(0, 1)` turns the pointwise
//! estimator into `I_n = int P_n(s) dm(s)`, still consistent for the working
//! exponent, with asymptotic variance `sigma_m^2 = int int Gamma(s,t) dm dm`
//! under `sqrt(k)` scaling. Only finitely supported measures are
//! represented; a continuous density is mapped onto one by the caller
//! through a quadrature rule ([`GridMeasure::midpoint`]) — the estimator is
//! piecewise constant between rank jumps, so higher-order quadrature buys
//! nothing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evt_core::SortedSample;
use crate::limit_gaussian::CovarianceKernel;
use crate::pickands::pickands_point;

/// A finitely supported signed measure on levels in `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeasure {
    support: Vec<f64>,
    weights: Vec<f64>,
}

impl GridMeasure {
    /// Support points must be strictly increasing inside `(0, 1)`; weights
    /// may be signed but must be finite.
    pub fn new(support: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidInput("measure needs support points".into()));
        }
        if support.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "support ({}) and weights ({}) lengths differ",
                support.len(),
                weights.len()
            )));
        }
        if support.iter().any(|&s| !(0.0 < s && s < 1.0)) {
            return Err(Error::InvalidInput(
                "support points must lie in (0, 1)".into(),
            ));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "support points must be strictly increasing (distinct)".into(),
            ));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidInput("weights must be finite".into()));
        }
        Ok(Self { support, weights })
    }

    /// Point mass at `s`.
    pub fn dirac(s: f64) -> Result<Self> {
        Self::new(vec![s], vec![1.0])
    }

    /// Equal weights `1/m` on the given points (unit mass).
    pub fn uniform_on(points: &[f64]) -> Result<Self> {
        let w = 1.0 / points.len() as f64;
        Self::new(points.to_vec(), vec![w; points.len()])
    }

    /// Midpoint quadrature of the uniform unit-mass density on `[a, b]`.
    pub fn midpoint(a: f64, b: f64, m: usize) -> Result<Self> {
        if !(0.0 < a && a < b && b < 1.0) {
            return Err(Error::InvalidInput(format!(
                "quadrature interval must satisfy 0 < a < b < 1, got [{a}, {b}]"
            )));
        }
        if m == 0 {
            return Err(Error::InvalidInput("quadrature needs at least one point".into()));
        }
        let step = (b - a) / m as f64;
        let support: Vec<f64> = (0..m).map(|i| a + (i as f64 + 0.5) * step).collect();
        let weights = vec![1.0 / m as f64; m];
        Self::new(support, weights)
    }

    /// Parse the on-disk form `{"support": [...], "weights": [...]}`.
    pub fn from_json(json: &str) -> Result<Self> {
        let raw: GridMeasure = serde_json::from_str(json)?;
        Self::new(raw.support, raw.weights)
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Scale every weight by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.support.clone(),
            self.weights.iter().map(|w| c * w).collect(),
        )
    }

    /// Union of two measures with disjoint supports.
    pub fn union_disjoint(&self, other: &Self) -> Result<Self> {
        let mut pairs: Vec<(f64, f64)> = self
            .support
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
            .chain(other.support.iter().copied().zip(other.weights.iter().copied()))
            .collect();
        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        Self::new(
            pairs.iter().map(|p| p.0).collect(),
            pairs.iter().map(|p| p.1).collect(),
        )
    }
}

/// `I_n = sum_i w_i P_n(s_i)`.
///
/// Every support point must satisfy `s^2 >= k/n`: below that threshold the
/// estimator is zero by convention, and integrating the convention would
/// silently bias the estimate, so it is an error instead. Degenerate points
/// propagate their tie errors.
pub fn integral_estimator(
    sample: &SortedSample,
    k: usize,
    measure: &GridMeasure,
) -> Result<f64> {
    let n = sample.n();
    for &s in measure.support() {
        if s * s < k as f64 / n as f64 {
            return Err(Error::ZeroRegion { s, k, n });
        }
    }
    let mut total = 0.0;
    for (&s, &w) in measure.support().iter().zip(measure.weights()) {
        total += w * pickands_point(sample, k, s)?;
    }
    Ok(total)
}

/// Asymptotic variance `sigma_m^2 = sum_i sum_j w_i w_j Gamma(s_i, s_j)`.
pub fn sigma2(measure: &GridMeasure, kernel: &CovarianceKernel) -> f64 {
    let mut total = 0.0;
    for (&si, &wi) in measure.support().iter().zip(measure.weights()) {
        for (&sj, &wj) in measure.support().iter().zip(measure.weights()) {
            total += wi * wj * kernel.eval(si, sj);
        }
    }
    total
}

/// Integral estimate with its large-sample standard error.
#[derive(Debug, Clone, Serialize)]
pub struct NormalizedEstimate {
    pub estimate: f64,
    pub std_error: f64,
    /// `(I_n - K) sqrt(k) / sigma_m`, present when a reference exponent is
    /// supplied (Monte Carlo use).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
}

/// Estimate, standard error `sqrt(sigma_m^2 / k)`, and optionally the
/// z-score against a reference exponent. The measure must have unit mass —
/// that is what makes the estimator consistent for the exponent.
pub fn normalized_estimate(
    sample: &SortedSample,
    k: usize,
    measure: &GridMeasure,
    kernel: &CovarianceKernel,
    reference: Option<f64>,
) -> Result<NormalizedEstimate> {
    let mass = measure.total_mass();
    if (mass - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "measure must have unit mass, got {mass}"
        )));
    }
    let estimate = integral_estimator(sample, k, measure)?;
    let variance = sigma2(measure, kernel);
    let std_error = (variance / k as f64).sqrt();
    let z = reference.map(|k_ref| (estimate - k_ref) * (k as f64).sqrt() / variance.sqrt());
    Ok(NormalizedEstimate {
        estimate,
        std_error,
        z,
    })
}
