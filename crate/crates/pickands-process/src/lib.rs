//! Tail-index estimation over a continuum of tail levels.
//!
//! The classical three-order-statistic estimator of the extreme value index
//! evaluates one ratio of tail quantile gaps. This crate treats the whole
//! family of such ratios, indexed by a level `s` in `(0, 1)`, as a stochastic
//! process and provides:
//!
//! - [`evt_core`]: tail models in quantile representation (heavy, bounded and
//!   light tails), sorted samples, evaluation grids, and the admissibility
//!   checks for rank sequences and model regularity;
//! - [`samplers`]: deterministic, stream-seeded inverse-transform sampling;
//! - [`pickands`]: the estimator process, its deterministic quantile
//!   analogue, and the centered processes used in the limit theory;
//! - [`limit_gaussian`]: the limiting Gaussian process — covariance kernels
//!   (constructive and closed-form variants), grid path simulation, and
//!   continuity-modulus constants;
//! - [`functionals`]: integral estimators over finitely supported measures
//!   and their asymptotic variance;
//! - [`optimizer`]: variance-minimizing measures on a fixed support grid;
//! - [`mc_harness`]: replication experiments that turn the asymptotic claims
//!   into desk-scale empirical checks with deterministic reports;
//! - [`cli`]: the `pickands` command-line entry point.
//!
//! Every randomized routine takes an explicit [`samplers::RngStream`] and is
//! reproducible byte-for-byte across runs and thread counts.
//!
//! See the crate `examples/` directory for one runnable example per major
//! capability.

pub mod cli;
pub mod error;
pub mod evt_core;
pub mod functionals;
pub mod limit_gaussian;
pub mod mc_harness;
pub mod optimizer;
pub mod pickands;
pub mod samplers;

pub use error::{Error, Result};
