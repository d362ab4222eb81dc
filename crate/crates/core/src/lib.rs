//! Simulation library for training-based channel estimation on a scalar
//! flat-fading AWGN link, organized around one question: which linear channel
//! estimator makes the *receiver* perform best?
//!
//! The link model is `y(n) = h x(n) + w(n)` for data and `y_tr = h x_tr + w_tr`
//! for a block of known training symbols. A linear estimator `h_hat = f^H y_tr`
//! feeds a zero-forcing or MMSE equalizer (or a maximum-likelihood detector),
//! and the quality of `f` is judged by end metrics: the symbol-estimate MSE,
//! the excess MSE over the clairvoyant equalizer, and the detection error
//! probability.
//!
//! The crate has two evaluation routes for every metric:
//!
//! * [`closed_form_metrics`] — closed-form approximations obtained by taking
//!   ratios of expectations, together with their Wirtinger gradient numerators.
//!   These are what the filter designs in [`estimators`] optimize.
//! * [`monte_carlo`] — ground-truth estimates of the same metrics by direct
//!   simulation of the link, with deterministic counter-based RNG substreams so
//!   results are reproducible for any worker-thread count.
//!
//! [`bench`] ties both routes into configurable SNR sweeps with CSV output and
//! ships the preset experiments exercised by the acceptance suite; the `chanest`
//! binary is a thin CLI over it.

pub mod bench;
pub mod closed_form_metrics;
pub mod error;
pub mod estimators;
pub mod monte_carlo;
pub mod receivers;
pub mod rng;
pub mod signal_model;

pub use error::{Error, Result};
pub use num_complex::Complex64;
