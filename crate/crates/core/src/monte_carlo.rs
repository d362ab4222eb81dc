//! Ground-truth estimation of the end metrics by direct simulation of the
//! link, plus numerical verification of the ratio-of-expectations
//! approximation used by [`crate::closed_form_metrics`].
//!
//! # Determinism contract
//!
//! Trial `i` draws everything it needs from the dedicated substream
//! `trial_rng(seed, i)`, in a fixed order:
//!
//! 1. the channel `h` (consumes nothing for a deterministic prior),
//! 2. the training noise, one circular-Gaussian draw per slot,
//! 3. the data symbol index,
//! 4. the data noise.
//!
//! Operations that need only a prefix of that list stop early; the
//! clairvoyant error-rate loop consumes the training noise it does not use so
//! that all operations see identical `(h, noise, symbol)` realizations at the
//! same `(seed, trial)` — comparisons between estimators are then paired,
//! which sharpens every A-vs-B test. Trials are processed in fixed-size
//! chunks; each chunk is accumulated sequentially and chunk partials are
//! folded in chunk order, so results are bit-identical for any worker-thread
//! count (the chunks are what Rayon distributes).
//!
//! # Trimming
//!
//! The scenario's `trim_lambda` governs the estimate trimming inside every
//! trial loop here (an estimator's own stamp is a convenience for
//! [`crate::estimators::LinearEstimator::apply`]). Metrics that invert the
//! estimate refuse to run untrimmed: without the magnitude floor the
//! zero-forcing inverse `1/|h_hat|^2` has an infinite second moment and the
//! sample mean never converges.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{trim_estimate, LinearEstimator};
use crate::receivers::ml_detect;
use crate::rng::trial_rng;
use crate::signal_model::{circular_gaussian, Scenario};

/// Trial-count, seeding, and chunking knobs for one Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    /// Number of independent trials.
    pub n_trials: u64,
    /// Base seed; trial `i` uses the substream `(seed, i)`.
    pub seed: u64,
    /// Trials per work chunk. Affects scheduling granularity only, never
    /// results.
    pub chunk_size: u64,
    /// Magnitude floor for the *true* channel in the excess-MSE reference
    /// receiver; `None` reuses the scenario's `trim_lambda`.
    pub h_regularization_lambda: Option<f64>,
}

impl McConfig {
    /// Default trials-per-chunk: large enough to amortize scheduling, small
    /// enough to parallelize million-trial runs.
    pub const DEFAULT_CHUNK_SIZE: u64 = 65_536;

    /// Config with the default chunk size and no separate h-regularization.
    pub fn new(n_trials: u64, seed: u64) -> Self {
        Self {
            n_trials,
            seed,
            chunk_size: Self::DEFAULT_CHUNK_SIZE,
            h_regularization_lambda: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::InvalidArgument(
                "monte carlo: n_trials must be >= 1".into(),
            ));
        }
        if self.chunk_size == 0 {
            return Err(Error::InvalidArgument(
                "monte carlo: chunk_size must be >= 1".into(),
            ));
        }
        if let Some(lambda) = self.h_regularization_lambda {
            if !lambda.is_finite() || lambda < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "monte carlo: h_regularization_lambda must be finite and >= 0, got {lambda}"
                )));
            }
        }
        Ok(())
    }
}

/// A Monte Carlo point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McResult {
    /// Sample mean over all trials.
    pub mean: f64,
    /// Standard error of the mean (sample std / sqrt(n); binomial for error
    /// rates).
    pub std_error: f64,
    /// Number of trials behind the estimate.
    pub n: u64,
}

/// Both sides of the sample-level bound justifying the ratio-of-expectations
/// approximation, from [`moment_ratio_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRatioReport {
    /// `|mean(X/Y) - mean(X)/mean(Y)|` — the approximation gap.
    pub lhs: f64,
    /// `lambda^-4 * mean(|X * mean(Y) - Y * mean(X)|)` — the bound.
    pub rhs: f64,
    /// `mean(X)/mean(Y)`, the zeroth-order value the gap is measured against.
    pub ratio_of_means: f64,
    /// Whether `lhs <= rhs` (up to rounding slack). The bound is an algebraic
    /// consequence of `Y >= lambda^2`, so this should always be true.
    pub holds: bool,
}

/// One threshold of a [`tail_mass_check`] sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailMassPoint {
    /// Trim threshold `lambda`.
    pub lambda: f64,
    /// Empirical `Pr{ |f^H y_tr| <= lambda }`.
    pub probability: f64,
}

/// Empirical near-zero mass of the raw estimate across a threshold grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TailMassReport {
    /// One probability per requested threshold, in grid order.
    pub points: Vec<TailMassPoint>,
    /// Least-squares slope of `ln p` against `ln lambda` over the points with
    /// nonzero mass; `NaN` when fewer than two such points exist. A smooth
    /// estimate density near zero gives a slope of 2.
    pub slope: f64,
}

// ── Chunked deterministic runner ────────────────────────────────────────────

/// Map fixed trial-index chunks to partial accumulators in parallel. The
/// chunk boundaries depend only on the config, and the returned partials are
/// in chunk order, so any later in-order fold is reproducible for every
/// worker count.
fn chunk_partials<A, F>(mc: &McConfig, chunk_fold: F) -> Vec<A>
where
    A: Send,
    F: Fn(std::ops::Range<u64>) -> A + Sync,
{
    let n_chunks = mc.n_trials.div_ceil(mc.chunk_size);
    (0..usize::try_from(n_chunks).expect("chunk count fits in usize"))
        .into_par_iter()
        .map(|c| {
            let start = c as u64 * mc.chunk_size;
            let end = (start + mc.chunk_size).min(mc.n_trials);
            chunk_fold(start..end)
        })
        .collect()
}

/// Mean and standard error of a per-trial statistic.
fn run_mean<F>(mc: &McConfig, sample: F) -> McResult
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let partials = chunk_partials(mc, |range| {
        let (mut sum, mut sum_sq) = (0.0_f64, 0.0_f64);
        for i in range {
            let mut rng = trial_rng(mc.seed, i);
            let v = sample(&mut rng);
            sum += v;
            sum_sq += v * v;
        }
        (sum, sum_sq)
    });
    let (mut sum, mut sum_sq) = (0.0_f64, 0.0_f64);
    for (s, s2) in partials {
        sum += s;
        sum_sq += s2;
    }
    let n = mc.n_trials as f64;
    let mean = sum / n;
    let std_error = if mc.n_trials > 1 {
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    McResult { mean, std_error, n: mc.n_trials }
}

/// Error-rate estimate from a per-trial error indicator, with binomial
/// standard error.
fn run_error_rate<F>(mc: &McConfig, is_error: F) -> McResult
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    let partials = chunk_partials(mc, |range| {
        let mut errors = 0u64;
        for i in range {
            let mut rng = trial_rng(mc.seed, i);
            errors += u64::from(is_error(&mut rng));
        }
        errors
    });
    let errors: u64 = partials.into_iter().sum();
    let n = mc.n_trials as f64;
    let p = errors as f64 / n;
    McResult {
        mean: p,
        std_error: (p * (1.0 - p) / n).sqrt(),
        n: mc.n_trials,
    }
}

fn check_filter_length(scenario: &Scenario, estimator: &LinearEstimator) -> Result<()> {
    if estimator.filter().len() != scenario.training.len() {
        return Err(Error::InvalidArgument(format!(
            "filter length {} does not match training block length {}",
            estimator.filter().len(),
            scenario.training.len()
        )));
    }
    Ok(())
}

/// Raw (untrimmed) estimate for one trial: `f^H (h x_tr + w_tr)`, drawing the
/// training noise slot by slot.
#[inline]
fn raw_estimate<R: Rng + ?Sized>(
    filter: &[Complex64],
    symbols: &[Complex64],
    h: Complex64,
    sigma_w2: f64,
    rng: &mut R,
) -> Complex64 {
    let mut acc = Complex64::ZERO;
    for (&fk, &xk) in filter.iter().zip(symbols) {
        let w = circular_gaussian(sigma_w2, rng);
        acc += fk.conj() * (h * xk + w);
    }
    acc
}

// ── True metrics ────────────────────────────────────────────────────────────

/// Simulated symbol-estimate MSE `E|c(h_hat) y - x|^2` for the zero-forcing
/// receiver `c(h_hat) = 1/trim(h_hat, lambda)`.
///
/// Refuses to run with `trim_lambda = 0`: the untrimmed inverse has an
/// infinite second moment, so the sample mean would not converge to anything.
pub fn true_mse_x(
    scenario: &Scenario,
    estimator: &LinearEstimator,
    mc: &McConfig,
) -> Result<McResult> {
    mc.validate()?;
    check_filter_length(scenario, estimator)?;
    if scenario.trim_lambda <= 0.0 {
        return Err(Error::InfiniteMoment("true_mse_x"));
    }
    let filter = estimator.filter();
    let symbols = scenario.training.symbols();
    let sigma_w2 = scenario.noise_power;
    let lambda = scenario.trim_lambda;
    Ok(run_mean(mc, |rng| {
        let h = scenario.prior.sample(rng);
        let h_hat = trim_estimate(raw_estimate(filter, symbols, h, sigma_w2, rng), lambda);
        let (_, x) = scenario.constellation.sample(rng);
        let y = h * x + circular_gaussian(sigma_w2, rng);
        (h_hat.inv() * y - x).norm_sqr()
    }))
}

/// Simulated excess MSE `E|c(h_hat) y - c(h) y|^2`: the penalty of equalizing
/// with the estimate instead of the true channel.
///
/// The reference receiver needs `1/h`, so for a random prior the true channel
/// is floored at `h_regularization_lambda` (defaulting to the scenario's
/// `trim_lambda`) by the same phase-preserving rule as the estimate; a
/// deterministic channel only needs to be nonzero after flooring.
pub fn true_mse_xe(
    scenario: &Scenario,
    estimator: &LinearEstimator,
    mc: &McConfig,
) -> Result<McResult> {
    mc.validate()?;
    check_filter_length(scenario, estimator)?;
    if scenario.trim_lambda <= 0.0 {
        return Err(Error::InfiniteMoment("true_mse_xe"));
    }
    let h_reg = mc.h_regularization_lambda.unwrap_or(scenario.trim_lambda);
    if scenario.prior.is_random() && h_reg <= 0.0 {
        return Err(Error::InfiniteMoment("true_mse_xe"));
    }
    if let crate::signal_model::ChannelPrior::Deterministic(h) = scenario.prior {
        if trim_estimate(h, h_reg) == Complex64::ZERO {
            return Err(Error::ZeroForcingSingular);
        }
    }
    let filter = estimator.filter();
    let symbols = scenario.training.symbols();
    let sigma_w2 = scenario.noise_power;
    let lambda = scenario.trim_lambda;
    Ok(run_mean(mc, |rng| {
        let h = scenario.prior.sample(rng);
        let h_hat = trim_estimate(raw_estimate(filter, symbols, h, sigma_w2, rng), lambda);
        let (_, x) = scenario.constellation.sample(rng);
        let y = h * x + circular_gaussian(sigma_w2, rng);
        let c_est = h_hat.inv();
        let c_ref = trim_estimate(h, h_reg).inv();
        (c_est * y - c_ref * y).norm_sqr()
    }))
}

/// Simulated symbol-error rate of maximum-likelihood detection with the
/// trimmed channel estimate.
///
/// Detection never inverts the estimate, so this runs even with
/// `trim_lambda = 0`.
pub fn true_pe(
    scenario: &Scenario,
    estimator: &LinearEstimator,
    mc: &McConfig,
) -> Result<McResult> {
    mc.validate()?;
    check_filter_length(scenario, estimator)?;
    let filter = estimator.filter();
    let symbols = scenario.training.symbols();
    let sigma_w2 = scenario.noise_power;
    let lambda = scenario.trim_lambda;
    Ok(run_error_rate(mc, |rng| {
        let h = scenario.prior.sample(rng);
        let h_hat = trim_estimate(raw_estimate(filter, symbols, h, sigma_w2, rng), lambda);
        let (index, x) = scenario.constellation.sample(rng);
        let y = h * x + circular_gaussian(sigma_w2, rng);
        ml_detect(h_hat, y, &scenario.constellation).index != index
    }))
}

/// Simulated symbol-error rate with perfect channel knowledge at the
/// receiver (`h_hat = h`, no trimming) — the clairvoyant floor every
/// estimator-driven curve sits above.
///
/// The training-noise draws are consumed (and discarded) so each trial sees
/// the same `(h, symbol, data noise)` as the estimator-driven loops at the
/// same `(seed, trial)`.
pub fn true_pe_clairvoyant(scenario: &Scenario, mc: &McConfig) -> Result<McResult> {
    mc.validate()?;
    let n_slots = scenario.training.len();
    let sigma_w2 = scenario.noise_power;
    Ok(run_error_rate(mc, |rng| {
        let h = scenario.prior.sample(rng);
        for _ in 0..n_slots {
            let _ = circular_gaussian(sigma_w2, rng);
        }
        let (index, x) = scenario.constellation.sample(rng);
        let y = h * x + circular_gaussian(sigma_w2, rng);
        ml_detect(h, y, &scenario.constellation).index != index
    }))
}

// ── Approximation diagnostics ───────────────────────────────────────────────

/// Check the sample-level bound behind the zeroth-order approximation.
///
/// With `X = |h_hat - h|^2` and `Y = |h_hat|^2` (trimmed estimate, so
/// `Y >= lambda^2`), the gap between "mean of the ratio" and "ratio of the
/// means" obeys
///
/// ```text
/// |mean(X/Y) - mean(X)/mean(Y)| <= lambda^-4 mean(|X mean(Y) - Y mean(X)|)
/// ```
///
/// identically on every sample. The report carries both sides; the right side
/// shrinks with the estimation error, which is the mechanism that makes the
/// closed forms accurate at high training SNR.
///
/// Runs two passes over the same substreams (means first, then the deviation
/// term), so memory stays O(1) in the trial count.
pub fn moment_ratio_check(
    scenario: &Scenario,
    estimator: &LinearEstimator,
    mc: &McConfig,
) -> Result<MomentRatioReport> {
    mc.validate()?;
    check_filter_length(scenario, estimator)?;
    if scenario.trim_lambda <= 0.0 {
        return Err(Error::InvalidArgument(
            "moment_ratio_check requires trim_lambda > 0: the bound divides by lambda^4"
                .into(),
        ));
    }
    let filter = estimator.filter();
    let symbols = scenario.training.symbols();
    let sigma_w2 = scenario.noise_power;
    let lambda = scenario.trim_lambda;
    let draw_xy = |rng: &mut ChaCha8Rng| {
        let h = scenario.prior.sample(rng);
        let h_hat = trim_estimate(raw_estimate(filter, symbols, h, sigma_w2, rng), lambda);
        ((h_hat - h).norm_sqr(), h_hat.norm_sqr())
    };

    let partials = chunk_partials(mc, |range| {
        let (mut sx, mut sy, mut sq) = (0.0_f64, 0.0_f64, 0.0_f64);
        for i in range {
            let mut rng = trial_rng(mc.seed, i);
            let (x, y) = draw_xy(&mut rng);
            sx += x;
            sy += y;
            sq += x / y;
        }
        (sx, sy, sq)
    });
    let (mut sx, mut sy, mut sq) = (0.0_f64, 0.0_f64, 0.0_f64);
    for (a, b, c) in partials {
        sx += a;
        sy += b;
        sq += c;
    }
    let n = mc.n_trials as f64;
    let (mean_x, mean_y, mean_ratio) = (sx / n, sy / n, sq / n);
    let ratio_of_means = mean_x / mean_y;

    // Second pass: the deviation term, against the means just computed.
    let partials = chunk_partials(mc, |range| {
        let mut dev = 0.0_f64;
        for i in range {
            let mut rng = trial_rng(mc.seed, i);
            let (x, y) = draw_xy(&mut rng);
            dev += (x * mean_y - y * mean_x).abs();
        }
        dev
    });
    let dev: f64 = {
        let mut acc = 0.0;
        for d in partials {
            acc += d;
        }
        acc
    };

    let lhs = (mean_ratio - ratio_of_means).abs();
    let rhs = dev / n / lambda.powi(4);
    Ok(MomentRatioReport {
        lhs,
        rhs,
        ratio_of_means,
        holds: lhs <= rhs * (1.0 + 1e-12) + f64::MIN_POSITIVE,
    })
}

/// Empirical probability that the *raw* estimate magnitude falls at or below
/// each threshold in `lambda_grid`, with a log-log slope fit.
///
/// The trimming analysis needs this mass to vanish quadratically (the raw
/// estimate has a smooth two-dimensional density near the origin, so
/// `Pr{|f^H y_tr| <= lambda}` scales like `lambda^2`); the fitted slope makes
/// that law measurable.
pub fn tail_mass_check(
    scenario: &Scenario,
    estimator: &LinearEstimator,
    lambda_grid: &[f64],
    mc: &McConfig,
) -> Result<TailMassReport> {
    mc.validate()?;
    check_filter_length(scenario, estimator)?;
    if lambda_grid.is_empty() {
        return Err(Error::InvalidArgument(
            "tail_mass_check: lambda_grid must be non-empty".into(),
        ));
    }
    if lambda_grid.iter().any(|l| !l.is_finite() || *l <= 0.0) {
        return Err(Error::InvalidArgument(
            "tail_mass_check: thresholds must be finite and > 0".into(),
        ));
    }
    if lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "tail_mass_check: thresholds must be strictly ascending".into(),
        ));
    }
    let filter = estimator.filter();
    let symbols = scenario.training.symbols();
    let sigma_w2 = scenario.noise_power;
    let thresholds_sq: Vec<f64> = lambda_grid.iter().map(|l| l * l).collect();

    let partials = chunk_partials(mc, |range| {
        let mut counts = vec![0u64; thresholds_sq.len()];
        for i in range {
            let mut rng = trial_rng(mc.seed, i);
            let h = scenario.prior.sample(&mut rng);
            let mag2 = raw_estimate(filter, symbols, h, sigma_w2, &mut rng).norm_sqr();
            for (count, &t2) in counts.iter_mut().zip(&thresholds_sq) {
                *count += u64::from(mag2 <= t2);
            }
        }
        counts
    });
    let mut counts = vec![0u64; thresholds_sq.len()];
    for partial in partials {
        for (total, c) in counts.iter_mut().zip(partial) {
            *total += c;
        }
    }

    let n = mc.n_trials as f64;
    let points: Vec<TailMassPoint> = lambda_grid
        .iter()
        .zip(&counts)
        .map(|(&lambda, &count)| TailMassPoint { lambda, probability: count as f64 / n })
        .collect();
    Ok(TailMassReport { slope: log_log_slope(&points), points })
}

/// Least-squares slope of `ln p` vs `ln lambda` over points with `p > 0`.
fn log_log_slope(points: &[TailMassPoint]) -> f64 {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.probability > 0.0)
        .map(|p| (p.lambda.ln(), p.probability.ln()))
        .collect();
    if logs.len() < 2 {
        return f64::NAN;
    }
    let n = logs.len() as f64;
    let mean_u = logs.iter().map(|(u, _)| u).sum::<f64>() / n;
    let mean_v = logs.iter().map(|(_, v)| v).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (u, v) in logs {
        num += (u - mean_u) * (v - mean_v);
        den += (u - mean_u) * (u - mean_u);
    }
    num / den
}

// ── Tests ───────────────────────────────────────────────────────────────────
