//! Linear channel estimators `h_hat = f^H y_tr` and the trimming rule that
//! keeps zero-forcing receivers well-behaved.
//!
//! All filters here are collinear with the training block: `f = c * f_mvu`
//! with a real, positive `c`. The classical choices are the minimum-variance
//! unbiased filter (`c = 1`) and the Bayesian MMSE filter (`c < 1`). The
//! receiver-aware designs deliberately pick `c > 1`: inflating the estimate by
//! `1 + sigma_w2 / (sigma_x2 * h2)` minimizes the zeroth-order symbol-estimate
//! MSE of a zero-forcing receiver, where `h2` is the channel power the
//! designer can plug in — the exact `|h|^2`, the prior mean `E[|h|^2]`, or a
//! coarse assumed moment such as a uniform-box second moment. The same family
//! is exposed directly through [`bias_scaled_filter`] with an arbitrary bias
//! knob `alpha >= 0`, `c = 1 + alpha`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal_model::{Scenario, TrainingBlock};

// ── Types ───────────────────────────────────────────────────────────────────

/// A linear training filter together with the trim threshold it should be
/// used with.
#[derive(Debug, Clone)]
pub struct LinearEstimator {
    filter: Vec<Complex64>,
    label: String,
    trim_lambda: f64,
}

impl LinearEstimator {
    fn new(filter: Vec<Complex64>, label: impl Into<String>) -> Self {
        Self {
            filter,
            label: label.into(),
            trim_lambda: 0.0,
        }
    }

    /// Filter taps `f` (applied as `f^H y_tr`).
    pub fn filter(&self) -> &[Complex64] {
        &self.filter
    }

    /// Human-readable tag used in CSV output.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// Magnitude floor used by [`LinearEstimator::apply`]; `0` disables
    /// trimming.
    pub fn trim_lambda(&self) -> f64 {
        self.trim_lambda
    }

    /// Attach a trim threshold (returned estimator clamps `|h_hat| >= lambda`).
    pub fn with_trim_lambda(mut self, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "estimator: trim_lambda must be finite and >= 0, got {lambda}"
            )));
        }
        self.trim_lambda = lambda;
        Ok(self)
    }

    /// Replace the CSV label.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Training response `phi = f^H x_tr`. An unbiased filter has `phi = 1`.
    pub fn training_response(&self, training: &TrainingBlock) -> Complex64 {
        inner(&self.filter, training.symbols())
    }

    /// Squared filter norm `||f||^2`, which scales the estimation noise.
    pub fn norm2(&self) -> f64 {
        self.filter.iter().map(|f| f.norm_sqr()).sum()
    }

    /// Estimate and trim in one step: `trim(f^H y_tr, trim_lambda)`.
    pub fn apply(&self, y_tr: &[Complex64]) -> Result<Complex64> {
        let raw = estimate_channel(self, y_tr)?;
        Ok(trim_estimate(raw, self.trim_lambda))
    }
}

/// Which filter to build at a sweep point.
///
/// The three `OptZf*` variants share one formula and differ only in the
/// channel power plugged into the bias term: the exact `|h|^2` (known
/// channel), the prior mean `E[|h|^2]`, or an assumed second moment from a
/// coarse uniform-box model. `PerfectCsi` is not a training filter at all: it
/// hands the receiver the true `h` and exists as a Monte Carlo baseline.
#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorKind {
    /// Minimum-variance unbiased filter `f = x_tr / ||x_tr||^2`.
    Mvu,
    /// Bayesian MMSE filter for the channel-estimate error.
    Mmse,
    /// Receiver-optimal zero-forcing filter using the exact channel power.
    OptZfDc { channel_power: f64 },
    /// Receiver-optimal zero-forcing filter using the prior mean `E[|h|^2]`.
    OptZfRc,
    /// Receiver-optimal zero-forcing filter using an assumed (possibly
    /// mismatched) second moment, e.g. from a uniform-box model.
    OptZfUd { assumed_second_moment: f64 },
    /// Explicit bias knob: `f = (1 + alpha) * f_mvu`.
    BiasScaled { alpha: f64 },
    /// Clairvoyant baseline: the receiver is given the true channel.
    PerfectCsi,
}

impl EstimatorKind {
    /// CSV/config tag for this estimator.
    pub fn label(&self) -> String {
        match self {
            EstimatorKind::Mvu => "mvu".into(),
            EstimatorKind::Mmse => "mmse".into(),
            EstimatorKind::OptZfDc { .. } => "opt-dc".into(),
            EstimatorKind::OptZfRc => "opt-rc".into(),
            EstimatorKind::OptZfUd { .. } => "opt-ud".into(),
            EstimatorKind::BiasScaled { alpha } => format!("bias:{alpha}"),
            EstimatorKind::PerfectCsi => "perfect-csi".into(),
        }
    }

    /// Build the filter for `scenario`, stamping the scenario's trim
    /// threshold and this kind's label onto the result.
    ///
    /// `PerfectCsi` has no filter and is rejected; Monte Carlo callers handle
    /// it separately (see `monte_carlo::true_pe_clairvoyant`).
    pub fn build(&self, scenario: &Scenario) -> Result<LinearEstimator> {
        let training = &scenario.training;
        let sigma_x2 = scenario.constellation.symbol_power();
        let sigma_w2 = scenario.noise_power;
        let est = match *self {
            EstimatorKind::Mvu => mvu_filter(training),
            EstimatorKind::Mmse => {
                mmse_filter(training, scenario.prior.second_moment(), sigma_w2)?
            }
            EstimatorKind::OptZfDc { channel_power } => {
                opt_zf_filter(training, channel_power, sigma_x2, sigma_w2)?
            }
            EstimatorKind::OptZfRc => {
                opt_zf_filter(training, scenario.prior.second_moment(), sigma_x2, sigma_w2)?
            }
            EstimatorKind::OptZfUd { assumed_second_moment } => {
                opt_zf_filter(training, assumed_second_moment, sigma_x2, sigma_w2)?
            }
            EstimatorKind::BiasScaled { alpha } => bias_scaled_filter(training, alpha)?,
            EstimatorKind::PerfectCsi => {
                return Err(Error::InvalidArgument(
                    "perfect_csi is a clairvoyant baseline with no training filter".into(),
                ))
            }
        };
        est.with_label(self.label())
            .with_trim_lambda(scenario.trim_lambda)
    }
}

// ── Filter builders ─────────────────────────────────────────────────────────

/// Minimum-variance unbiased filter `f = x_tr / ||x_tr||^2` (`phi = 1`).
pub fn mvu_filter(training: &TrainingBlock) -> LinearEstimator {
    let energy = training.energy();
    let filter = training.symbols().iter().map(|&x| x / energy).collect();
    LinearEstimator::new(filter, "mvu")
}

/// Bayesian MMSE filter for the channel estimate itself:
/// `f = E[|h|^2] x_tr / (E[|h|^2] ||x_tr||^2 + sigma_w2)`.
///
/// Shrinks toward zero (`phi < 1`); as `sigma_w2 -> 0` it converges to the
/// MVU filter.
pub fn mmse_filter(
    training: &TrainingBlock,
    channel_second_moment: f64,
    noise_power: f64,
) -> Result<LinearEstimator> {
    if !channel_second_moment.is_finite() || channel_second_moment <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "mmse_filter: channel second moment must be > 0, got {channel_second_moment}"
        )));
    }
    if !noise_power.is_finite() || noise_power <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "mmse_filter: noise_power must be > 0, got {noise_power}"
        )));
    }
    let denom = channel_second_moment * training.energy() + noise_power;
    let filter = training
        .symbols()
        .iter()
        .map(|&x| x * (channel_second_moment / denom))
        .collect();
    Ok(LinearEstimator::new(filter, "mmse"))
}

/// Receiver-optimal zero-forcing filter
/// `f = (1 + sigma_w2 / (sigma_x2 * channel_power)) * f_mvu`.
///
/// The deliberate positive bias `phi = 1 + sigma_w2 / (sigma_x2 *
/// channel_power)` minimizes the zeroth-order symbol-estimate MSE of a
/// zero-forcing receiver; `channel_power` is whichever of `|h|^2`,
/// `E[|h|^2]`, or an assumed moment the designer has.
pub fn opt_zf_filter(
    training: &TrainingBlock,
    channel_power: f64,
    symbol_power: f64,
    noise_power: f64,
) -> Result<LinearEstimator> {
    if !channel_power.is_finite() || channel_power <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "opt_zf_filter: channel_power must be > 0, got {channel_power}"
        )));
    }
    if !symbol_power.is_finite() || symbol_power <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "opt_zf_filter: symbol_power must be > 0, got {symbol_power}"
        )));
    }
    if !noise_power.is_finite() || noise_power < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "opt_zf_filter: noise_power must be >= 0, got {noise_power}"
        )));
    }
    let alpha = noise_power / (symbol_power * channel_power);
    Ok(bias_scaled_filter(training, alpha)?.with_label("opt-zf"))
}

/// The bias family `f = (1 + alpha) * f_mvu`, `alpha >= 0`.
///
/// `alpha = 0` is the MVU filter; `alpha = sigma_w2 / (sigma_x2 * h2)`
/// reproduces [`opt_zf_filter`]. Exposing `alpha` directly lets experiments
/// treat the bias as a free tuning parameter.
pub fn bias_scaled_filter(training: &TrainingBlock, alpha: f64) -> Result<LinearEstimator> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "bias_scaled_filter: alpha must be finite and >= 0, got {alpha}"
        )));
    }
    let energy = training.energy();
    let scale = (1.0 + alpha) / energy;
    let filter = training.symbols().iter().map(|&x| x * scale).collect();
    Ok(LinearEstimator::new(filter, format!("bias({alpha})")))
}

// ── Estimation and trimming ─────────────────────────────────────────────────

/// Raw linear estimate `h_hat = f^H y_tr` (no trimming).
pub fn estimate_channel(est: &LinearEstimator, y_tr: &[Complex64]) -> Result<Complex64> {
    if est.filter.len() != y_tr.len() {
        return Err(Error::InvalidArgument(format!(
            "estimate_channel: filter length {} != observation length {}",
            est.filter.len(),
            y_tr.len()
        )));
    }
    Ok(inner(&est.filter, y_tr))
}

/// Clamp an estimate away from zero, preserving its phase:
///
/// * `|raw| > lambda` — returned unchanged;
/// * `0 < |raw| <= lambda` — scaled out to magnitude `lambda`;
/// * `raw = 0` — mapped to the real value `lambda`.
///
/// With `lambda > 0` the result always satisfies `|trim| >= lambda`, which is
/// what makes `E[1/|h_hat|^2]` (and hence every true zero-forcing metric)
/// finite.
pub fn trim_estimate(raw: Complex64, lambda: f64) -> Complex64 {
    let mag = raw.norm();
    if mag > lambda {
        raw
    } else if mag > 0.0 {
        raw * (lambda / mag)
    } else {
        Complex64::new(lambda, 0.0)
    }
}

/// Conjugated inner product `sum_k conj(a_k) b_k`.
pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(&ak, &bk)| ak.conj() * bk).sum()
}

// ── Tests ───────────────────────────────────────────────────────────────────
