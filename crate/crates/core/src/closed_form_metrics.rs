//! Closed-form "zeroth order" performance metrics and their optimality
//! diagnostics.
//!
//! Every end metric of the link is the expectation of a ratio whose
//! denominator involves `|h_hat|^2`. The zeroth-order surrogate replaces that
//! expectation of a ratio by the ratio of expectations, which is accurate at
//! high training SNR once estimates are trimmed away from zero
//! ([`crate::monte_carlo::moment_ratio_check`] quantifies the gap
//! numerically). The payoff is a family of algebraic metric surrogates that
//! can be differentiated and minimized over the filter in closed form — these
//! are the objectives behind the designs in [`crate::estimators`].
//!
//! Every surrogate depends on the filter `f` only through two scalars: the
//! training response `phi = f^H x_tr` and the noise gain `||f||^2`, collected
//! in [`ZerothOrderInputs`] together with the channel moments and powers.
//! That structure is why the optimal filters are collinear with `x_tr`, and
//! why only the total training energy (never the pilot waveform) matters.
//!
//! Channel knowledge enters through two moments:
//!
//! * conditioned on a realized channel (`h2 = |h|^2`, `h4 = |h|^4`) — the
//!   "known channel" or deterministic variants;
//! * averaged over a random channel (`h2 = E[|h|^2]`, `h4 = E[|h|^4]`) — the
//!   prior-averaged variants. Only the excess-MSE metric reads `h4`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimators::{inner, LinearEstimator};
use crate::monte_carlo::McResult;
use crate::rng::trial_rng;
use crate::signal_model::{q, Scenario, TrainingBlock};

/// Scalar summary of a (filter, channel, powers) configuration — everything
/// the zeroth-order metrics depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZerothOrderInputs {
    phi: Complex64,
    f_norm2: f64,
    h2: f64,
    h4: f64,
    sigma_x2: f64,
    sigma_w2: f64,
}

impl ZerothOrderInputs {
    /// Validate and pack the metric inputs.
    ///
    /// `phi` is the filter's training response `f^H x_tr` and `f_norm2` its
    /// squared norm. `h2`/`h4` are either the realized `|h|^2`/`|h|^4` or the
    /// prior moments `E[|h|^2]`/`E[|h|^4]`; any distribution satisfies
    /// `h4 >= h2^2`, so that ordering is enforced (with a small relative
    /// slack for rounding in caller-computed moments).
    pub fn new(
        phi: Complex64,
        f_norm2: f64,
        h2: f64,
        h4: f64,
        sigma_x2: f64,
        sigma_w2: f64,
    ) -> Result<Self> {
        if !phi.re.is_finite() || !phi.im.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "zeroth-order inputs: training response must be finite, got {phi}"
            )));
        }
        if !f_norm2.is_finite() || f_norm2 <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "zeroth-order inputs: filter norm^2 must be finite and > 0, got {f_norm2}"
            )));
        }
        if !h2.is_finite() || h2 <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "zeroth-order inputs: channel power h2 must be finite and > 0, got {h2}"
            )));
        }
        if !h4.is_finite() || h4 < h2 * h2 * (1.0 - 1e-9) {
            return Err(Error::InvalidArgument(format!(
                "zeroth-order inputs: fourth moment must be finite and >= h2^2 \
                 (got h4 = {h4}, h2^2 = {})",
                h2 * h2
            )));
        }
        if !sigma_x2.is_finite() || sigma_x2 <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "zeroth-order inputs: symbol power must be finite and > 0, got {sigma_x2}"
            )));
        }
        if !sigma_w2.is_finite() || sigma_w2 < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "zeroth-order inputs: noise power must be finite and >= 0, got {sigma_w2}"
            )));
        }
        Ok(Self { phi, f_norm2, h2, h4, sigma_x2, sigma_w2 })
    }

    /// Inputs for a realized channel `h`: `h2 = |h|^2`, `h4 = |h|^4`.
    pub fn for_channel(
        estimator: &LinearEstimator,
        training: &TrainingBlock,
        h: Complex64,
        sigma_x2: f64,
        sigma_w2: f64,
    ) -> Result<Self> {
        check_filter_length(estimator, training)?;
        let h2 = h.norm_sqr();
        Self::new(
            estimator.training_response(training),
            estimator.norm2(),
            h2,
            h2 * h2,
            sigma_x2,
            sigma_w2,
        )
    }

    /// Inputs with the channel moments taken from the scenario's prior (for a
    /// deterministic prior this coincides with [`Self::for_channel`]).
    pub fn from_scenario(estimator: &LinearEstimator, scenario: &Scenario) -> Result<Self> {
        check_filter_length(estimator, &scenario.training)?;
        Self::new(
            estimator.training_response(&scenario.training),
            estimator.norm2(),
            scenario.prior.second_moment(),
            scenario.prior.fourth_moment(),
            scenario.constellation.symbol_power(),
            scenario.noise_power,
        )
    }

    /// Training response `phi = f^H x_tr`.
    pub fn phi(&self) -> Complex64 {
        self.phi
    }

    /// Filter noise gain `||f||^2`.
    pub fn f_norm2(&self) -> f64 {
        self.f_norm2
    }

    /// Channel power: `|h|^2` or `E[|h|^2]`.
    pub fn h2(&self) -> f64 {
        self.h2
    }

    /// Channel fourth moment: `|h|^4` or `E[|h|^4]`.
    pub fn h4(&self) -> f64 {
        self.h4
    }

    /// Symbol power `sigma_x^2`.
    pub fn sigma_x2(&self) -> f64 {
        self.sigma_x2
    }

    /// Noise power `sigma_w^2`.
    pub fn sigma_w2(&self) -> f64 {
        self.sigma_w2
    }
}

fn check_filter_length(estimator: &LinearEstimator, training: &TrainingBlock) -> Result<()> {
    if estimator.filter().len() != training.len() {
        return Err(Error::InvalidArgument(format!(
            "filter length {} does not match training block length {}",
            estimator.filter().len(),
            training.len()
        )));
    }
    Ok(())
}

/// The metrics a sweep can evaluate; config name `mse-x-dc` etc. via
/// [`MetricKind::config_name`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    /// Symbol-estimate MSE, channel known at the design stage.
    MseXDc,
    /// Symbol-estimate MSE, channel averaged over its prior.
    MseXRc,
    /// Excess MSE over the clairvoyant equalizer, known channel.
    MseXeDc,
    /// Excess MSE over the clairvoyant equalizer, prior-averaged.
    MseXeRc,
    /// Detection error probability (zeroth-order `a Q(b sqrt(SNR))`, or the
    /// simulated symbol-error rate on the Monte Carlo route).
    ZerothPe,
    /// Zeroth-order error probability averaged over channel draws.
    AvgZerothPe,
}

impl MetricKind {
    /// The name used in sweep configs.
    pub fn config_name(&self) -> &'static str {
        match self {
            MetricKind::MseXDc => "mse-x-dc",
            MetricKind::MseXRc => "mse-x-rc",
            MetricKind::MseXeDc => "mse-xe-dc",
            MetricKind::MseXeRc => "mse-xe-rc",
            MetricKind::ZerothPe => "pe",
            MetricKind::AvgZerothPe => "avg-pe",
        }
    }

    /// Inverse of [`Self::config_name`].
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "mse-x-dc" => Ok(MetricKind::MseXDc),
            "mse-x-rc" => Ok(MetricKind::MseXRc),
            "mse-xe-dc" => Ok(MetricKind::MseXeDc),
            "mse-xe-rc" => Ok(MetricKind::MseXeRc),
            "pe" => Ok(MetricKind::ZerothPe),
            "avg-pe" => Ok(MetricKind::AvgZerothPe),
            other => Err(Error::Config(format!(
                "unknown metric {other:?}; expected one of mse-x-dc, mse-x-rc, \
                 mse-xe-dc, mse-xe-rc, pe, avg-pe"
            ))),
        }
    }
}

// ── Symbol-estimate MSE ─────────────────────────────────────────────────────

/// Zeroth-order symbol-estimate MSE for a known channel:
///
/// ```text
/// sigma_x^2 (h2 |phi-1|^2 + sigma_w^2 ||f||^2 + sigma_w^2/sigma_x^2)
/// ------------------------------------------------------------------
///              h2 |phi|^2 + sigma_w^2 ||f||^2
/// ```
///
/// The numerator is the estimation error power seen by the zero-forcing
/// receiver, the denominator the estimate power `E[|h_hat|^2]`.
pub fn zeroth_mse_x_dc(inputs: &ZerothOrderInputs) -> Result<f64> {
    let bias2 = (inputs.phi - Complex64::ONE).norm_sqr();
    let num = inputs.sigma_x2 * inputs.h2 * bias2
        + inputs.sigma_x2 * inputs.sigma_w2 * inputs.f_norm2
        + inputs.sigma_w2;
    let den = inputs.h2 * inputs.phi.norm_sqr() + inputs.sigma_w2 * inputs.f_norm2;
    if den == 0.0 {
        return Err(Error::InvalidArgument(
            "zeroth-order symbol MSE is undefined: estimate power is zero \
             (training response and noise both vanish)"
                .into(),
        ));
    }
    Ok(num / den)
}

/// Zeroth-order symbol-estimate MSE averaged over the channel prior: the same
/// expression with `h2 = E[|h|^2]` (only the second moment enters, so the
/// algebra is shared with [`zeroth_mse_x_dc`]).
pub fn zeroth_mse_x_rc(inputs: &ZerothOrderInputs) -> Result<f64> {
    zeroth_mse_x_dc(inputs)
}

// ── Excess MSE ──────────────────────────────────────────────────────────────

/// Zeroth-order excess MSE (gap to the clairvoyant zero-forcing receiver) for
/// a known channel:
///
/// ```text
/// h2 |phi-1|^2 + sigma_w^2 ||f||^2
/// --------------------------------- * (sigma_x^2 + sigma_w^2 / h2)
///  h2 |phi|^2  + sigma_w^2 ||f||^2
/// ```
pub fn zeroth_mse_xe_dc(inputs: &ZerothOrderInputs) -> Result<f64> {
    let bias2 = (inputs.phi - Complex64::ONE).norm_sqr();
    let num = inputs.h2 * bias2 + inputs.sigma_w2 * inputs.f_norm2;
    let den = inputs.h2 * inputs.phi.norm_sqr() + inputs.sigma_w2 * inputs.f_norm2;
    if den == 0.0 {
        return Err(Error::InvalidArgument(
            "zeroth-order excess MSE is undefined: estimate power is zero \
             (training response and noise both vanish)"
                .into(),
        ));
    }
    Ok(num / den * (inputs.sigma_x2 + inputs.sigma_w2 / inputs.h2))
}

/// Zeroth-order excess MSE averaged over the channel prior:
///
/// ```text
/// |phi-1|^2 (h4 sigma_x^2 + h2 sigma_w^2) + sigma_w^2 ||f||^2 (h2 sigma_x^2 + sigma_w^2)
/// ---------------------------------------------------------------------------------------
///                      h4 |phi|^2 + sigma_w^2 ||f||^2 h2
/// ```
///
/// with `h2 = E[|h|^2]`, `h4 = E[|h|^4]`. For a deterministic channel
/// (`h4 = h2^2`) this reduces exactly to [`zeroth_mse_xe_dc`].
pub fn zeroth_mse_xe_rc(inputs: &ZerothOrderInputs) -> Result<f64> {
    let bias2 = (inputs.phi - Complex64::ONE).norm_sqr();
    let num = bias2 * (inputs.h4 * inputs.sigma_x2 + inputs.h2 * inputs.sigma_w2)
        + inputs.sigma_w2 * inputs.f_norm2 * (inputs.h2 * inputs.sigma_x2 + inputs.sigma_w2);
    let den =
        inputs.h4 * inputs.phi.norm_sqr() + inputs.sigma_w2 * inputs.f_norm2 * inputs.h2;
    if den == 0.0 {
        return Err(Error::InvalidArgument(
            "zeroth-order excess MSE is undefined: estimate power is zero \
             (training response and noise both vanish)"
                .into(),
        ));
    }
    Ok(num / den)
}

// ── Gradient numerators ─────────────────────────────────────────────────────

/// Numerator of the Wirtinger gradient (with respect to `conj(f)`) of the
/// known-channel symbol MSE.
///
/// Writing the metric as `sigma_x^2 S(f)/D(f)`, the returned vector is
/// `D * dS/dconj(f) - dD/dconj(f) * S`; dividing it by `D^2` gives the
/// gradient of `metric / sigma_x^2` exactly, so its zero set is the metric's
/// stationary set. The filter-dependent scalars are recomputed from the
/// supplied vectors; `inputs` contributes only the channel power and the two
/// signal powers.
///
/// The minimum-variance unbiased filter never zeroes this vector when noise
/// is present (its value there is `-(sigma_w^2/sigma_x^2) (h2 +
/// sigma_w^2/||x_tr||^2) x_tr`), while the biased filters built by
/// [`crate::estimators::opt_zf_filter`] zero it identically.
///
/// # Panics
///
/// Panics if `f` and `x_tr` have different lengths.
pub fn grad_numerator_mse_x(
    inputs: &ZerothOrderInputs,
    f: &[Complex64],
    x_tr: &[Complex64],
) -> Vec<Complex64> {
    assert_eq!(f.len(), x_tr.len(), "filter and training block lengths differ");
    let phi = inner(f, x_tr);
    let n2: f64 = f.iter().map(|z| z.norm_sqr()).sum();
    let (h2, sx2, sw2) = (inputs.h2, inputs.sigma_x2, inputs.sigma_w2);
    let bias = phi - Complex64::ONE;
    let den = h2 * phi.norm_sqr() + sw2 * n2;
    let s = sw2 / sx2 + h2 * bias.norm_sqr() + sw2 * n2;
    f.iter()
        .zip(x_tr)
        .map(|(&fk, &xk)| {
            let ds = xk * (bias.conj() * h2) + fk * sw2;
            let dd = xk * (phi.conj() * h2) + fk * sw2;
            ds * den - dd * s
        })
        .collect()
}

/// Numerator of the Wirtinger gradient (with respect to `conj(f)`) of the
/// prior-averaged excess MSE; pass `h4 = h2^2` for the known-channel variant
/// (same stationary set, scaled by a positive constant).
///
/// Dividing by the squared metric denominator gives the exact gradient of
/// [`zeroth_mse_xe_rc`]. The minimum-variance unbiased filter zeroes this
/// vector identically — for the excess metric, unbiasedness is optimal — while
/// the MMSE filter does not.
///
/// # Panics
///
/// Panics if `f` and `x_tr` have different lengths.
pub fn grad_numerator_mse_xe(
    inputs: &ZerothOrderInputs,
    f: &[Complex64],
    x_tr: &[Complex64],
) -> Vec<Complex64> {
    assert_eq!(f.len(), x_tr.len(), "filter and training block lengths differ");
    let phi = inner(f, x_tr);
    let n2: f64 = f.iter().map(|z| z.norm_sqr()).sum();
    let (h2, h4, sx2, sw2) = (inputs.h2, inputs.h4, inputs.sigma_x2, inputs.sigma_w2);
    let bias = phi - Complex64::ONE;
    // Weights on the bias and noise-gain terms of the metric numerator.
    let wb = h4 * sx2 + h2 * sw2;
    let wf = sw2 * (h2 * sx2 + sw2);
    let den = h4 * phi.norm_sqr() + sw2 * n2 * h2;
    let s = bias.norm_sqr() * wb + n2 * wf;
    f.iter()
        .zip(x_tr)
        .map(|(&fk, &xk)| {
            let ds = xk * (bias.conj() * wb) + fk * wf;
            let dd = xk * (phi.conj() * h4) + fk * (sw2 * h2);
            ds * den - dd * s
        })
        .collect()
}

/// Residual of the first-order optimality condition for the symbol MSE: the
/// filter's training response minus the optimal response
/// `1 + sigma_w^2/(sigma_x^2 h2)`. Zero exactly for the filters built by
/// [`crate::estimators::opt_zf_filter`].
///
/// # Panics
///
/// Panics if `h2` or `sigma_x2` is not strictly positive.
pub fn necessary_condition_residual(
    f: &[Complex64],
    x_tr: &[Complex64],
    h2: f64,
    sigma_x2: f64,
    sigma_w2: f64,
) -> Complex64 {
    assert!(h2 > 0.0, "channel power must be > 0, got {h2}");
    assert!(sigma_x2 > 0.0, "symbol power must be > 0, got {sigma_x2}");
    inner(f, x_tr) - Complex64::new(1.0 + sigma_w2 / (sigma_x2 * h2), 0.0)
}

// ── Zeroth-order SNR and error probability ──────────────────────────────────

/// Zeroth-order receiver SNR `sigma_x^2 / zeroth_mse_x`.
///
/// Infinite SNR (an exactly zero MSE, e.g. noiseless with an unbiased filter)
/// is reported as [`Error::InfiniteZerothSnr`] rather than `inf` so sweeps
/// fail loudly instead of emitting non-finite CSV values.
pub fn zeroth_snr(inputs: &ZerothOrderInputs) -> Result<f64> {
    let mse = zeroth_mse_x_dc(inputs)?;
    if mse == 0.0 {
        return Err(Error::InfiniteZerothSnr);
    }
    Ok(inputs.sigma_x2 / mse)
}

/// Zeroth-order error probability `a * Q(b * sqrt(snr))` with the SNR of
/// [`zeroth_snr`]; `a` and `b` are constellation-dependent constants supplied
/// by the caller. An infinite zeroth-order SNR yields exactly 0.
pub fn zeroth_pe(inputs: &ZerothOrderInputs, a: f64, b: f64) -> Result<f64> {
    if !a.is_finite() || a <= 0.0 || !b.is_finite() || b <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "zeroth_pe: constants must be finite and > 0, got a = {a}, b = {b}"
        )));
    }
    match zeroth_snr(inputs) {
        Ok(snr) => Ok(a * q(b * snr.sqrt())),
        Err(Error::InfiniteZerothSnr) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Average of [`zeroth_pe`] over channel draws from the scenario's prior,
/// with `h2 = |h|^2` per draw.
///
/// This is the design objective for random channels: the channel average of
/// the known-channel error-probability surrogate. Draw `i` uses the
/// deterministic substream `(seed, i)`, so results are reproducible and
/// extendable. Requires a random prior — for a deterministic channel the
/// average degenerates to [`zeroth_pe`] itself.
pub fn avg_zeroth_pe(
    f: &[Complex64],
    scenario: &Scenario,
    a: f64,
    b: f64,
    n_channel_draws: u64,
    seed: u64,
) -> Result<McResult> {
    if !scenario.prior.is_random() {
        return Err(Error::InvalidArgument(
            "avg_zeroth_pe needs a random channel prior; use zeroth_pe for a \
             deterministic channel"
                .into(),
        ));
    }
    if !a.is_finite() || a <= 0.0 || !b.is_finite() || b <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "avg_zeroth_pe: constants must be finite and > 0, got a = {a}, b = {b}"
        )));
    }
    if n_channel_draws == 0 {
        return Err(Error::InvalidArgument(
            "avg_zeroth_pe: need at least one channel draw".into(),
        ));
    }
    if f.len() != scenario.training.len() {
        return Err(Error::InvalidArgument(format!(
            "filter length {} does not match training block length {}",
            f.len(),
            scenario.training.len()
        )));
    }
    let phi = inner(f, scenario.training.symbols());
    let n2: f64 = f.iter().map(|z| z.norm_sqr()).sum();
    if n2 == 0.0 {
        return Err(Error::InvalidArgument(
            "avg_zeroth_pe: filter must be nonzero".into(),
        ));
    }
    let sx2 = scenario.constellation.symbol_power();
    let sw2 = scenario.noise_power;
    let bias2 = (phi - Complex64::ONE).norm_sqr();
    let phi2 = phi.norm_sqr();

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for i in 0..n_channel_draws {
        let mut rng = trial_rng(seed, i);
        let h2 = scenario.prior.sample(&mut rng).norm_sqr();
        // Known-channel symbol-MSE surrogate at this draw.
        let num = sx2 * h2 * bias2 + sx2 * sw2 * n2 + sw2;
        let den = h2 * phi2 + sw2 * n2;
        let pe = if num == 0.0 {
            0.0 // infinite SNR: noiseless and unbiased
        } else if den == 0.0 {
            a * 0.5 // zero SNR: Q(0)
        } else {
            a * q(b * (sx2 * den / num).sqrt())
        };
        sum += pe;
        sum_sq += pe * pe;
    }
    let n = n_channel_draws as f64;
    let mean = sum / n;
    let std_error = if n_channel_draws > 1 {
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(McResult { mean, std_error, n: n_channel_draws })
}

// ── Tests ───────────────────────────────────────────────────────────────────
