//! Receiver side: equalizer coefficients and maximum-likelihood detection,
//! all driven by a channel estimate.
//!
//! Equalization is a single complex multiply `x_soft = c(h_hat) * y`. The
//! zero-forcing coefficient inverts the estimate, which is why estimates must
//! be trimmed away from zero before use; the MMSE coefficient is
//! self-regularizing as long as noise is present.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::signal_model::Constellation;

/// Outcome of symbol detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    /// Index of the detected point in the constellation (ties resolve to the
    /// lowest index).
    pub index: usize,
    /// Pre-decision equalized value `y / h_hat`, or `0` in the degenerate
    /// `h_hat = 0` case where no equalized value exists.
    pub soft: Complex64,
}

/// Zero-forcing equalizer coefficient `c = 1/h`.
///
/// `h = 0` is rejected: inverting an untrimmed estimate is exactly the
/// failure mode trimming exists to prevent.
pub fn zf_coefficient(h: Complex64) -> Result<Complex64> {
    if h == Complex64::ZERO {
        return Err(Error::ZeroForcingSingular);
    }
    Ok(h.inv())
}

/// Clairvoyant MMSE equalizer coefficient
/// `c = sigma_x2 conj(h) / (|h|^2 sigma_x2 + sigma_w2)`.
///
/// Finite for every `h` (including `h = 0`, where it is zero as long as the
/// denominator is positive); equals the zero-forcing coefficient when
/// `sigma_w2 = 0`.
pub fn mmse_coefficient(h: Complex64, symbol_power: f64, noise_power: f64) -> Complex64 {
    let denom = h.norm_sqr() * symbol_power + noise_power;
    if denom == 0.0 {
        // h = 0 with no noise: the limit of the coefficient is 0.
        return Complex64::ZERO;
    }
    h.conj() * (symbol_power / denom)
}

/// Apply an equalizer coefficient: `x_soft = c * y`.
pub fn equalize(coefficient: Complex64, y: Complex64) -> Complex64 {
    coefficient * y
}

/// Maximum-likelihood detection `argmin_k |y - h_hat x_k|^2`.
///
/// Total for every `h_hat`: at `h_hat = 0` the objective is flat and the
/// lowest index wins, mirroring the general tie rule. The reported soft value
/// is `y / h_hat` when that exists.
pub fn ml_detect(h_hat: Complex64, y: Complex64, constellation: &Constellation) -> Decision {
    let mut index = 0;
    let mut best = f64::INFINITY;
    for (k, &x) in constellation.points().iter().enumerate() {
        let metric = (y - h_hat * x).norm_sqr();
        if metric < best {
            best = metric;
            index = k;
        }
    }
    let soft = if h_hat == Complex64::ZERO {
        Complex64::ZERO
    } else {
        y / h_hat
    };
    Decision { index, soft }
}

/// Equalize-then-slice detection `argmin_k |y/h_hat - x_k|^2`.
///
/// Algebraically the same decision as [`ml_detect`] whenever `h_hat != 0`
/// (the objectives differ by the positive factor `|h_hat|^2`); kept as an
/// independent cross-check. Rejects `h_hat = 0`.
pub fn ml_detect_normalized(
    h_hat: Complex64,
    y: Complex64,
    constellation: &Constellation,
) -> Result<Decision> {
    if h_hat == Complex64::ZERO {
        return Err(Error::ZeroForcingSingular);
    }
    let soft = y / h_hat;
    let mut index = 0;
    let mut best = f64::INFINITY;
    for (k, &x) in constellation.points().iter().enumerate() {
        let metric = (soft - x).norm_sqr();
        if metric < best {
            best = metric;
            index = k;
        }
    }
    Ok(Decision { index, soft })
}

// ── Tests ───────────────────────────────────────────────────────────────────
