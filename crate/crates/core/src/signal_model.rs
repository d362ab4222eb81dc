//! Link model: constellations, channel priors, training blocks, observation
//! generation, and the Gaussian tail function.
//!
//! The link is scalar and flat-fading. During payload transmission the
//! receiver sees `y(n) = h x(n) + w(n)`; during training it sees the vector
//! `y_tr = h x_tr + w_tr` for a known block `x_tr` of `B` symbols. Both noise
//! processes are circularly symmetric complex Gaussian with variance
//! `sigma_w2` per complex sample.
//!
//! Conventions used throughout the crate:
//!
//! * `CN(0, v)` means real and imaginary parts are i.i.d. `N(0, v/2)`, so the
//!   complex variance is `v`.
//! * The default training block is constant-modulus: every slot carries
//!   `sqrt(energy/B) * e^{i pi/4}`. Only `phi = f^H x_tr` and norms enter the
//!   metrics, so the common phase is arbitrary.
//! * Per-slot training SNR is `E[|h|^2] * (energy/B) / sigma_w2` and data SNR
//!   is `E[|h|^2] * sigma_x2 / sigma_w2`; `E[|h|^2]` is `|h|^2` itself when the
//!   channel is a fixed constant. Sweeps hold the training SNR fixed while the
//!   data SNR varies, which pins down `sigma_w2` and the training energy at
//!   each sweep point (see [`Scenario::from_snr_point`]).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Convert a decibel quantity to linear scale: `10^(db/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

// ── Gaussian tail ───────────────────────────────────────────────────────────

/// Gaussian tail probability `Q(x) = Pr{N(0,1) > x}`, evaluated through the
/// complementary error function. Absolute error is below 1e-12 everywhere.
///
/// `+inf` and `-inf` return the limits 0 and 1; `NaN` is rejected.
pub fn q_function(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::InvalidArgument("q_function: input is NaN".into()));
    }
    Ok(q(x))
}

/// Infallible Gaussian tail for internal call sites that already know the
/// argument is not NaN.
pub(crate) fn q(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

// ── Noise sampling ──────────────────────────────────────────────────────────

/// One draw of circularly symmetric complex Gaussian noise `CN(0, variance)`.
///
/// Real and imaginary parts are i.i.d. `N(0, variance/2)`. `variance = 0`
/// returns exactly zero (two normal draws are still consumed, keeping stream
/// layouts identical across noise settings).
pub fn sample_circular_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Result<Complex64> {
    if !variance.is_finite() || variance < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sample_circular_gaussian: variance must be finite and >= 0, got {variance}"
        )));
    }
    Ok(circular_gaussian(variance, rng))
}

/// Unchecked variant used in Monte Carlo hot loops after the scenario has
/// been validated.
pub(crate) fn circular_gaussian<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> Complex64 {
    let scale = (variance * 0.5).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(scale * re, scale * im)
}

// ── Constellation ───────────────────────────────────────────────────────────

/// A finite, zero-mean symbol alphabet with known average power.
///
/// Data symbols are drawn equiprobably. The average power
/// `mean |x|^2 = sigma_x2` is derived from the points at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    symbol_power: f64,
}

impl Constellation {
    /// Build a constellation from explicit points.
    ///
    /// Requires at least two pairwise-distinct, finite points whose
    /// equiprobable mean is zero (`|sum| <= 1e-12 * M`); a non-zero mean would
    /// silently bias every downstream metric.
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(
                "constellation: need at least 2 points".into(),
            ));
        }
        if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(Error::InvalidArgument(
                "constellation: points must be finite".into(),
            ));
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i] == points[j] {
                    return Err(Error::InvalidArgument(format!(
                        "constellation: points {i} and {j} coincide"
                    )));
                }
            }
        }
        let mean = points.iter().sum::<Complex64>();
        if mean.norm() > 1e-12 * points.len() as f64 {
            return Err(Error::InvalidArgument(format!(
                "constellation: mean must be zero, |sum| = {:.3e}",
                mean.norm()
            )));
        }
        let symbol_power =
            points.iter().map(|p| p.norm_sqr()).sum::<f64>() / points.len() as f64;
        Ok(Self {
            points,
            symbol_power,
        })
    }

    /// Antipodal BPSK `{+a, -a}` with average power `symbol_power`.
    pub fn bpsk(symbol_power: f64) -> Result<Self> {
        let a = power_scale(symbol_power)?;
        Self::new(vec![Complex64::new(a, 0.0), Complex64::new(-a, 0.0)])
    }

    /// Gray-orderable QPSK `{(+-1 +- i)/sqrt(2)} * a` with average power
    /// `symbol_power`.
    pub fn qpsk(symbol_power: f64) -> Result<Self> {
        let a = power_scale(symbol_power)? / std::f64::consts::SQRT_2;
        Self::new(vec![
            Complex64::new(a, a),
            Complex64::new(-a, a),
            Complex64::new(-a, -a),
            Complex64::new(a, -a),
        ])
    }

    /// 8-PSK on the circle of radius `sqrt(symbol_power)`.
    pub fn psk8(symbol_power: f64) -> Result<Self> {
        let a = power_scale(symbol_power)?;
        let mut points = Vec::with_capacity(8);
        for k in 0..4 {
            let angle = std::f64::consts::PI * k as f64 / 4.0;
            points.push(Complex64::new(a * angle.cos(), a * angle.sin()));
        }
        // Opposite half by exact negation so the mean cancels to 0.0 exactly.
        for k in 0..4 {
            let p = points[k];
            points.push(-p);
        }
        Self::new(points)
    }

    /// Square 16-QAM with levels `{-3,-1,1,3}` per axis, scaled to average
    /// power `symbol_power`.
    pub fn qam16(symbol_power: f64) -> Result<Self> {
        let a = power_scale(symbol_power)? / 10f64.sqrt();
        let levels = [-3.0, -1.0, 1.0, 3.0];
        let mut points = Vec::with_capacity(16);
        for &re in &levels {
            for &im in &levels {
                points.push(Complex64::new(a * re, a * im));
            }
        }
        Self::new(points)
    }

    /// The symbol alphabet, in index order (ties in detection resolve to the
    /// lowest index).
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Number of symbols `M` (always >= 2 by construction).
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Average symbol power `sigma_x2`.
    pub fn symbol_power(&self) -> f64 {
        self.symbol_power
    }

    /// Draw an equiprobable symbol; returns `(index, point)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, Complex64) {
        let idx = rng.random_range(0..self.points.len());
        (idx, self.points[idx])
    }
}

fn power_scale(symbol_power: f64) -> Result<f64> {
    if !symbol_power.is_finite() || symbol_power <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "constellation: symbol_power must be finite and > 0, got {symbol_power}"
        )));
    }
    Ok(symbol_power.sqrt())
}

// ── Channel prior ───────────────────────────────────────────────────────────

/// What the designer assumes (or knows) about the scalar channel `h`.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelPrior {
    /// Fixed, known channel value: the deterministic-channel case.
    Deterministic(Complex64),
    /// Circularly symmetric complex Gaussian `CN(0, variance)` (Rayleigh
    /// envelope): the random-channel case.
    ComplexGaussian { variance: f64 },
    /// Real and imaginary parts i.i.d. uniform on `[-half_width, half_width]`:
    /// a flat box prior useful when only crude channel statistics exist.
    UniformBox { half_width: f64 },
}

impl ChannelPrior {
    pub(crate) fn validate(&self) -> Result<()> {
        match *self {
            ChannelPrior::Deterministic(h) => {
                if !h.re.is_finite() || !h.im.is_finite() {
                    return Err(Error::InvalidArgument(
                        "channel prior: deterministic h must be finite".into(),
                    ));
                }
            }
            ChannelPrior::ComplexGaussian { variance } => {
                if !variance.is_finite() || variance <= 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "channel prior: Gaussian variance must be > 0, got {variance}"
                    )));
                }
            }
            ChannelPrior::UniformBox { half_width } => {
                if !half_width.is_finite() || half_width <= 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "channel prior: box half_width must be > 0, got {half_width}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `E[|h|^2]` under this prior (for the deterministic case, `|h|^2`).
    pub fn second_moment(&self) -> f64 {
        match *self {
            ChannelPrior::Deterministic(h) => h.norm_sqr(),
            ChannelPrior::ComplexGaussian { variance } => variance,
            // E[a^2 + b^2] with a, b ~ U[-w, w]: 2 * w^2/3.
            ChannelPrior::UniformBox { half_width } => 2.0 * half_width * half_width / 3.0,
        }
    }

    /// `E[|h|^4]` under this prior.
    pub fn fourth_moment(&self) -> f64 {
        match *self {
            ChannelPrior::Deterministic(h) => {
                let p = h.norm_sqr();
                p * p
            }
            // For CN(0, v): E[|h|^4] = 2 v^2.
            ChannelPrior::ComplexGaussian { variance } => 2.0 * variance * variance,
            // E[(a^2+b^2)^2] = E[a^4] + 2 E[a^2] E[b^2] + E[b^4]
            //               = w^4/5 + 2 (w^2/3)^2 + w^4/5 = 28 w^4 / 45.
            ChannelPrior::UniformBox { half_width } => {
                let w2 = half_width * half_width;
                28.0 * w2 * w2 / 45.0
            }
        }
    }

    /// Whether the channel actually varies from realization to realization.
    pub fn is_random(&self) -> bool {
        !matches!(self, ChannelPrior::Deterministic(_))
    }

    /// Draw a channel realization. The deterministic prior consumes no
    /// randomness and always returns its fixed value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match *self {
            ChannelPrior::Deterministic(h) => h,
            ChannelPrior::ComplexGaussian { variance } => circular_gaussian(variance, rng),
            ChannelPrior::UniformBox { half_width } => Complex64::new(
                rng.random_range(-half_width..=half_width),
                rng.random_range(-half_width..=half_width),
            ),
        }
    }
}

// ── Training block ──────────────────────────────────────────────────────────

/// The known training symbols `x_tr` sent before payload data.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingBlock {
    symbols: Vec<Complex64>,
}

impl TrainingBlock {
    /// Build from explicit symbols; requires a non-empty, finite block with
    /// positive energy.
    pub fn new(symbols: Vec<Complex64>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::InvalidArgument(
                "training block: need at least one symbol".into(),
            ));
        }
        if symbols.iter().any(|s| !s.re.is_finite() || !s.im.is_finite()) {
            return Err(Error::InvalidArgument(
                "training block: symbols must be finite".into(),
            ));
        }
        let energy: f64 = symbols.iter().map(|s| s.norm_sqr()).sum();
        if energy <= 0.0 {
            return Err(Error::InvalidArgument(
                "training block: total energy must be > 0".into(),
            ));
        }
        Ok(Self { symbols })
    }

    /// The default constant-modulus block: `block_len` copies of
    /// `sqrt(total_energy / block_len) * e^{i pi/4}`.
    pub fn constant_modulus(block_len: usize, total_energy: f64) -> Result<Self> {
        if block_len == 0 {
            return Err(Error::InvalidArgument(
                "training block: block_len must be >= 1".into(),
            ));
        }
        if !total_energy.is_finite() || total_energy <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "training block: total_energy must be > 0, got {total_energy}"
            )));
        }
        let amp = (total_energy / block_len as f64).sqrt();
        let angle = std::f64::consts::FRAC_PI_4;
        let symbol = Complex64::new(amp * angle.cos(), amp * angle.sin());
        Ok(Self {
            symbols: vec![symbol; block_len],
        })
    }

    /// The training symbols.
    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    /// Block length `B` (always >= 1 by construction).
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    /// Total training energy `||x_tr||^2`.
    pub fn energy(&self) -> f64 {
        self.symbols.iter().map(|s| s.norm_sqr()).sum()
    }
}

// ── Scenario ────────────────────────────────────────────────────────────────

/// One complete link configuration: channel prior, symbol alphabet, training
/// block, noise power, and the trim threshold used by zero-forcing receivers.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub prior: ChannelPrior,
    pub constellation: Constellation,
    pub training: TrainingBlock,
    /// Complex noise variance `sigma_w2`, shared by training and data phases.
    /// Zero is allowed for noiseless degenerate checks.
    pub noise_power: f64,
    /// Magnitude floor `lambda` applied to channel estimates before
    /// zero-forcing inversion; `0` disables trimming.
    pub trim_lambda: f64,
}

impl Scenario {
    pub fn new(
        prior: ChannelPrior,
        constellation: Constellation,
        training: TrainingBlock,
        noise_power: f64,
        trim_lambda: f64,
    ) -> Result<Self> {
        prior.validate()?;
        if !noise_power.is_finite() || noise_power < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "scenario: noise_power must be finite and >= 0, got {noise_power}"
            )));
        }
        if !trim_lambda.is_finite() || trim_lambda < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "scenario: trim_lambda must be finite and >= 0, got {trim_lambda}"
            )));
        }
        Ok(Self {
            prior,
            constellation,
            training,
            noise_power,
            trim_lambda,
        })
    }

    /// Build the scenario for one sweep point from SNR targets.
    ///
    /// Given a data SNR `E[|h|^2] sigma_x2 / sigma_w2` and a per-slot training
    /// SNR `E[|h|^2] (energy/B) / sigma_w2`, both in dB, this solves for the
    /// noise power and the training energy. Holding the training SNR fixed
    /// while the data SNR sweeps means the training energy tracks the noise
    /// level, which is how the benchmark sweeps are defined.
    pub fn from_snr_point(
        prior: ChannelPrior,
        constellation: Constellation,
        block_len: usize,
        training_snr_db: f64,
        data_snr_db: f64,
        trim_lambda: f64,
    ) -> Result<Self> {
        prior.validate()?;
        let e2 = prior.second_moment();
        if e2 <= 0.0 {
            return Err(Error::InvalidArgument(
                "scenario: channel second moment must be > 0 to set SNR targets".into(),
            ));
        }
        if !training_snr_db.is_finite() || !data_snr_db.is_finite() {
            return Err(Error::InvalidArgument(
                "scenario: SNR targets must be finite".into(),
            ));
        }
        let noise_power = e2 * constellation.symbol_power() / db_to_linear(data_snr_db);
        let per_slot_energy = db_to_linear(training_snr_db) * noise_power / e2;
        let training = TrainingBlock::constant_modulus(block_len, per_slot_energy * block_len as f64)?;
        Self::new(prior, constellation, training, noise_power, trim_lambda)
    }

    /// Data SNR `E[|h|^2] sigma_x2 / sigma_w2` in dB implied by this scenario.
    pub fn data_snr_db(&self) -> f64 {
        10.0 * (self.prior.second_moment() * self.constellation.symbol_power()
            / self.noise_power)
            .log10()
    }
}

// ── Observation generation ──────────────────────────────────────────────────

/// Training-phase observations `y_tr[k] = h x_tr[k] + w[k]`,
/// `w[k] ~ CN(0, noise_power)` i.i.d.
pub fn generate_training_obs<R: Rng + ?Sized>(
    h: Complex64,
    training: &TrainingBlock,
    noise_power: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    check_noise(noise_power)?;
    Ok(training
        .symbols()
        .iter()
        .map(|&x| h * x + circular_gaussian(noise_power, rng))
        .collect())
}

/// One data-phase observation `y = h x + w`, `w ~ CN(0, noise_power)`.
pub fn generate_data_obs<R: Rng + ?Sized>(
    h: Complex64,
    symbol: Complex64,
    noise_power: f64,
    rng: &mut R,
) -> Result<Complex64> {
    check_noise(noise_power)?;
    Ok(h * symbol + circular_gaussian(noise_power, rng))
}

fn check_noise(noise_power: f64) -> Result<()> {
    if !noise_power.is_finite() || noise_power < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "noise_power must be finite and >= 0, got {noise_power}"
        )));
    }
    Ok(())
}

// ── Tests ───────────────────────────────────────────────────────────────────
