//! Helpers shared by the integration test suites: quadrature oracles,
//! finite-difference gradients, and scenario factories.
//!
//! Everything here is deliberately independent of the library's own numerics:
//! oracles recompute quantities from their definitions (densities, integrals,
//! difference quotients) so agreement is evidence, not tautology.
#![allow(dead_code)]

use chanest::estimators::LinearEstimator;
use chanest::signal_model::{q_function, ChannelPrior, Constellation, Scenario, TrainingBlock};
use chanest::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n >= 2 && n.is_multiple_of(2), "simpson needs an even panel count");
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

/// Gaussian tail probability by direct quadrature of the standard normal
/// density — an oracle for `q_function` that shares none of its code path.
pub fn gaussian_tail_quadrature(x: f64) -> f64 {
    let density = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    // Beyond 9.5 the remaining mass is ~1e-21, far below the tolerances used.
    let upper = x.max(0.0) + 9.5;
    simpson(density, x, upper, 40_000)
}

/// QPSK symbol error rate averaged over a unit-power Rayleigh channel with
/// mean symbol SNR `gamma`, by quadrature over the Rayleigh amplitude density.
/// The integrand decays like `exp(-s^2/gamma)`; 14 standard amplitudes covers
/// every SNR used in the tests.
pub fn rayleigh_qpsk_ser(gamma: f64) -> f64 {
    let ser = |s: f64| {
        let q = q_function(s).unwrap();
        2.0 * q - q * q
    };
    simpson(
        |s| (2.0 * s / gamma) * (-s * s / gamma).exp() * ser(s),
        0.0,
        14.0,
        4000,
    )
}

/// Mean of `Q(sqrt(gamma * t))` under `t ~ Exp(1)`, in closed form.
/// Used to cross-check the quadrature machinery itself.
pub fn exp_q_closed_form(gamma: f64) -> f64 {
    0.5 * (1.0 - (gamma / (gamma + 2.0)).sqrt())
}

/// Finite-difference Wirtinger gradient of a real function of a complex
/// filter, with respect to the conjugated coordinates: component `k` is
/// `(d/d re + i d/d im) g / 2` by central differences with the given absolute
/// `step` (callers scale it to the filter norm).
pub fn fd_wirtinger_grad(
    g: impl Fn(&[Complex64]) -> f64,
    f: &[Complex64],
    step: f64,
) -> Vec<Complex64> {
    let mut grad = Vec::with_capacity(f.len());
    for k in 0..f.len() {
        let probe = |delta: Complex64| {
            let mut fp = f.to_vec();
            fp[k] += delta;
            g(&fp)
        };
        let d_re = (probe(Complex64::new(step, 0.0)) - probe(Complex64::new(-step, 0.0)))
            / (2.0 * step);
        let d_im = (probe(Complex64::new(0.0, step)) - probe(Complex64::new(0.0, -step)))
            / (2.0 * step);
        grad.push(Complex64::new(d_re, d_im) / 2.0);
    }
    grad
}

/// `f^H x`: the inner product the filter response and norm are built from,
/// recomputed here so tests do not lean on the library's version.
pub fn inner(f: &[Complex64], x: &[Complex64]) -> Complex64 {
    f.iter().zip(x).map(|(&fk, &xk)| fk.conj() * xk).sum()
}

pub fn norm2(f: &[Complex64]) -> f64 {
    f.iter().map(|z| z.norm_sqr()).sum()
}

pub fn l2_norm(v: &[Complex64]) -> f64 {
    norm2(v).sqrt()
}

pub fn test_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Log-uniform draw on `[0.25, 4]` — a factor-of-16 spread around 1 that keeps
/// every randomized parameter well away from degenerate magnitudes.
pub fn log_uniform_param<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let log_range = 4.0_f64.ln() - 0.25_f64.ln();
    (0.25_f64.ln() + rng.random::<f64>() * log_range).exp()
}

/// A non-degenerate random complex scalar with magnitude in ~[0.35, 2.8].
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let mag = log_uniform_param(rng).sqrt();
    let phase = rng.random::<f64>() * std::f64::consts::TAU;
    Complex64::from_polar(mag, phase)
}

/// A random filter of length `n` with i.i.d. components in the unit box,
/// redrawn until its norm is healthy.
pub fn random_filter<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    loop {
        let f: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0))
            .collect();
        if norm2(&f) > 0.05 {
            return f;
        }
    }
}

/// Randomized fixed-channel setup: training block, channel, and powers, all
/// drawn from well-conditioned ranges.
pub struct RandomSetup {
    pub training: TrainingBlock,
    pub h: Complex64,
    pub sigma_x2: f64,
    pub sigma_w2: f64,
}

pub fn random_setup<R: Rng + ?Sized>(rng: &mut R, block_len: usize) -> RandomSetup {
    let energy = log_uniform_param(rng) * block_len as f64;
    RandomSetup {
        training: TrainingBlock::constant_modulus(block_len, energy).unwrap(),
        h: random_channel(rng),
        sigma_x2: log_uniform_param(rng),
        sigma_w2: log_uniform_param(rng),
    }
}

/// Unit-power Rayleigh channel, QPSK, magnitude floor 0.1 — the workhorse
/// random-channel scenario of the benchmark presets.
pub fn rayleigh_scenario(training_snr_db: f64, data_snr_db: f64, block_len: usize) -> Scenario {
    Scenario::from_snr_point(
        ChannelPrior::ComplexGaussian { variance: 1.0 },
        Constellation::qpsk(1.0).unwrap(),
        block_len,
        training_snr_db,
        data_snr_db,
        0.1,
    )
    .unwrap()
}

/// Fixed-channel counterpart of [`rayleigh_scenario`].
pub fn deterministic_scenario(
    h: Complex64,
    training_snr_db: f64,
    data_snr_db: f64,
    block_len: usize,
) -> Scenario {
    Scenario::from_snr_point(
        ChannelPrior::Deterministic(h),
        Constellation::qpsk(1.0).unwrap(),
        block_len,
        training_snr_db,
        data_snr_db,
        0.1,
    )
    .unwrap()
}

/// Collinearity defect of a filter against the training block: the largest
/// cross ratio `|f_j x_k - f_k x_j|`, zero iff `f` is a scalar multiple of
/// `x_tr`.
pub fn collinearity_defect(est: &LinearEstimator, training: &TrainingBlock) -> f64 {
    let f = est.filter();
    let x = training.symbols();
    let mut worst = 0.0_f64;
    for j in 0..f.len() {
        for k in 0..f.len() {
            worst = worst.max((f[j] * x[k] - f[k] * x[j]).norm());
        }
    }
    worst
}
