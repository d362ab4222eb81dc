//! Declarative benchmark runner: TOML sweep specs, a preset catalog, and CSV
//! output.
//!
//! A sweep evaluates a set of estimators against a set of metrics over a grid
//! of data-SNR points at fixed training SNR. With no `[mc]` section the
//! closed-form expressions are evaluated; with `[mc]` the same metric
//! requests are answered by link simulation (the average zeroth-order error
//! probability always needs `[mc]` for its channel draws). Every sweep point
//! derives its Monte Carlo seed from the base seed and the point index, and
//! all estimators and metrics share it, so curves compared point-by-point see
//! identical channel/noise realizations.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::closed_form_metrics::{
    avg_zeroth_pe, zeroth_mse_x_dc, zeroth_mse_x_rc, zeroth_mse_xe_dc, zeroth_mse_xe_rc,
    zeroth_pe, MetricKind, ZerothOrderInputs,
};
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::monte_carlo::{true_mse_x, true_mse_xe, true_pe, true_pe_clairvoyant, McConfig};
use crate::rng::mix_seed;
use crate::signal_model::{ChannelPrior, Constellation, Scenario};

/// Header line of every emitted CSV.
pub const CSV_HEADER: &str = "snr_db,estimator,metric,value,std_error,n_trials";

// ── Validated sweep description ─────────────────────────────────────────────

/// A fully validated benchmark run: what to sweep, which filters to build,
/// which metrics to report, and how (closed form or simulation).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Data-SNR grid in dB, strictly ascending.
    pub snr_grid_db: Vec<f64>,
    /// Per-slot training SNR in dB, held fixed across the sweep.
    pub training_snr_db: f64,
    /// Training block length.
    pub block_len: usize,
    /// Estimate-trimming threshold used by simulated receivers.
    pub trim_lambda: f64,
    /// Channel prior shared by every point.
    pub prior: ChannelPrior,
    /// Symbol alphabet shared by every point.
    pub constellation: Constellation,
    /// Filters to evaluate, in report order.
    pub estimators: Vec<EstimatorKind>,
    /// Metrics to report, in report order.
    pub metrics: Vec<MetricKind>,
    /// Error-probability bound constant `a` (used by the zeroth-order Pe).
    pub pe_a: f64,
    /// Error-probability bound constant `b`.
    pub pe_b: f64,
    /// Simulation settings; `None` selects the closed-form route.
    pub mc: Option<McConfig>,
}

/// One output record of [`run_sweep`].
///
/// `value` and `std_error` are stored exactly as they print (12 significant
/// digits), so parsing an emitted CSV reproduces the rows bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub snr_db: f64,
    pub estimator_label: String,
    pub metric_label: String,
    pub value: f64,
    /// Standard error for simulated values; `None` (empty field) for closed
    /// forms.
    pub std_error: Option<f64>,
    /// Trial count behind a simulated value; `None` for closed forms.
    pub n_trials: Option<u64>,
}

// ── Raw TOML shapes ─────────────────────────────────────────────────────────

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    sweep: RawSweep,
    prior: RawPrior,
    constellation: RawConstellation,
    estimators: RawEstimators,
    metrics: RawMetrics,
    mc: Option<RawMc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    snr_db: RawGrid,
    training_snr_db: f64,
    block_len: usize,
    #[serde(default)]
    trim_lambda: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrior {
    /// "deterministic" | "complex-gaussian" | "uniform-box"
    kind: String,
    h_re: Option<f64>,
    h_im: Option<f64>,
    variance: Option<f64>,
    half_width: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstellation {
    /// "bpsk" | "qpsk" | "psk8" | "qam16"
    kind: String,
    #[serde(default = "default_symbol_power")]
    symbol_power: f64,
}

fn default_symbol_power() -> f64 {
    1.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEstimators {
    kinds: Vec<String>,
    ud_second_moment: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetrics {
    kinds: Vec<String>,
    pe_a: Option<f64>,
    pe_b: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMc {
    n_trials: u64,
    seed: u64,
    chunk_size: Option<u64>,
    h_regularization_lambda: Option<f64>,
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

// ── Loading and validation ──────────────────────────────────────────────────

/// Read and validate a sweep spec from a TOML file.
pub fn load_spec(path: &Path) -> Result<SweepSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    SweepSpec::from_toml_str(&text)
        .map_err(|e| config_err(format!("{}: {e}", path.display())))
}

impl SweepSpec {
    /// Parse and validate a sweep spec from TOML text.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawSpec =
            toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        let spec = Self::resolve(raw)?;
        spec.validate()?;
        Ok(spec)
    }

    fn resolve(raw: RawSpec) -> Result<Self> {
        let snr_grid_db = expand_grid(raw.sweep.snr_db)?;
        let prior = resolve_prior(raw.prior)?;
        let constellation = resolve_constellation(raw.constellation)?;
        let estimators = resolve_estimators(&raw.estimators, &prior)?;
        let metrics = raw
            .metrics
            .kinds
            .iter()
            .map(|name| MetricKind::parse(name))
            .collect::<Result<Vec<_>>>()?;
        let mc = raw.mc.map(|m| McConfig {
            n_trials: m.n_trials,
            seed: m.seed,
            chunk_size: m.chunk_size.unwrap_or(McConfig::DEFAULT_CHUNK_SIZE),
            h_regularization_lambda: m.h_regularization_lambda,
        });
        Ok(SweepSpec {
            snr_grid_db,
            training_snr_db: raw.sweep.training_snr_db,
            block_len: raw.sweep.block_len,
            trim_lambda: raw.sweep.trim_lambda,
            prior,
            constellation,
            estimators,
            metrics,
            pe_a: raw.metrics.pe_a.unwrap_or(1.0),
            pe_b: raw.metrics.pe_b.unwrap_or(1.0),
            mc,
        })
    }

    /// Check every cross-field rule. Called by the parser and again by
    /// [`run_sweep`], so hand-built specs get the same screening.
    pub fn validate(&self) -> Result<()> {
        if self.snr_grid_db.is_empty() {
            return Err(config_err("sweep.snr_db: grid must be non-empty"));
        }
        if self.snr_grid_db.iter().any(|v| !v.is_finite()) {
            return Err(config_err("sweep.snr_db: grid values must be finite"));
        }
        if self.snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_err(
                "sweep.snr_db: grid must be strictly ascending",
            ));
        }
        if !self.training_snr_db.is_finite() {
            return Err(config_err("sweep.training_snr_db: must be finite"));
        }
        if self.block_len == 0 {
            return Err(config_err("sweep.block_len: must be >= 1"));
        }
        if !self.trim_lambda.is_finite() || self.trim_lambda < 0.0 {
            return Err(config_err("sweep.trim_lambda: must be finite and >= 0"));
        }
        self.prior.clone().validate_as_config()?;
        if self.estimators.is_empty() {
            return Err(config_err("estimators.kinds: must be non-empty"));
        }
        let mut labels: Vec<String> =
            self.estimators.iter().map(EstimatorKind::label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(config_err("estimators.kinds: duplicate estimator"));
        }
        if self.metrics.is_empty() {
            return Err(config_err("metrics.kinds: must be non-empty"));
        }
        let mut metric_names: Vec<&str> =
            self.metrics.iter().map(MetricKind::config_name).collect();
        metric_names.sort_unstable();
        if metric_names.windows(2).any(|w| w[0] == w[1]) {
            return Err(config_err("metrics.kinds: duplicate metric"));
        }

        let uses_pe = self
            .metrics
            .iter()
            .any(|m| matches!(m, MetricKind::ZerothPe | MetricKind::AvgZerothPe));
        if uses_pe {
            for (name, v) in [("pe_a", self.pe_a), ("pe_b", self.pe_b)] {
                if !v.is_finite() || v <= 0.0 {
                    return Err(config_err(format!(
                        "metrics.{name}: must be finite and > 0"
                    )));
                }
            }
        }

        if let Some(mc) = &self.mc {
            if mc.n_trials == 0 {
                return Err(config_err("mc.n_trials: must be >= 1"));
            }
            if mc.chunk_size == 0 {
                return Err(config_err("mc.chunk_size: must be >= 1"));
            }
            if let Some(l) = mc.h_regularization_lambda {
                if !l.is_finite() || l < 0.0 {
                    return Err(config_err(
                        "mc.h_regularization_lambda: must be finite and >= 0",
                    ));
                }
            }
        }

        // Metric/prior/route compatibility.
        for metric in &self.metrics {
            match metric {
                MetricKind::MseXDc | MetricKind::MseXeDc => {
                    if self.prior.is_random() {
                        return Err(config_err(format!(
                            "metric `{}` conditions on a known channel and needs a \
                             deterministic prior",
                            metric.config_name()
                        )));
                    }
                }
                MetricKind::MseXRc | MetricKind::MseXeRc => {
                    if !self.prior.is_random() {
                        return Err(config_err(format!(
                            "metric `{}` averages over the channel and needs a random \
                             prior",
                            metric.config_name()
                        )));
                    }
                }
                MetricKind::ZerothPe => {
                    if self.mc.is_none() && self.prior.is_random() {
                        return Err(config_err(
                            "metric `pe` without [mc] is the fixed-channel closed form \
                             and needs a deterministic prior; use `avg-pe` for random \
                             channels",
                        ));
                    }
                }
                MetricKind::AvgZerothPe => {
                    if !self.prior.is_random() {
                        return Err(config_err(
                            "metric `avg-pe` averages over channel draws and needs a \
                             random prior; use `pe` for a deterministic channel",
                        ));
                    }
                    if self.mc.is_none() {
                        return Err(config_err(
                            "metric `avg-pe` needs an [mc] section for its channel \
                             draws and seed",
                        ));
                    }
                }
            }
        }

        // Simulated inversion metrics need the trimming floor.
        let inverting = self
            .metrics
            .iter()
            .any(|m| !matches!(m, MetricKind::ZerothPe | MetricKind::AvgZerothPe));
        if self.mc.is_some() && inverting && self.trim_lambda == 0.0 {
            return Err(config_err(
                "sweep.trim_lambda: simulated MSE metrics need trim_lambda > 0 \
                 (untrimmed inversion has an infinite second moment)",
            ));
        }

        // The clairvoyant baseline only makes sense for simulated error rates.
        if self.estimators.contains(&EstimatorKind::PerfectCsi) {
            let all_pe_mc = self.mc.is_some()
                && self.metrics.iter().all(|m| *m == MetricKind::ZerothPe);
            if !all_pe_mc {
                return Err(config_err(
                    "estimator `perfect-csi` has no training filter; it is only \
                     valid for the simulated `pe` metric",
                ));
            }
        }
        Ok(())
    }

    /// Apply CLI overrides of the Monte Carlo seed and trial count.
    pub fn override_mc(&mut self, seed: Option<u64>, trials: Option<u64>) -> Result<()> {
        if seed.is_none() && trials.is_none() {
            return Ok(());
        }
        let Some(mc) = self.mc.as_mut() else {
            return Err(config_err(
                "--seed/--trials apply to Monte Carlo runs, but the spec has no [mc] \
                 section",
            ));
        };
        if let Some(s) = seed {
            mc.seed = s;
        }
        if let Some(t) = trials {
            if t == 0 {
                return Err(config_err("--trials: must be >= 1"));
            }
            mc.n_trials = t;
        }
        Ok(())
    }

    /// Scenario for one grid point.
    fn scenario_at(&self, data_snr_db: f64) -> Result<Scenario> {
        Scenario::from_snr_point(
            self.prior.clone(),
            self.constellation.clone(),
            self.block_len,
            self.training_snr_db,
            data_snr_db,
            self.trim_lambda,
        )
    }
}

impl ChannelPrior {
    /// Prior validation surfaced as a config error (exit code 2, not 3).
    fn validate_as_config(self) -> Result<()> {
        // Scenario construction re-validates; this is the early, field-named
        // check for spec loading.
        match self {
            ChannelPrior::Deterministic(h)
                if h.re.is_finite() && h.im.is_finite() => Ok(()),
            ChannelPrior::ComplexGaussian { variance }
                if variance.is_finite() && variance > 0.0 => Ok(()),
            ChannelPrior::UniformBox { half_width }
                if half_width.is_finite() && half_width > 0.0 => Ok(()),
            _ => Err(config_err("prior: parameters out of range")),
        }
    }
}

fn expand_grid(grid: RawGrid) -> Result<Vec<f64>> {
    match grid {
        RawGrid::List(values) => Ok(values),
        RawGrid::Range { start, stop, step } => {
            if !start.is_finite() || !stop.is_finite() || !step.is_finite() {
                return Err(config_err("sweep.snr_db: range bounds must be finite"));
            }
            if step <= 0.0 {
                return Err(config_err("sweep.snr_db: step must be > 0"));
            }
            if stop < start {
                return Err(config_err("sweep.snr_db: stop must be >= start"));
            }
            let count = ((stop - start) / step).floor() as u64 + 1;
            if count > 10_000 {
                return Err(config_err(
                    "sweep.snr_db: range expands to more than 10000 points",
                ));
            }
            // Half-step tolerance keeps `stop` in the grid despite rounding.
            Ok((0..count)
                .map(|k| start + k as f64 * step)
                .filter(|v| *v <= stop + step * 1e-9)
                .collect())
        }
    }
}

fn resolve_prior(raw: RawPrior) -> Result<ChannelPrior> {
    let forbid = |field: &str, set: bool, kind: &str| -> Result<()> {
        if set {
            Err(config_err(format!(
                "prior.{field}: not a field of the `{kind}` prior"
            )))
        } else {
            Ok(())
        }
    };
    match raw.kind.as_str() {
        "deterministic" => {
            forbid("variance", raw.variance.is_some(), "deterministic")?;
            forbid("half_width", raw.half_width.is_some(), "deterministic")?;
            let re = raw
                .h_re
                .ok_or_else(|| config_err("prior.h_re: required for `deterministic`"))?;
            let im = raw.h_im.unwrap_or(0.0);
            Ok(ChannelPrior::Deterministic(Complex64::new(re, im)))
        }
        "complex-gaussian" => {
            forbid("h_re", raw.h_re.is_some(), "complex-gaussian")?;
            forbid("h_im", raw.h_im.is_some(), "complex-gaussian")?;
            forbid("half_width", raw.half_width.is_some(), "complex-gaussian")?;
            let variance = raw.variance.ok_or_else(|| {
                config_err("prior.variance: required for `complex-gaussian`")
            })?;
            Ok(ChannelPrior::ComplexGaussian { variance })
        }
        "uniform-box" => {
            forbid("h_re", raw.h_re.is_some(), "uniform-box")?;
            forbid("h_im", raw.h_im.is_some(), "uniform-box")?;
            forbid("variance", raw.variance.is_some(), "uniform-box")?;
            let half_width = raw.half_width.ok_or_else(|| {
                config_err("prior.half_width: required for `uniform-box`")
            })?;
            Ok(ChannelPrior::UniformBox { half_width })
        }
        other => Err(config_err(format!(
            "prior.kind: unknown kind `{other}`, expected `deterministic`, \
             `complex-gaussian`, or `uniform-box`"
        ))),
    }
}

fn resolve_constellation(raw: RawConstellation) -> Result<Constellation> {
    let power = raw.symbol_power;
    match raw.kind.as_str() {
        "bpsk" => Constellation::bpsk(power),
        "qpsk" => Constellation::qpsk(power),
        "psk8" => Constellation::psk8(power),
        "qam16" => Constellation::qam16(power),
        other => Err(config_err(format!(
            "constellation.kind: unknown kind `{other}`, expected `bpsk`, `qpsk`, \
             `psk8`, or `qam16`"
        ))),
    }
    .map_err(|e| config_err(e.to_string()))
}

fn resolve_estimators(
    raw: &RawEstimators,
    prior: &ChannelPrior,
) -> Result<Vec<EstimatorKind>> {
    let mut kinds = Vec::with_capacity(raw.kinds.len());
    for name in &raw.kinds {
        let kind = match name.as_str() {
            "mvu" => EstimatorKind::Mvu,
            "mmse" => EstimatorKind::Mmse,
            "opt-dc" => match prior {
                ChannelPrior::Deterministic(h) => {
                    EstimatorKind::OptZfDc { channel_power: h.norm_sqr() }
                }
                _ => {
                    return Err(config_err(
                        "estimators.kinds: `opt-dc` uses the exact channel power and \
                         needs a deterministic prior",
                    ))
                }
            },
            "opt-rc" => EstimatorKind::OptZfRc,
            "opt-ud" => {
                let m = raw.ud_second_moment.ok_or_else(|| {
                    config_err(
                        "estimators.ud_second_moment: required when `opt-ud` is \
                         requested",
                    )
                })?;
                if !m.is_finite() || m <= 0.0 {
                    return Err(config_err(
                        "estimators.ud_second_moment: must be finite and > 0",
                    ));
                }
                EstimatorKind::OptZfUd { assumed_second_moment: m }
            }
            "perfect-csi" => EstimatorKind::PerfectCsi,
            other => {
                if let Some(alpha) = other.strip_prefix("bias:") {
                    let alpha: f64 = alpha.parse().map_err(|_| {
                        config_err(format!(
                            "estimators.kinds: cannot parse bias level in `{other}`"
                        ))
                    })?;
                    if !alpha.is_finite() {
                        return Err(config_err(
                            "estimators.kinds: bias level must be finite",
                        ));
                    }
                    EstimatorKind::BiasScaled { alpha }
                } else {
                    return Err(config_err(format!(
                        "estimators.kinds: unknown estimator `{other}`, expected \
                         `mvu`, `mmse`, `opt-dc`, `opt-rc`, `opt-ud`, `bias:<alpha>`, \
                         or `perfect-csi`"
                    )));
                }
            }
        };
        kinds.push(kind);
    }
    Ok(kinds)
}

// ── Sweep execution ─────────────────────────────────────────────────────────

/// CSV metric tag for a requested metric on the chosen route.
fn metric_label(metric: MetricKind, simulated: bool) -> &'static str {
    match (metric, simulated) {
        (MetricKind::MseXDc, false) => "zeroth_mse_x_dc",
        (MetricKind::MseXDc, true) => "true_mse_x_dc",
        (MetricKind::MseXRc, false) => "zeroth_mse_x_rc",
        (MetricKind::MseXRc, true) => "true_mse_x_rc",
        (MetricKind::MseXeDc, false) => "zeroth_mse_xe_dc",
        (MetricKind::MseXeDc, true) => "true_mse_xe_dc",
        (MetricKind::MseXeRc, false) => "zeroth_mse_xe_rc",
        (MetricKind::MseXeRc, true) => "true_mse_xe_rc",
        (MetricKind::ZerothPe, false) => "zeroth_pe",
        (MetricKind::ZerothPe, true) => "true_pe",
        (MetricKind::AvgZerothPe, _) => "avg_zeroth_pe",
    }
}

/// Run a sweep and return its rows ordered by (metric, estimator, SNR point).
///
/// All estimators and metrics at grid point `i` share the derived seed
/// `mix_seed(base_seed, i)`, so pointwise comparisons between curves are
/// paired. Rerunning the same spec gives identical rows, whatever the worker
/// thread count.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<CsvRow>> {
    spec.validate()?;
    let mut rows =
        Vec::with_capacity(spec.metrics.len() * spec.estimators.len() * spec.snr_grid_db.len());
    for &metric in &spec.metrics {
        for kind in &spec.estimators {
            for (point, &snr_db) in spec.snr_grid_db.iter().enumerate() {
                let scenario = spec.scenario_at(snr_db)?;
                let (value, std_error, n_trials) =
                    eval_point(spec, metric, kind, &scenario, point as u64)?;
                if !value.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "sweep produced a non-finite value at snr_db={snr_db}, \
                         estimator `{}`, metric `{}`",
                        kind.label(),
                        metric.config_name()
                    )));
                }
                rows.push(CsvRow {
                    snr_db,
                    estimator_label: kind.label(),
                    metric_label: metric_label(metric, spec.mc.is_some()).to_string(),
                    value: quantize(value),
                    std_error: std_error.map(quantize),
                    n_trials,
                });
            }
        }
    }
    Ok(rows)
}

fn eval_point(
    spec: &SweepSpec,
    metric: MetricKind,
    kind: &EstimatorKind,
    scenario: &Scenario,
    point: u64,
) -> Result<(f64, Option<f64>, Option<u64>)> {
    let point_mc = spec.mc.map(|mc| McConfig {
        seed: mix_seed(mc.seed, point),
        ..mc
    });
    match metric {
        MetricKind::AvgZerothPe => {
            let mc = point_mc.expect("validated: avg-pe needs [mc]");
            let est = kind.build(scenario)?;
            let r = avg_zeroth_pe(
                est.filter(),
                scenario,
                spec.pe_a,
                spec.pe_b,
                mc.n_trials,
                mc.seed,
            )?;
            Ok((r.mean, Some(r.std_error), Some(r.n)))
        }
        MetricKind::ZerothPe => match point_mc {
            None => {
                let est = kind.build(scenario)?;
                let inputs = ZerothOrderInputs::from_scenario(&est, scenario)?;
                Ok((zeroth_pe(&inputs, spec.pe_a, spec.pe_b)?, None, None))
            }
            Some(mc) => {
                let r = if *kind == EstimatorKind::PerfectCsi {
                    true_pe_clairvoyant(scenario, &mc)?
                } else {
                    true_pe(scenario, &kind.build(scenario)?, &mc)?
                };
                Ok((r.mean, Some(r.std_error), Some(r.n)))
            }
        },
        MetricKind::MseXDc | MetricKind::MseXRc | MetricKind::MseXeDc | MetricKind::MseXeRc => {
            match point_mc {
                None => {
                    let est = kind.build(scenario)?;
                    let inputs = ZerothOrderInputs::from_scenario(&est, scenario)?;
                    let value = match metric {
                        MetricKind::MseXDc => zeroth_mse_x_dc(&inputs)?,
                        MetricKind::MseXRc => zeroth_mse_x_rc(&inputs)?,
                        MetricKind::MseXeDc => zeroth_mse_xe_dc(&inputs)?,
                        MetricKind::MseXeRc => zeroth_mse_xe_rc(&inputs)?,
                        _ => unreachable!(),
                    };
                    Ok((value, None, None))
                }
                Some(mc) => {
                    let est = kind.build(scenario)?;
                    let r = match metric {
                        MetricKind::MseXDc | MetricKind::MseXRc => {
                            true_mse_x(scenario, &est, &mc)?
                        }
                        _ => true_mse_xe(scenario, &est, &mc)?,
                    };
                    Ok((r.mean, Some(r.std_error), Some(r.n)))
                }
            }
        }
    }
}

// ── CSV codec ───────────────────────────────────────────────────────────────

/// Round a value to the 12 significant digits it will print with, so stored
/// rows and their CSV text carry identical information.
fn quantize(v: f64) -> f64 {
    format!("{v:.11e}").parse().expect("formatted float reparses")
}

fn push_row(out: &mut String, row: &CsvRow) {
    let _ = write!(out, "{},{},{},{:.11e},", row.snr_db, row.estimator_label, row.metric_label, row.value);
    if let Some(se) = row.std_error {
        let _ = write!(out, "{se:.11e}");
    }
    out.push(',');
    if let Some(n) = row.n_trials {
        let _ = write!(out, "{n}");
    }
    out.push('\n');
}

/// Render rows as CSV text with the standard header.
pub fn csv_string(rows: &[CsvRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        push_row(&mut out, row);
    }
    out
}

/// Parse CSV text produced by [`csv_string`] back into rows.
pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        Some(h) => {
            return Err(config_err(format!(
                "csv: unexpected header `{h}`, expected `{CSV_HEADER}`"
            )))
        }
        None => return Err(config_err("csv: empty input")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let lineno = i + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(config_err(format!(
                "csv line {lineno}: expected 6 fields, got {}",
                fields.len()
            )));
        }
        let parse_f64 = |field: &str, name: &str| -> Result<f64> {
            field.parse().map_err(|_| {
                config_err(format!("csv line {lineno}: bad {name} `{field}`"))
            })
        };
        let std_error = if fields[4].is_empty() {
            None
        } else {
            Some(parse_f64(fields[4], "std_error")?)
        };
        let n_trials = if fields[5].is_empty() {
            None
        } else {
            Some(fields[5].parse().map_err(|_| {
                config_err(format!("csv line {lineno}: bad n_trials `{}`", fields[5]))
            })?)
        };
        rows.push(CsvRow {
            snr_db: parse_f64(fields[0], "snr_db")?,
            estimator_label: fields[1].to_string(),
            metric_label: fields[2].to_string(),
            value: parse_f64(fields[3], "value")?,
            std_error,
            n_trials,
        });
    }
    Ok(rows)
}

// ── Presets ─────────────────────────────────────────────────────────────────

/// A named, built-in sweep configuration.
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    /// The TOML text the preset parses from (also usable as a starting point
    /// for custom specs).
    pub toml: &'static str,
}

/// The built-in sweep catalog.
pub const PRESETS: [Preset; 8] = [
    Preset {
        name: "fig1",
        description: "closed-form symbol MSE (random channel), training SNR 0 dB, B=5: \
                      optimized filter below MVU below MMSE",
        toml: include_str!("../presets/fig1.toml"),
    },
    Preset {
        name: "fig2",
        description: "closed-form excess symbol MSE (random channel), training SNR 0 dB, \
                      B=2: MVU is the minimum",
        toml: include_str!("../presets/fig2.toml"),
    },
    Preset {
        name: "fig3",
        description: "average zeroth-order error probability over channel draws, \
                      training SNR 10 dB, B=5, a=b=1",
        toml: include_str!("../presets/fig3.toml"),
    },
    Preset {
        name: "fig4",
        description: "simulated symbol MSE, training SNR 0 dB, B=5, lambda=0.1: \
                      optimized filters stay ahead on the true metric",
        toml: include_str!("../presets/fig4.toml"),
    },
    Preset {
        name: "fig5",
        description: "simulated excess symbol MSE, training SNR 0 dB, B=2, lambda=0.1, \
                      regularized true-channel inverse",
        toml: include_str!("../presets/fig5.toml"),
    },
    Preset {
        name: "fig6",
        description: "simulated symbol error rate, training SNR 10 dB, B=5, lambda=0.1, \
                      with a perfect-CSI floor: all schemes nearly coincide",
        toml: include_str!("../presets/fig6.toml"),
    },
    Preset {
        name: "fig7",
        description: "fig4 with the assumed channel power E[|h|^2]=1/2 for opt-ud: the \
                      induced bias is optimal only for the closed-form metric",
        toml: include_str!("../presets/fig7.toml"),
    },
    Preset {
        name: "fig8",
        description: "fig5 with the assumed channel power E[|h|^2]=1/6 for opt-ud: a \
                      mismatched bias can win on the true metric",
        toml: include_str!("../presets/fig8.toml"),
    },
];

/// The preset catalog, for listing.
pub fn list_presets() -> &'static [Preset] {
    &PRESETS
}

/// Load a preset by name.
pub fn preset(name: &str) -> Result<SweepSpec> {
    let entry = PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        config_err(format!(
            "unknown preset `{name}`; available: {}",
            names.join(", ")
        ))
    })?;
    SweepSpec::from_toml_str(entry.toml)
        .map_err(|e| config_err(format!("preset `{name}`: {e}")))
}

// ── Tests ───────────────────────────────────────────────────────────────────
