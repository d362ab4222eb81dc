//! Acceptance gate: eleven end-to-end criteria covering the closed-form
//! layer, its gradients and optimality claims, the simulated ground truth,
//! the preset experiments, the trimming analysis, and determinism.
//!
//! Each criterion prints exactly one `ACCEPTANCE <n> (<what>): PASS|FAIL`
//! line. The line is written through `/dev/stdout` so it shows up even under
//! the harness's output capture; a failing criterion additionally fails its
//! test with the usual panic diagnostics.
//!
//! Statistical criteria run on frozen seeds with margins calibrated well
//! clear of their thresholds, so none of them flake.

mod common;

use chanest::bench::{preset, run_sweep, CsvRow};
use chanest::closed_form_metrics::{
    grad_numerator_mse_x, necessary_condition_residual, zeroth_mse_x_dc, zeroth_mse_xe_dc,
    zeroth_mse_xe_rc, ZerothOrderInputs,
};
use chanest::estimators::{mmse_filter, mvu_filter, opt_zf_filter, EstimatorKind};
use chanest::monte_carlo::{
    moment_ratio_check, tail_mass_check, true_pe, true_pe_clairvoyant, McConfig,
};
use chanest::signal_model::Scenario;
use chanest::Complex64;
use common::*;
use rand::Rng;

// ── Reporting harness ───────────────────────────────────────────────────────

fn report_line(line: &str) {
    use std::io::Write;
    // The test harness captures the print! family; a direct handle on the
    // process's stdout sidesteps that so the verdict always reaches the log.
    match std::fs::OpenOptions::new().append(true).open("/dev/stdout") {
        Ok(mut out) => {
            let _ = out.write_all(line.as_bytes());
        }
        Err(_) => print!("{line}"),
    }
}

fn criterion(number: u32, name: &str, body: impl FnOnce() + std::panic::UnwindSafe) {
    let outcome = std::panic::catch_unwind(body);
    let verdict = if outcome.is_ok() { "PASS" } else { "FAIL" };
    report_line(&format!("ACCEPTANCE {number:>2} ({name}): {verdict}\n"));
    if let Err(payload) = outcome {
        std::panic::resume_unwind(payload);
    }
}

// ── Row helpers for preset-based criteria ───────────────────────────────────

fn series<'a>(rows: &'a [CsvRow], label: &str) -> Vec<&'a CsvRow> {
    let s: Vec<&CsvRow> = rows.iter().filter(|r| r.estimator_label == label).collect();
    assert!(!s.is_empty(), "no rows for estimator `{label}`");
    s
}

/// Assert `a <= b` at every grid point, within `k` combined standard errors
/// when the rows carry uncertainty (0 shuts the slack off for closed forms).
fn assert_at_or_below(a: &[&CsvRow], b: &[&CsvRow], k: f64, what: &str) {
    assert_eq!(a.len(), b.len());
    for (ra, rb) in a.iter().zip(b) {
        assert_eq!(ra.snr_db, rb.snr_db, "grids out of step");
        let slack = k * (ra.std_error.unwrap_or(0.0) + rb.std_error.unwrap_or(0.0));
        assert!(
            ra.value <= rb.value + slack,
            "{what} at {} dB: {} = {:.6e} above {} = {:.6e} (slack {slack:.2e})",
            ra.snr_db,
            ra.estimator_label,
            ra.value,
            rb.estimator_label,
            rb.value
        );
    }
}

// ── 1: the excess-MSE surrogate is stationary at the unbiased filter ────────

#[test]
fn criterion_01_excess_mse_gradient_vanishes_at_the_unbiased_filter() {
    criterion(1, "excess-MSE gradient vanishes at the unbiased filter", || {
        let mut rng = test_rng(9001);
        for case in 0..100 {
            let block_len = [1usize, 2, 5][case % 3];
            let setup = random_setup(&mut rng, block_len);
            let x = setup.training.symbols().to_vec();
            let h2 = setup.h.norm_sqr();
            let h4 = (1.0 + 3.0 * rng.random::<f64>()) * h2 * h2;
            let (sx2, sw2) = (setup.sigma_x2, setup.sigma_w2);
            let mvu = mvu_filter(&setup.training);
            let f = mvu.filter().to_vec();

            // Known-channel and prior-averaged variants share the check.
            for (tag, h4_used) in [("known-channel", h2 * h2), ("prior-averaged", h4)] {
                let metric = |g: &[Complex64]| {
                    let inputs =
                        ZerothOrderInputs::new(inner(g, &x), norm2(g), h2, h4_used, sx2, sw2)
                            .unwrap();
                    if h4_used == h2 * h2 {
                        zeroth_mse_xe_dc(&inputs).unwrap()
                    } else {
                        zeroth_mse_xe_rc(&inputs).unwrap()
                    }
                };
                let value = metric(&f);
                let fd = fd_wirtinger_grad(metric, &f, 1e-6 * l2_norm(&f));
                // A gradient of natural size moves the metric by its own
                // magnitude over one filter norm; that is the scale the
                // stationarity must beat.
                let scale = value / l2_norm(&f);
                assert!(
                    l2_norm(&fd) < 1e-8 * scale,
                    "case {case} ({tag}): |fd| = {:.3e} vs scale {scale:.3e}",
                    l2_norm(&fd)
                );
            }
        }
    });
}

// ── 2: the symbol-MSE gradient numerator, closed form and zeros ─────────────

#[test]
fn criterion_02_symbol_mse_gradient_numerator_closed_form_and_zeros() {
    criterion(
        2,
        "symbol-MSE gradient numerator: nonzero at unbiased and Bayesian, zero at designed bias",
        || {
            let mut rng = test_rng(9002);
            for case in 0..50 {
                let block_len = [1usize, 2, 5][case % 3];
                let setup = random_setup(&mut rng, block_len);
                let x = setup.training.symbols().to_vec();
                let h2 = setup.h.norm_sqr();
                let (sx2, sw2) = (setup.sigma_x2, setup.sigma_w2);
                let energy = setup.training.energy();
                let inputs_for = |f: &[Complex64]| {
                    ZerothOrderInputs::new(inner(f, &x), norm2(f), h2, h2 * h2, sx2, sw2)
                        .unwrap()
                };

                // Hand-derived value at the unbiased filter:
                // -(sigma_w^2/sigma_x^2)(h2 + sigma_w^2/energy) x_tr.
                let coeff = -(sw2 / sx2) * (h2 + sw2 / energy);
                let expected: Vec<Complex64> = x.iter().map(|&xk| xk * coeff).collect();
                let scale = l2_norm(&expected);

                let mvu = mvu_filter(&setup.training);
                let at_mvu =
                    grad_numerator_mse_x(&inputs_for(mvu.filter()), mvu.filter(), &x);
                assert!(l2_norm(&at_mvu) > 1e-6 * scale, "case {case}: flat at the MVU filter");
                let diff: Vec<Complex64> =
                    at_mvu.iter().zip(&expected).map(|(a, b)| a - b).collect();
                assert!(
                    l2_norm(&diff) <= 1e-10 * scale,
                    "case {case}: MVU numerator off its closed form by {:.3e} at scale {scale:.3e}",
                    l2_norm(&diff)
                );

                let mmse = mmse_filter(&setup.training, h2, sw2).unwrap();
                let at_mmse =
                    grad_numerator_mse_x(&inputs_for(mmse.filter()), mmse.filter(), &x);
                assert!(
                    l2_norm(&at_mmse) > 1e-6 * scale,
                    "case {case}: flat at the Bayesian filter"
                );

                let opt = opt_zf_filter(&setup.training, h2, sx2, sw2).unwrap();
                let at_opt =
                    grad_numerator_mse_x(&inputs_for(opt.filter()), opt.filter(), &x);
                assert!(
                    l2_norm(&at_opt) <= 1e-10 * scale,
                    "case {case}: designed bias does not zero the numerator ({:.3e})",
                    l2_norm(&at_opt)
                );
            }
        },
    );
}

// ── 3: designed filters hit the optimal training response exactly ───────────

#[test]
fn criterion_03_designed_filters_satisfy_the_optimality_condition() {
    criterion(3, "designed filters hit the optimal training response exactly", || {
        // Across every moment variant the designed filter's training response
        // must equal 1 + sigma_w^2/(sigma_x^2 h2) to rounding error.
        let mut rng = test_rng(9003);
        for case in 0..30 {
            let block_len = [1usize, 2, 5][case % 3];
            let setup = random_setup(&mut rng, block_len);
            let h2 = setup.h.norm_sqr();
            let (sx2, sw2) = (setup.sigma_x2, setup.sigma_w2);
            let est = opt_zf_filter(&setup.training, h2, sx2, sw2).unwrap();
            let residual = necessary_condition_residual(
                est.filter(),
                setup.training.symbols(),
                h2,
                sx2,
                sw2,
            );
            let target = 1.0 + sw2 / (sx2 * h2);
            assert!(
                residual.norm() <= 1e-12 * target,
                "case {case}: residual {:.3e} at target {target}",
                residual.norm()
            );
        }

        // The three estimator kinds: realized power, prior power, assumed power.
        let det = deterministic_scenario(Complex64::new(0.8, 0.6), 10.0, 10.0, 5);
        let rc = rayleigh_scenario(10.0, 10.0, 5);
        let cases: [(&Scenario, EstimatorKind, f64); 3] = [
            (&det, EstimatorKind::OptZfDc { channel_power: 1.0 }, 1.0),
            (&rc, EstimatorKind::OptZfRc, rc.prior.second_moment()),
            (&rc, EstimatorKind::OptZfUd { assumed_second_moment: 3.0 }, 3.0),
        ];
        for (sc, kind, h2) in cases {
            let est = kind.build(sc).unwrap();
            let residual = necessary_condition_residual(
                est.filter(),
                sc.training.symbols(),
                h2,
                sc.constellation.symbol_power(),
                sc.noise_power,
            );
            let target = 1.0 + sc.noise_power / (sc.constellation.symbol_power() * h2);
            assert!(
                residual.norm() <= 1e-12 * target,
                "{}: residual {:.3e}",
                est.label(),
                residual.norm()
            );
        }
    });
}

// ── 4: closed form equals the raw-moment combination, by simulation ─────────

#[test]
fn criterion_04_closed_form_matches_raw_moment_simulation() {
    criterion(4, "closed-form symbol MSE matches the simulated raw-moment ratio", || {
        // The closed form is (sx2 E|h_raw - h|^2 + sw2) / E|h_raw|^2 exactly,
        // so estimating both raw moments by simulation and combining them must
        // agree within the delta-method uncertainty of the ratio.
        let sc = deterministic_scenario(Complex64::new(0.8, 0.6), 10.0, 10.0, 5);
        let h = Complex64::new(0.8, 0.6);
        let (sx2, sw2) = (sc.constellation.symbol_power(), sc.noise_power);
        let x = sc.training.symbols().to_vec();
        let n = 1_000_000u64;

        for kind in [EstimatorKind::Mvu, EstimatorKind::Mmse, EstimatorKind::OptZfDc {
            channel_power: 1.0,
        }] {
            let est = kind.build(&sc).unwrap();
            let f = est.filter().to_vec();
            let zeroth = {
                let inputs =
                    ZerothOrderInputs::for_channel(&est, &sc.training, h, sx2, sw2).unwrap();
                zeroth_mse_x_dc(&inputs).unwrap()
            };

            // Independent trial stream with its own circular-Gaussian sampler
            // (magnitude from the exponential law, phase uniform).
            let mut rng = test_rng(40_406);
            let mut draw_noise = |variance: f64| -> Complex64 {
                let u: f64 = rng.random::<f64>();
                let mag = (-variance * (1.0 - u).ln()).sqrt();
                let phase = rng.random::<f64>() * std::f64::consts::TAU;
                Complex64::from_polar(mag, phase)
            };

            let (mut sum_a, mut sum_b) = (0.0f64, 0.0f64);
            let (mut sum_aa, mut sum_bb, mut sum_ab) = (0.0f64, 0.0f64, 0.0f64);
            for _ in 0..n {
                let mut est_val = Complex64::ZERO;
                for (k, &xk) in x.iter().enumerate() {
                    let y = h * xk + draw_noise(sw2);
                    est_val += f[k].conj() * y;
                }
                let a = sx2 * (est_val - h).norm_sqr() + sw2;
                let b = est_val.norm_sqr();
                sum_a += a;
                sum_b += b;
                sum_aa += a * a;
                sum_bb += b * b;
                sum_ab += a * b;
            }
            let nf = n as f64;
            let (mean_a, mean_b) = (sum_a / nf, sum_b / nf);
            let var_a = (sum_aa - nf * mean_a * mean_a) / (nf - 1.0);
            let var_b = (sum_bb - nf * mean_b * mean_b) / (nf - 1.0);
            let cov = (sum_ab - nf * mean_a * mean_b) / (nf - 1.0);
            let ratio = mean_a / mean_b;
            let var_ratio = (var_a - 2.0 * ratio * cov + ratio * ratio * var_b)
                / (mean_b * mean_b * nf);
            let se = var_ratio.max(0.0).sqrt();
            let z = (ratio - zeroth) / se;
            assert!(
                z.abs() < 3.0,
                "{}: simulated ratio {ratio:.6e} vs closed form {zeroth:.6e} (z = {z:.2})",
                est.label()
            );
        }
    });
}

// ── 5–8: preset experiments ─────────────────────────────────────────────────

#[test]
fn criterion_05_closed_form_symbol_mse_ordering() {
    criterion(5, "preset fig1: designed bias beats unbiased beats shrinkage", || {
        let rows = run_sweep(&preset("fig1").unwrap()).unwrap();
        let (mvu, mmse, opt_rc) =
            (series(&rows, "mvu"), series(&rows, "mmse"), series(&rows, "opt-rc"));
        assert_at_or_below(&opt_rc, &mvu, 0.0, "closed-form symbol MSE");
        assert_at_or_below(&mvu, &mmse, 0.0, "closed-form symbol MSE");
    });
}

#[test]
fn criterion_06_closed_form_excess_mse_minimum() {
    criterion(6, "preset fig2: the unbiased filter minimizes the excess surrogate", || {
        let rows = run_sweep(&preset("fig2").unwrap()).unwrap();
        let mvu = series(&rows, "mvu");
        for other in ["mmse", "opt-rc", "opt-ud"] {
            assert_at_or_below(&mvu, &series(&rows, other), 0.0, "closed-form excess MSE");
        }
    });
}

#[test]
fn criterion_07_channel_averaged_error_probability_ordering() {
    criterion(7, "preset fig3: designed biases win on channel-averaged error probability", || {
        let rows = run_sweep(&preset("fig3").unwrap()).unwrap();
        for opt in ["opt-rc", "opt-ud"] {
            for reference in ["mvu", "mmse"] {
                assert_at_or_below(
                    &series(&rows, opt),
                    &series(&rows, reference),
                    3.0,
                    "channel-averaged error probability",
                );
            }
        }
    });
}

#[test]
fn criterion_08_simulated_symbol_mse_ordering() {
    criterion(8, "preset fig4: simulated symbol MSE keeps the designed-bias ordering", || {
        let rows = run_sweep(&preset("fig4").unwrap()).unwrap();
        for opt in ["opt-rc", "opt-ud"] {
            for reference in ["mvu", "mmse"] {
                assert_at_or_below(
                    &series(&rows, opt),
                    &series(&rows, reference),
                    3.0,
                    "simulated symbol MSE",
                );
            }
        }
        assert_at_or_below(
            &series(&rows, "mvu"),
            &series(&rows, "mmse"),
            3.0,
            "simulated symbol MSE",
        );
    });
}

// ── 9: simulated detection and the clairvoyant oracle ───────────────────────

#[test]
fn criterion_09_simulated_detection_curves() {
    criterion(
        9,
        "simulated detection: collinear estimators coincide and the clairvoyant curve hits the oracle",
        || {
            // All four estimators scale the same matched filter by a positive
            // real factor, and equal-energy detection ignores that factor, so
            // their error counts must agree to within noise (in fact exactly).
            for (snr_db, n) in
                [(0.0, 1_000_000u64), (12.0, 1_000_000), (24.0, 10_000_000), (30.0, 10_000_000)]
            {
                let sc = rayleigh_scenario(10.0, snr_db, 5);
                let mc = McConfig::new(n, 606);
                let kinds = [
                    EstimatorKind::Mvu,
                    EstimatorKind::Mmse,
                    EstimatorKind::OptZfRc,
                    EstimatorKind::OptZfUd { assumed_second_moment: 3.0 },
                ];
                let results: Vec<_> = kinds
                    .iter()
                    .map(|k| true_pe(&sc, &k.build(&sc).unwrap(), &mc).unwrap())
                    .collect();
                for i in 0..results.len() {
                    for j in (i + 1)..results.len() {
                        let gap = (results[i].mean - results[j].mean).abs();
                        let slack = 3.0 * (results[i].std_error + results[j].std_error);
                        assert!(
                            gap <= slack,
                            "{} dB: {} and {} disagree by {gap:.3e} (slack {slack:.3e})",
                            snr_db,
                            kinds[i].label(),
                            kinds[j].label()
                        );
                    }
                }

                let csi = true_pe_clairvoyant(&sc, &mc).unwrap();
                let oracle = rayleigh_qpsk_ser(
                    sc.prior.second_moment() * sc.constellation.symbol_power()
                        / sc.noise_power,
                );
                let z = (csi.mean - oracle) / csi.std_error;
                assert!(
                    z.abs() < 3.0,
                    "{snr_db} dB: clairvoyant {:.5e} vs oracle {oracle:.5e} (z = {z:.2})",
                    csi.mean
                );
            }
        },
    );
}

// ── 10: the trimming analysis ───────────────────────────────────────────────

#[test]
fn criterion_10_trimming_analysis() {
    criterion(10, "moment-ratio bound holds and trimming tail mass is quadratic", || {
        // The replacement bound must hold in every probed regime...
        let battery: Vec<(&str, Scenario)> = vec![
            ("fixed, 0 dB", deterministic_scenario(Complex64::ONE, 0.0, 10.0, 5)),
            ("fixed, 20 dB", deterministic_scenario(Complex64::ONE, 20.0, 10.0, 5)),
            ("fixed, 30 dB", deterministic_scenario(Complex64::ONE, 30.0, 10.0, 5)),
            ("random, 0 dB", rayleigh_scenario(0.0, 10.0, 5)),
            ("random, 20 dB", rayleigh_scenario(20.0, 10.0, 3)),
        ];
        for (name, sc) in &battery {
            let est = EstimatorKind::Mvu.build(sc).unwrap();
            let r = moment_ratio_check(sc, &est, &McConfig::new(200_000, 7)).unwrap();
            assert!(r.holds, "{name}: lhs {:.3e} above rhs {:.3e}", r.lhs, r.rhs);
        }

        // ...and at 30 dB training on a fixed channel the replacement error is
        // a sub-percent perturbation of the ratio itself.
        let sc = deterministic_scenario(Complex64::ONE, 30.0, 10.0, 5);
        let est = EstimatorKind::Mvu.build(&sc).unwrap();
        let r = moment_ratio_check(&sc, &est, &McConfig::new(1_000_000, 7)).unwrap();
        assert!(
            r.lhs < 1e-2 * r.ratio_of_means,
            "lhs {:.3e} vs ratio {:.3e}",
            r.lhs,
            r.ratio_of_means
        );

        // Tail mass below the floor scales like lambda^2.
        let sc = rayleigh_scenario(0.0, 10.0, 5);
        let est = EstimatorKind::Mvu.build(&sc).unwrap();
        let report = tail_mass_check(
            &sc,
            &est,
            &[0.02, 0.04, 0.08],
            &McConfig::new(10_000_000, 5),
        )
        .unwrap();
        assert!(
            (1.7..=2.3).contains(&report.slope),
            "log-log slope {} outside the quadratic band",
            report.slope
        );
    });
}

// ── 11: determinism across worker-thread counts ─────────────────────────────

#[test]
fn criterion_11_byte_identical_csv_across_thread_counts() {
    criterion(11, "byte-identical CSV for any worker-thread count", || {
        let run = |preset_name: &str, threads: &str, trials: Option<&str>| -> Vec<u8> {
            let out_path = std::env::temp_dir().join(format!(
                "chanest-acceptance-{}-{preset_name}-{threads}.csv",
                std::process::id()
            ));
            let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_chanest"));
            cmd.env("CHANEST_THREADS", threads)
                .args(["preset", preset_name, "--out"])
                .arg(&out_path);
            if let Some(t) = trials {
                cmd.args(["--trials", t]);
            }
            let out = cmd.output().unwrap();
            assert!(
                out.status.success(),
                "preset {preset_name} with {threads} threads failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            let bytes = std::fs::read(&out_path).unwrap();
            std::fs::remove_file(&out_path).ok();
            bytes
        };

        // A simulated preset (trimmed to a 300k-trial budget) and a pure
        // closed-form preset, each under 1 vs 4 workers.
        let one = run("fig4", "1", Some("300000"));
        let four = run("fig4", "4", Some("300000"));
        assert_eq!(one, four, "simulated sweep must not depend on the worker count");

        let one = run("fig1", "1", None);
        let four = run("fig1", "4", None);
        assert_eq!(one, four, "closed-form sweep must not depend on the worker count");
    });
}
