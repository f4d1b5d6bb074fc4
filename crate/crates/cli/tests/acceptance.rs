//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `cargo test --test acceptance -- --nocapture`).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::PI;
use std::time::{Duration, Instant};
use subwave_cli::config::PipelineConfig;
use subwave_cli::pipeline::{emit_outputs, run_pipeline};
use subwave_cli::trace_io::{ingest_trace_csv, write_trace_csv};
use subwave_core::channel::{synthesize_ideal, MultipathScene, Trajectory};
use subwave_core::envelope::fit_envelope;
use subwave_core::ratio::{compute_ratio, extract_rotation, fit_circle};
use subwave_core::recovery::{
    differential_mapping_oracle, hampel_filter, integral_k_oracle, AmplitudeSeries,
};
use subwave_core::smoothing::{adaptive_width, moving_average, noise_ratio};
use subwave_oracle::{phase_of_theta, GridSpec};

fn random_denominator(rng: &mut ChaCha8Rng) -> (Complex64, f64) {
    let ratio = 1.1f64 * (10.0f64 / 1.1).powf(rng.gen::<f64>());
    let s_mag: f64 = rng.gen_range(0.3..3.0);
    let s_arg: f64 = rng.gen_range(-PI..PI);
    (Complex64::from_polar(s_mag, s_arg), s_mag / ratio)
}

fn random_scene(rng: &mut ChaCha8Rng) -> MultipathScene {
    let (static_2, dyn_amp_2) = random_denominator(rng);
    MultipathScene {
        wavelength_m: 0.121,
        static_1: Complex64::from_polar(rng.gen_range(0.3..2.0), rng.gen_range(-PI..PI)),
        static_2,
        dyn_amp_1: rng.gen_range(0.1..1.5),
        dyn_amp_2,
        path_delta_m: rng.gen_range(-0.04..0.04),
        trajectory: Trajectory::ConstantSpeed {
            start_m: 0.0,
            speed_mps: 0.02,
        },
    }
}

/// Criterion 1: the quadrature value of the envelope-product constant
/// matches the closed form (|s|+a)(|s|-a) to 1e-6 relative over 100 seeded
/// scenes, in under 5 seconds.
#[test]
fn criterion_1_envelope_product_identity() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (s2, a2) = random_denominator(&mut rng);
        let k = integral_k_oracle(s2, a2, 1 << 14).unwrap();
        let expected = (s2.norm() + a2) * (s2.norm() - a2);
        worst = worst.max((k - expected).abs() / expected);
    }
    let elapsed = started.elapsed();
    assert!(worst < 1e-6, "worst relative deviation {worst}");
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    println!(
        "ACCEPTANCE 1 PASS envelope-product identity: worst rel dev {worst:.2e} over 100 scenes in {elapsed:?}"
    );
}

/// Criterion 2: finite-difference dphi/dtheta matches k/|H2(theta)|^2 to
/// 1e-4 relative on a 1e5-point grid for 20 seeded scenes, in under 10 s.
#[test]
fn criterion_2_differential_mapping_identity() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let n = 100_000;
    let grid: Vec<f64> = (0..n).map(|i| i as f64 * 2.0 * PI / n as f64).collect();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let scene = random_scene(&mut rng);
        let deriv = differential_mapping_oracle(&scene, &grid).unwrap();
        let k = scene.static_2.norm_sqr() - scene.dyn_amp_2 * scene.dyn_amp_2;
        for (i, &theta) in grid.iter().enumerate() {
            let h2 = scene.static_2 + Complex64::from_polar(scene.dyn_amp_2, theta);
            let expected = k / h2.norm_sqr();
            worst = worst.max((deriv[i] - expected).abs() / expected);
        }
    }
    let elapsed = started.elapsed();
    assert!(worst < 1e-4, "worst relative deviation {worst}");
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    println!(
        "ACCEPTANCE 2 PASS differential mapping identity: worst rel dev {worst:.2e} over 20 scenes in {elapsed:?}"
    );
}

fn acceptance_scene(wavelength_m: f64, start_m: f64) -> MultipathScene {
    MultipathScene {
        wavelength_m,
        static_1: Complex64::from_polar(0.9, -1.1),
        static_2: Complex64::from_polar(1.0, 0.3),
        dyn_amp_1: 0.55,
        dyn_amp_2: 0.72,
        path_delta_m: 0.013,
        trajectory: Trajectory::ConstantSpeed {
            start_m,
            speed_mps: 0.02,
        },
    }
}

/// Criterion 3: a noise-free ratio trace fits a circle with rms residual
/// below 1e-9 of the radius, and one wavelength of motion winds the ratio
/// exactly once. Under 1 second.
#[test]
fn criterion_3_circularity_and_winding() {
    let started = Instant::now();
    let scene = acceptance_scene(0.121, 0.0);
    let ts: Vec<f64> = (0..=6050).map(|i| i as f64 * 1e-3).collect();
    let (h1, h2) = synthesize_ideal(&scene, &ts).unwrap();
    let ratio = compute_ratio(&h1, &h2).unwrap();
    let circle = fit_circle(ratio.samples()).unwrap();
    assert!(
        circle.rms_residual < 1e-9 * circle.radius,
        "residual {} radius {}",
        circle.rms_residual,
        circle.radius
    );
    let angles = extract_rotation(&ratio, &circle).unwrap();
    let turns = (angles.total_rotation() / (2.0 * PI)).round() as i64;
    assert_eq!(turns.abs(), 1);
    assert!((angles.total_rotation().abs() - 2.0 * PI).abs() < 1e-6);

    let table = phase_of_theta(&scene, GridSpec::new(8192).unwrap()).unwrap();
    assert_eq!(table.winding_number(), 1);

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    println!(
        "ACCEPTANCE 3 PASS circularity: residual/radius {:.2e}, winding 1, in {elapsed:?}",
        circle.rms_residual / circle.radius
    );
}

fn scene_config(wavelength_m: f64, start_m: f64, duration_s: f64, seed: u64) -> PipelineConfig {
    let mut cfg = PipelineConfig::default();
    cfg.set("wavelength_m", &wavelength_m.to_string()).unwrap();
    cfg.set("start_m", &start_m.to_string()).unwrap();
    cfg.set("duration_s", &duration_s.to_string()).unwrap();
    cfg.set("seed", &seed.to_string()).unwrap();
    cfg
}

/// Criterion 4: for displacements of exactly n wavelengths (n = 1..5), the
/// baseline and corrected totals both land within 0.5 mm of n*lambda,
/// noise-free, in under 5 seconds.
#[test]
fn criterion_4_full_cycle_totals() {
    let started = Instant::now();
    let lambda = 0.121;
    let mut worst = 0.0f64;
    for n in 1..=5u32 {
        let duration = n as f64 * lambda / 0.02;
        let cfg = scene_config(lambda, 0.0245, duration, 1);
        let report = run_pipeline(&cfg);
        assert!(report.failure.is_none(), "n={n}: {:?}", report.failure);
        let expected = n as f64 * lambda;
        let be = (report.baseline.as_ref().unwrap().final_value() - expected).abs();
        let ce = (report.corrected.as_ref().unwrap().final_value() - expected).abs();
        assert!(be < 5e-4, "n={n} baseline off by {be} m");
        assert!(ce < 5e-4, "n={n} corrected off by {ce} m");
        worst = worst.max(be).max(ce);
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}");
    println!(
        "ACCEPTANCE 4 PASS full-cycle totals: worst deviation {worst:.2e} m over n=1..5 in {elapsed:?}"
    );
}

/// Criterion 5: 20 cm at 2 cm/s, lambda 12.1 cm, 1 kHz. Noise-free the
/// corrected error stays under 0.1 cm while the baseline exceeds 2 cm
/// somewhere; at 30 dB SNR the corrected error stays under 0.5 cm.
/// Under 30 seconds.
#[test]
fn criterion_5_subwavelength_recovery_wifi() {
    let started = Instant::now();
    let cfg = scene_config(0.121, 0.0245, 10.0, 7);
    let report = run_pipeline(&cfg);
    assert!(report.failure.is_none(), "{:?}", report.failure);
    let corrected = report.corrected_metrics.unwrap();
    let baseline = report.baseline_metrics.unwrap();
    assert!(
        corrected.max_abs_m < 1e-3,
        "noise-free corrected max {} m",
        corrected.max_abs_m
    );
    assert!(
        baseline.max_abs_m > 2e-2,
        "noise-free baseline max {} m",
        baseline.max_abs_m
    );

    let mut noisy_cfg = scene_config(0.121, 0.0245, 10.0, 7);
    noisy_cfg.set("snr_db", "30").unwrap();
    let noisy = run_pipeline(&noisy_cfg);
    assert!(noisy.failure.is_none(), "{:?}", noisy.failure);
    let noisy_corrected = noisy.corrected_metrics.unwrap();
    assert!(
        noisy_corrected.max_abs_m < 5e-3,
        "30 dB corrected max {} m",
        noisy_corrected.max_abs_m
    );

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!(
        "ACCEPTANCE 5 PASS wifi-band recovery: noise-free corrected {:.2e} m / baseline {:.2e} m, 30 dB corrected {:.2e} m, in {elapsed:?}",
        corrected.max_abs_m, baseline.max_abs_m, noisy_corrected.max_abs_m
    );
}

/// Criterion 6: same motion at lambda 32.8 cm and 30 dB SNR: corrected max
/// error under 1.5 cm while the baseline exceeds 5 cm. Under 30 seconds.
#[test]
fn criterion_6_subwavelength_recovery_long_wavelength() {
    let started = Instant::now();
    let mut cfg = scene_config(0.328, 0.0663, 10.0, 7);
    cfg.set("snr_db", "30").unwrap();
    let report = run_pipeline(&cfg);
    assert!(report.failure.is_none(), "{:?}", report.failure);
    let corrected = report.corrected_metrics.unwrap();
    let baseline = report.baseline_metrics.unwrap();
    assert!(
        corrected.max_abs_m < 1.5e-2,
        "corrected max {} m",
        corrected.max_abs_m
    );
    assert!(
        baseline.max_abs_m > 5e-2,
        "baseline max {} m",
        baseline.max_abs_m
    );
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    println!(
        "ACCEPTANCE 6 PASS long-wavelength recovery: corrected {:.2e} m, baseline {:.2e} m, in {elapsed:?}",
        corrected.max_abs_m, baseline.max_abs_m
    );
}

/// Criterion 7: a window covering only half a rotation cycle still yields
/// the envelope extrema: within 2% noise-free, within 5% at 30 dB SNR.
#[test]
fn criterion_7_envelope_under_partial_motion() {
    let s2 = Complex64::from_polar(2.0, 0.3);
    let (true_max, true_min) = (3.0, 1.0);
    let n = 1000usize;
    let omega = PI; // half a cycle over the 1 s window
    let beta = 0.7;
    let ts: Vec<f64> = (0..n).map(|i| i as f64 * 1e-3).collect();
    let clean: Vec<Complex64> = ts
        .iter()
        .map(|&t| s2 + Complex64::from_polar(1.0, omega * t + beta))
        .collect();

    let fit_chain = |samples: &[Complex64]| {
        let mags: Vec<f64> = samples.iter().map(|z| z.norm()).collect();
        let series = AmplitudeSeries::new(ts.clone(), mags).unwrap();
        let filtered = hampel_filter(&series, 5, 3.0).unwrap();
        let width = adaptive_width(noise_ratio(samples));
        let smoothed = moving_average(filtered.magnitude(), width);
        fit_envelope(&AmplitudeSeries::new(ts.clone(), smoothed).unwrap()).unwrap()
    };

    let env = fit_chain(&clean);
    let clean_max_err = (env.max_amp - true_max).abs() / true_max;
    let clean_min_err = (env.min_amp - true_min).abs() / true_min;
    assert!(clean_max_err < 0.02, "noise-free max err {clean_max_err}");
    assert!(clean_min_err < 0.02, "noise-free min err {clean_min_err}");

    let power: f64 = clean.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
    let sigma = (power / 1e3 / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let normal = Normal::new(0.0, sigma).unwrap();
    let noisy: Vec<Complex64> = clean
        .iter()
        .map(|z| z + Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect();
    let env = fit_chain(&noisy);
    let noisy_max_err = (env.max_amp - true_max).abs() / true_max;
    let noisy_min_err = (env.min_amp - true_min).abs() / true_min;
    assert!(noisy_max_err < 0.05, "30 dB max err {noisy_max_err}");
    assert!(noisy_min_err < 0.05, "30 dB min err {noisy_min_err}");

    println!(
        "ACCEPTANCE 7 PASS partial-motion envelope: noise-free errs ({clean_max_err:.2e}, {clean_min_err:.2e}), 30 dB errs ({noisy_max_err:.2e}, {noisy_min_err:.2e})"
    );
}

/// Criterion 8: on noise-free data the output files are bit-identical with
/// clock offsets enabled or disabled, for any offset seed, because the
/// ratio cancels the common factor.
#[test]
fn criterion_8_offset_cancellation_invariance() {
    let dir = tempfile::tempdir().unwrap();
    let run_with = |name: &str, cfo: f64, sfo: f64, jitter: f64, seed: u64| {
        let mut cfg = scene_config(0.121, 0.0245, 10.0, seed);
        cfg.set("cfo_hz", &cfo.to_string()).unwrap();
        cfg.set("sfo_ppm", &sfo.to_string()).unwrap();
        cfg.set("jitter_rad_std", &jitter.to_string()).unwrap();
        let report = run_pipeline(&cfg);
        assert!(report.failure.is_none(), "{name}: {:?}", report.failure);
        let out = dir.path().join(name);
        emit_outputs(&report, &out).unwrap();
        out
    };
    let reference = run_with("disabled", 0.0, 0.0, 0.0, 7);
    for (name, cfo, sfo, jitter, seed) in [
        ("enabled_a", 137.3, 12.0, 0.05, 7),
        ("enabled_b", -81.7, -20.0, 0.4, 1234),
        ("enabled_c", 5.0, 3.0, 1.1, 998877),
    ] {
        let out = run_with(name, cfo, sfo, jitter, seed);
        // metrics.txt echoes the seed, so it can only be compared for the
        // run that shares the reference seed
        let files: &[&str] = if seed == 7 {
            &["displacement.csv", "windows.csv", "metrics.txt"]
        } else {
            &["displacement.csv", "windows.csv"]
        };
        for file in files {
            let a = std::fs::read(reference.join(file)).unwrap();
            let b = std::fs::read(out.join(file)).unwrap();
            assert_eq!(a, b, "{file} differs for {name}");
        }
    }
    println!(
        "ACCEPTANCE 8 PASS offset cancellation: outputs byte-identical across 3 offset settings"
    );
}

/// Criterion 9: identical config and seed give byte-identical outputs, and
/// the trace CSV round-trips exactly at 17 significant digits.
#[test]
fn criterion_9_determinism_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = scene_config(0.121, 0.0245, 10.0, 42);
    cfg.set("snr_db", "30").unwrap();
    cfg.set("cfo_hz", "59.0").unwrap();
    cfg.set("jitter_rad_std", "0.2").unwrap();
    let d1 = dir.path().join("run1");
    let d2 = dir.path().join("run2");
    emit_outputs(&run_pipeline(&cfg), &d1).unwrap();
    emit_outputs(&run_pipeline(&cfg), &d2).unwrap();
    for file in ["displacement.csv", "metrics.txt", "windows.csv"] {
        let a = std::fs::read(d1.join(file)).unwrap();
        let b = std::fs::read(d2.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }

    // trace round trip at full precision
    let scene = acceptance_scene(0.121, 0.0245);
    let ts: Vec<f64> = (0..=4000).map(|i| i as f64 * 1e-3).collect();
    let (h1, h2) = synthesize_ideal(&scene, &ts).unwrap();
    let h1 = subwave_core::channel::add_awgn(&h1, 25.0, 5).unwrap();
    let truth: Vec<f64> = ts.iter().map(|&t| 0.02 * t).collect();
    let path = dir.path().join("trace.csv");
    write_trace_csv(&path, &h1, &h2, Some(&truth)).unwrap();
    let (r1, r2, rtruth) = ingest_trace_csv(&path).unwrap();
    assert_eq!(r1.samples(), h1.samples());
    assert_eq!(r2.samples(), h2.samples());
    assert_eq!(r1.timestamps(), h1.timestamps());
    assert_eq!(rtruth.unwrap(), truth);

    println!("ACCEPTANCE 9 PASS determinism and 17-digit trace round trip");
}
