//! End-to-end pipeline: traces in, displacement series and diagnostics out.
//!
//! Stage order: acquire traces (simulate or ingest), channel ratio, circle
//! fits, rotation extraction, amplitude filtering, envelope estimation,
//! increment correction, displacement accumulation. Each stage's outputs
//! stay in the report even when a later stage fails, and the failing stage
//! is named.
//!
//! The derived ratio and amplitude streams are quantized to f32 precision
//! on entry. Channel measurements carry far less than 24 bits of physical
//! precision, and pinning the streams there makes runs that differ only in
//! the (cancelled) common phase offset reproduce output files byte for
//! byte.

use crate::config::{Mode, PipelineConfig};
use crate::report::{compute_metrics, fmt_full, fmt_meters, Metrics};
use crate::trace_io::{ingest_trace_csv, write_trace_csv, TraceIoError};
use num_complex::Complex64;
use std::io::Write;
use std::path::{Path, PathBuf};
use subwave_core::channel::{add_awgn, apply_clock_offsets, synthesize_ideal, ChannelTrace};
use subwave_core::envelope::{calibrate_k_scale, fit_envelope, EnvelopeError, ScaleCalibration};
use subwave_core::ratio::{
    compute_ratio_with_floor, extract_rotation_assigned, fit_circle, refine_circle, RatioCircle,
};
use subwave_core::recovery::{
    accumulate_displacement, correct_increments, hampel_filter, AmplitudeEnvelope, AmplitudeSeries,
    DisplacementSeries, MethodTag,
};
use subwave_core::smoothing::{
    adaptive_width, moving_average, moving_average_complex, noise_ratio,
};
use subwave_core::window::WindowGrid;

/// Minimum ratio-arc a window must subtend for its own circle fit to be
/// trusted.
const MIN_WINDOW_ARC_RAD: f64 = 0.6;
/// Residual gate for per-window circle fits, as a fraction of the radius.
const MAX_WINDOW_RESIDUAL_FRACTION: f64 = 0.25;
/// Center-agreement gate against the whole-trace circle.
const MAX_CENTER_DISAGREEMENT_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Simulate,
    Ratio,
    CircleFit,
    Rotation,
    AmplitudeFilter,
    EnvelopeFit,
    Correction,
    Accumulation,
    Emit,
}

impl Stage {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Simulate => "simulate",
            Stage::Ratio => "ratio",
            Stage::CircleFit => "circle_fit",
            Stage::Rotation => "rotation",
            Stage::AmplitudeFilter => "amplitude_filter",
            Stage::EnvelopeFit => "envelope_fit",
            Stage::Correction => "correction",
            Stage::Accumulation => "accumulation",
            Stage::Emit => "emit",
        }
    }
}

/// Coarse error class, mapped to the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// Bad input or configuration (exit 2).
    Input,
    /// Numeric or domain failure inside the pipeline (exit 3).
    Numeric,
    /// Filesystem problem (exit 4).
    Io,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageFailure {
    pub stage: Stage,
    pub kind: FailureKind,
    pub message: String,
}

/// Per-window circle and envelope diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowDiagnostics {
    pub index: usize,
    pub start_s: f64,
    pub end_s: f64,
    pub n_samples: usize,
    pub circle: Option<RatioCircle>,
    pub circle_refit: bool,
    pub envelope: Option<AmplitudeEnvelope>,
    pub envelope_static: bool,
}

/// Everything a run produced, including partial results on failure.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunReport {
    pub mode: Option<Mode>,
    pub seed: u64,
    pub wavelength_m: f64,
    pub n_samples: usize,
    pub ratio_samples_dropped: usize,
    pub smoothing_window: usize,
    pub global_circle: Option<RatioCircle>,
    pub windows: Vec<WindowDiagnostics>,
    pub k_scale: Option<ScaleCalibration>,
    pub baseline: Option<DisplacementSeries>,
    pub corrected: Option<DisplacementSeries>,
    pub truth: Option<Vec<f64>>,
    pub baseline_metrics: Option<Metrics>,
    pub corrected_metrics: Option<Metrics>,
    pub traces: Option<(ChannelTrace, ChannelTrace, Option<Vec<f64>>)>,
    pub failure: Option<StageFailure>,
}

impl RunReport {
    fn fail(&mut self, stage: Stage, kind: FailureKind, message: String) {
        self.failure = Some(StageFailure {
            stage,
            kind,
            message,
        });
    }
}

fn quantize_f32(x: f64) -> f64 {
    x as f32 as f64
}

fn quantize_complex(z: Complex64) -> Complex64 {
    Complex64::new(quantize_f32(z.re), quantize_f32(z.im))
}

fn ingest_kind(err: &TraceIoError) -> FailureKind {
    match err {
        TraceIoError::Io(_) => FailureKind::Io,
        _ => FailureKind::Input,
    }
}

/// Arc subtended by `samples` about `center`, via unwrapped angles.
fn arc_span(samples: &[Complex64], center: Complex64) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut acc = 0.0;
    let mut prev = 0.0;
    for (i, z) in samples.iter().enumerate() {
        let raw = (z - center).arg();
        if i == 0 {
            acc = raw;
        } else {
            acc += subwave_core::ratio::wrap_angle(raw - prev);
        }
        prev = raw;
        lo = lo.min(acc);
        hi = hi.max(acc);
    }
    hi - lo
}

fn acquire_traces(
    config: &PipelineConfig,
    report: &mut RunReport,
) -> Option<(ChannelTrace, ChannelTrace, Option<Vec<f64>>, bool)> {
    match config.mode {
        Mode::Ingest => {
            let path = config.trace.as_ref().expect("validated");
            match ingest_trace_csv(path) {
                Ok((h1, h2, truth)) => Some((h1, h2, truth, true)),
                Err(e) => {
                    report.fail(Stage::Ingest, ingest_kind(&e), e.to_string());
                    None
                }
            }
        }
        Mode::Simulate => {
            let sim = &config.simulate;
            let scene = match sim.build_scene(config.wavelength_m) {
                Ok(s) => s,
                Err(e) => {
                    report.fail(Stage::Simulate, FailureKind::Input, e.to_string());
                    return None;
                }
            };
            let n = (sim.duration_s * config.sample_rate_hz).round() as usize;
            if n < 2 {
                report.fail(
                    Stage::Simulate,
                    FailureKind::Input,
                    format!("duration {} s gives {} samples", sim.duration_s, n),
                );
                return None;
            }
            let ts: Vec<f64> = (0..=n).map(|i| i as f64 / config.sample_rate_hz).collect();
            let (h1, h2) = match synthesize_ideal(&scene, &ts) {
                Ok(pair) => pair,
                Err(e) => {
                    report.fail(Stage::Simulate, FailureKind::Numeric, e.to_string());
                    return None;
                }
            };
            let model = sim.clock_model(config.seed);
            let apply = |trace: &ChannelTrace| apply_clock_offsets(trace, &model);
            let (h1, h2) = match (apply(&h1), apply(&h2)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => {
                    report.fail(Stage::Simulate, FailureKind::Input, e.to_string());
                    return None;
                }
            };
            let (h1, h2) = match sim.snr_db {
                None => (h1, h2),
                Some(snr) => {
                    let na = add_awgn(&h1, snr, config.seed.wrapping_add(0x5eed_0001));
                    let nb = add_awgn(&h2, snr, config.seed.wrapping_add(0x5eed_0002));
                    match (na, nb) {
                        (Ok(a), Ok(b)) => (a, b),
                        (Err(e), _) | (_, Err(e)) => {
                            report.fail(Stage::Simulate, FailureKind::Numeric, e.to_string());
                            return None;
                        }
                    }
                }
            };
            let truth: Vec<f64> = {
                let d0 = scene.trajectory.position(ts[0]);
                ts.iter()
                    .map(|&t| scene.trajectory.position(t) - d0)
                    .collect()
            };
            Some((h1, h2, Some(truth), scene.is_amplitude_recoverable()))
        }
    }
}

/// Per-window circles with reliability gating.
///
/// A window keeps its own refitted circle only when the fit is clean and
/// agrees with the whole-trace circle; otherwise the previous accepted
/// circle (or the global one) stands in. Noise-free traces pass the gates
/// everywhere, so the windowed behavior is unchanged where it is exact.
fn windowed_circles(
    grid: &WindowGrid,
    timestamps: &[f64],
    smoothed: &[Complex64],
    global: &RatioCircle,
) -> (Vec<RatioCircle>, Vec<(Option<RatioCircle>, bool)>) {
    let mut chosen = Vec::with_capacity(grid.len());
    let mut diags = Vec::with_capacity(grid.len());
    let mut prev: Option<RatioCircle> = None;
    for k in 0..grid.len() {
        let range = grid.sample_range(k, timestamps);
        let slice = &smoothed[range];
        let mut accepted = None;
        let mut fitted = None;
        if slice.len() >= 3 {
            if let Ok(init) = fit_circle(slice) {
                let refined = refine_circle(slice, &init);
                fitted = Some(refined);
                let arc = arc_span(slice, refined.center);
                let clean = arc >= MIN_WINDOW_ARC_RAD
                    && refined.rms_residual <= MAX_WINDOW_RESIDUAL_FRACTION * refined.radius
                    && (refined.center - global.center).norm()
                        <= MAX_CENTER_DISAGREEMENT_FRACTION * global.radius;
                if clean {
                    accepted = Some(refined);
                }
            }
        }
        let used = match accepted {
            Some(c) => {
                prev = Some(c);
                c
            }
            None => prev.unwrap_or(*global),
        };
        diags.push((fitted, accepted.is_some()));
        chosen.push(used);
    }
    (chosen, diags)
}

/// Envelope route when the whole-trace scale calibration is unavailable:
/// the windowed fits stand on their own, static windows reuse the latest
/// valid envelope.
fn resolve_windowed_envelopes(
    fits: &[Option<AmplitudeEnvelope>],
    grid: &WindowGrid,
) -> Vec<Option<AmplitudeEnvelope>> {
    let mut resolved = Vec::with_capacity(fits.len());
    let mut last: Option<AmplitudeEnvelope> = None;
    for (k, fit) in fits.iter().enumerate() {
        let out = match fit {
            Some(env) => {
                last = Some(*env);
                Some(*env)
            }
            None => last.map(|env| {
                let (start, end) = grid.bounds(k);
                AmplitudeEnvelope {
                    window_start: start,
                    window_end: end,
                    ..env
                }
            }),
        };
        resolved.push(out);
    }
    resolved
}

/// Runs the configured pipeline. Always returns a report; on failure it
/// holds the failing stage and everything computed before it.
pub fn run_pipeline(config: &PipelineConfig) -> RunReport {
    let mut report = RunReport {
        seed: config.seed,
        wavelength_m: config.wavelength_m,
        ..RunReport::default()
    };
    if let Err(e) = config.validate() {
        report.fail(Stage::Config, FailureKind::Input, e.to_string());
        return report;
    }
    report.mode = Some(config.mode);

    let Some((h1, h2, truth, recoverable)) = acquire_traces(config, &mut report) else {
        return report;
    };
    if config.dump_trace {
        report.traces = Some((h1.clone(), h2.clone(), truth.clone()));
    }
    // the denominator antenna supplies the amplitude stream
    let (h1, h2) = if config.denominator_antenna == 1 {
        (h2, h1)
    } else {
        (h1, h2)
    };
    report.n_samples = h1.len();

    // ratio and amplitude streams, quantized to measurement precision
    let ratio = match compute_ratio_with_floor(&h1, &h2, config.magnitude_floor) {
        Ok(r) => r,
        Err(e) => {
            report.fail(Stage::Ratio, FailureKind::Numeric, e.to_string());
            return report;
        }
    };
    report.ratio_samples_dropped = ratio.dropped().len();
    let gated: Vec<Complex64> = ratio
        .samples()
        .iter()
        .map(|&z| quantize_complex(z))
        .collect();
    let ratio = ratio.with_samples(gated);
    let mut kept_amp: Vec<f64> = Vec::with_capacity(ratio.len());
    {
        let dropped = ratio.dropped();
        let mut d = 0usize;
        for (i, s) in h2.samples().iter().enumerate() {
            if d < dropped.len() && dropped[d] == i {
                d += 1;
                continue;
            }
            kept_amp.push(quantize_f32(s.norm()));
        }
    }
    let truth_kept: Option<Vec<f64>> = truth.map(|tr| {
        let dropped = ratio.dropped();
        let mut d = 0usize;
        let mut out = Vec::with_capacity(ratio.len());
        for (i, v) in tr.iter().enumerate() {
            if d < dropped.len() && dropped[d] == i {
                d += 1;
                continue;
            }
            out.push(*v);
        }
        out
    });
    report.truth = truth_kept;

    // noise-adaptive smoothing for the geometry stages
    let width = adaptive_width(noise_ratio(ratio.samples()));
    report.smoothing_window = width;
    let smoothed = moving_average_complex(ratio.samples(), width);
    let ratio_smooth = ratio.with_samples(smoothed);

    // circles: whole-trace fit anchors the gated per-window refits
    let ts = ratio_smooth.timestamps();
    let t0 = ts[0];
    let t_end = ts[ts.len() - 1];
    let global = match fit_circle(ratio_smooth.samples()) {
        Ok(init) => refine_circle(ratio_smooth.samples(), &init),
        Err(e) => {
            report.fail(Stage::CircleFit, FailureKind::Numeric, e.to_string());
            return report;
        }
    };
    report.global_circle = Some(global);
    let grid = WindowGrid::new(t0, t_end, config.window_s, config.hop_s);
    let (circles, circle_diags) = windowed_circles(&grid, ts, ratio_smooth.samples(), &global);
    for (k, diag) in circle_diags.iter().enumerate() {
        let (start, end) = grid.bounds(k);
        report.windows.push(WindowDiagnostics {
            index: k,
            start_s: start,
            end_s: end,
            n_samples: grid.sample_range(k, ts).len(),
            circle: diag.0,
            circle_refit: diag.1,
            envelope: None,
            envelope_static: false,
        });
    }

    // rotation of the ratio about the assigned window circles
    let assignment: Vec<usize> = (0..ratio_smooth.len() - 1)
        .map(|i| grid.index_for(0.5 * (ts[i] + ts[i + 1])))
        .collect();
    let angles = match extract_rotation_assigned(&ratio_smooth, &circles, &assignment) {
        Ok(a) => a,
        Err(e) => {
            report.fail(Stage::Rotation, FailureKind::Numeric, e.to_string());
            return report;
        }
    };

    // baseline displacement comes straight from the ratio rotation
    match accumulate_displacement(&angles, config.wavelength_m, MethodTag::Baseline) {
        Ok(d) => report.baseline = Some(d),
        Err(e) => {
            report.fail(Stage::Accumulation, FailureKind::Numeric, e.to_string());
            return report;
        }
    }

    // amplitude chain: outlier filter, then the same smoothing width
    let amps_raw = match AmplitudeSeries::new(ts.to_vec(), kept_amp) {
        Ok(a) => a,
        Err(e) => {
            report.fail(Stage::AmplitudeFilter, FailureKind::Numeric, e.to_string());
            finish_metrics(&mut report);
            return report;
        }
    };
    let amps_filt = match hampel_filter(&amps_raw, config.hampel_half_window, config.hampel_n_mad) {
        Ok(a) => a,
        Err(e) => {
            report.fail(Stage::AmplitudeFilter, FailureKind::Input, e.to_string());
            finish_metrics(&mut report);
            return report;
        }
    };
    let amps_smooth_vec = moving_average(amps_filt.magnitude(), width);
    let amps_smooth = AmplitudeSeries::new(ts.to_vec(), amps_smooth_vec).expect("finite");

    if !recoverable {
        report.fail(
            Stage::EnvelopeFit,
            FailureKind::Numeric,
            "scene dynamic component is not dominated by the static component; amplitude recovery undefined".into(),
        );
        finish_metrics(&mut report);
        return report;
    }

    // per-window envelope fits (diagnostics and fallback route)
    let mut window_fits: Vec<Option<AmplitudeEnvelope>> = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let range = grid.sample_range(k, ts);
        let (env, is_static) = if range.len() < 8 {
            (None, false)
        } else {
            match fit_envelope(&amps_smooth.slice(range)) {
                Ok(env) => (Some(env), false),
                Err(EnvelopeError::StaticWindow { .. }) => (None, true),
                Err(_) => (None, false),
            }
        };
        report.windows[k].envelope = env;
        report.windows[k].envelope_static = is_static;
        window_fits.push(env);
    }

    // whole-trace scale calibration; the windowed fits stand in when the
    // trace holds too little rotation for it
    let sq: Vec<f64> = amps_smooth.magnitude().iter().map(|&a| a * a).collect();
    let mid_sq: Vec<f64> = amps_smooth
        .magnitude()
        .windows(2)
        .map(|w| {
            let m = 0.5 * (w[0] + w[1]);
            m * m
        })
        .collect();
    let envelopes: Vec<AmplitudeEnvelope> = match calibrate_k_scale(
        &sq,
        &mid_sq,
        angles.increments_rad(),
    ) {
        Ok(cal) => {
            report.k_scale = Some(cal);
            (0..grid.len())
                .map(|k| {
                    let (start, end) = grid.bounds(k);
                    let (omega, beta, rmse) = match window_fits[k] {
                        Some(e) => (e.omega_rad_s, e.beta_rad, e.fit_rmse),
                        None => (0.0, 0.0, cal.residual_rms),
                    };
                    AmplitudeEnvelope {
                        max_amp: cal.max_amp,
                        min_amp: cal.min_amp,
                        omega_rad_s: omega,
                        beta_rad: beta,
                        window_start: start,
                        window_end: end,
                        fit_rmse: rmse,
                    }
                })
                .collect()
        }
        Err(EnvelopeError::InsufficientRotation { .. })
        | Err(EnvelopeError::StaticWindow { .. }) => {
            let resolved = resolve_windowed_envelopes(&window_fits, &grid);
            if resolved.iter().all(|e| e.is_none()) {
                report.fail(
                    Stage::Correction,
                    FailureKind::Numeric,
                    "correction undefined: no window produced a usable amplitude envelope".into(),
                );
                finish_metrics(&mut report);
                return report;
            }
            if resolved.iter().any(|e| e.is_none()) {
                report.fail(
                    Stage::Correction,
                    FailureKind::Numeric,
                    "correction undefined: increments before the first valid envelope window have no envelope".into(),
                );
                finish_metrics(&mut report);
                return report;
            }
            resolved.into_iter().map(|e| e.unwrap()).collect()
        }
        Err(e) => {
            report.fail(Stage::EnvelopeFit, FailureKind::Numeric, e.to_string());
            finish_metrics(&mut report);
            return report;
        }
    };

    // correction uses the Hampel-filtered magnitudes at increment endpoints
    let corrected_angles = match correct_increments(&angles, &amps_filt, &envelopes) {
        Ok(a) => a,
        Err(e) => {
            report.fail(Stage::Correction, FailureKind::Numeric, e.to_string());
            finish_metrics(&mut report);
            return report;
        }
    };
    match accumulate_displacement(&corrected_angles, config.wavelength_m, MethodTag::Corrected) {
        Ok(d) => report.corrected = Some(d),
        Err(e) => {
            report.fail(Stage::Accumulation, FailureKind::Numeric, e.to_string());
            finish_metrics(&mut report);
            return report;
        }
    }

    finish_metrics(&mut report);
    report
}

fn finish_metrics(report: &mut RunReport) {
    let Some(truth) = &report.truth else {
        return;
    };
    if let Some(b) = &report.baseline {
        report.baseline_metrics = Some(compute_metrics(b.delta_d_m(), truth));
    }
    if let Some(c) = &report.corrected {
        report.corrected_metrics = Some(compute_metrics(c.delta_d_m(), truth));
    }
}

/// Files written by [`emit_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmitPaths {
    pub displacement: Option<PathBuf>,
    pub metrics: PathBuf,
    pub windows: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

fn write_metrics_line(
    out: &mut impl Write,
    prefix: &str,
    metrics: &Metrics,
) -> std::io::Result<()> {
    writeln!(
        out,
        "{}_max_abs_error_m = {}",
        prefix,
        fmt_full(metrics.max_abs_m)
    )?;
    writeln!(
        out,
        "{}_median_abs_error_m = {}",
        prefix,
        fmt_full(metrics.median_abs_m)
    )?;
    writeln!(
        out,
        "{}_p90_abs_error_m = {}",
        prefix,
        fmt_full(metrics.p90_abs_m)
    )?;
    Ok(())
}

/// Writes the displacement CSV, metrics summary, and per-window diagnostics
/// into `out_dir`. Partial reports produce whatever their stages reached.
pub fn emit_outputs(report: &RunReport, out_dir: &Path) -> Result<EmitPaths, std::io::Error> {
    std::fs::create_dir_all(out_dir)?;

    let mut displacement_path = None;
    if let Some(baseline) = &report.baseline {
        let path = out_dir.join("displacement.csv");
        let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
        let mut header = String::from("t,d_baseline");
        if report.corrected.is_some() {
            header.push_str(",d_corrected");
        }
        if report.truth.is_some() {
            header.push_str(",d_truth");
        }
        writeln!(out, "{header}")?;
        for i in 0..baseline.len() {
            let mut row = format!(
                "{:.6},{}",
                baseline.timestamps()[i],
                fmt_meters(baseline.delta_d_m()[i])
            );
            if let Some(c) = &report.corrected {
                row.push(',');
                row.push_str(&fmt_meters(c.delta_d_m()[i]));
            }
            if let Some(tr) = &report.truth {
                row.push(',');
                row.push_str(&fmt_meters(tr[i]));
            }
            writeln!(out, "{row}")?;
        }
        out.flush()?;
        displacement_path = Some(path);
    }

    let metrics_path = out_dir.join("metrics.txt");
    {
        let mut out = std::io::BufWriter::new(std::fs::File::create(&metrics_path)?);
        if let Some(mode) = report.mode {
            writeln!(out, "mode = {}", mode.as_str())?;
        }
        writeln!(out, "seed = {}", report.seed)?;
        writeln!(out, "wavelength_m = {}", fmt_full(report.wavelength_m))?;
        writeln!(out, "samples = {}", report.n_samples)?;
        writeln!(
            out,
            "ratio_samples_dropped = {}",
            report.ratio_samples_dropped
        )?;
        writeln!(
            out,
            "smoothing_window_samples = {}",
            report.smoothing_window
        )?;
        writeln!(out, "circle_windows = {}", report.windows.len())?;
        writeln!(
            out,
            "circle_windows_refit = {}",
            report.windows.iter().filter(|w| w.circle_refit).count()
        )?;
        if let Some(cal) = &report.k_scale {
            writeln!(out, "k_scale = {}", fmt_full(cal.k))?;
            writeln!(out, "k_scale_implied = {}", fmt_full(cal.implied_k))?;
            writeln!(out, "envelope_max_amp = {}", fmt_full(cal.max_amp))?;
            writeln!(out, "envelope_min_amp = {}", fmt_full(cal.min_amp))?;
        }
        if let Some(f) = &report.failure {
            writeln!(out, "failure_stage = {}", f.stage.as_str())?;
            writeln!(out, "failure_message = {}", f.message)?;
        }
        match (&report.truth, &report.baseline_metrics) {
            (Some(_), Some(m)) => {
                writeln!(out, "ground_truth = present")?;
                write_metrics_line(&mut out, "baseline", m)?;
                if let Some(c) = &report.corrected_metrics {
                    write_metrics_line(&mut out, "corrected", c)?;
                }
            }
            _ => {
                writeln!(out, "metrics = no ground truth")?;
            }
        }
        out.flush()?;
    }

    let mut windows_path = None;
    if !report.windows.is_empty() {
        let path = out_dir.join("windows.csv");
        let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
        writeln!(
            out,
            "window,start_s,end_s,n_samples,circle_re,circle_im,circle_radius,circle_rms,circle_refit,env_max,env_min,env_omega,env_beta,env_rmse,env_static"
        )?;
        for w in &report.windows {
            let (cre, cim, cr, crms) = match &w.circle {
                Some(c) => (
                    fmt_meters(c.center.re),
                    fmt_meters(c.center.im),
                    fmt_meters(c.radius),
                    fmt_meters(c.rms_residual),
                ),
                None => (String::new(), String::new(), String::new(), String::new()),
            };
            let (emax, emin, eomega, ebeta, ermse) = match &w.envelope {
                Some(e) => (
                    fmt_meters(e.max_amp),
                    fmt_meters(e.min_amp),
                    fmt_meters(e.omega_rad_s),
                    fmt_meters(e.beta_rad),
                    fmt_meters(e.fit_rmse),
                ),
                None => (
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ),
            };
            writeln!(
                out,
                "{},{:.6},{:.6},{},{},{},{},{},{},{},{},{},{},{},{}",
                w.index,
                w.start_s,
                w.end_s,
                w.n_samples,
                cre,
                cim,
                cr,
                crms,
                w.circle_refit as u8,
                emax,
                emin,
                eomega,
                ebeta,
                ermse,
                w.envelope_static as u8
            )?;
        }
        out.flush()?;
        windows_path = Some(path);
    }

    let mut trace_path = None;
    if let Some((h1, h2, truth)) = &report.traces {
        let path = out_dir.join("trace.csv");
        write_trace_csv(&path, h1, h2, truth.as_deref())
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        trace_path = Some(path);
    }

    Ok(EmitPaths {
        displacement: displacement_path,
        metrics: metrics_path,
        windows: windows_path,
        trace: trace_path,
    })
}
