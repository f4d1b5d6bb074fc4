//! Amplitude-based recovery of the ideal rotation angle.
//!
//! The ratio rotation `dphi` relates to the ideal channel rotation `dtheta`
//! through the denominator amplitude alone: `dphi = k / |H2|^2 * dtheta`
//! with `k = |H2|max * |H2|min`. Given the filtered amplitude stream and a
//! per-window envelope estimate this module inverts that mapping and
//! integrates the recovered angle to a path-length change.

use crate::channel::MultipathScene;
use crate::ratio::{wrap_angle, AngleSeries, RatioCircle};
use num_complex::Complex64;
use thiserror::Error;

/// MAD-to-sigma factor for Gaussian data.
const MAD_SCALE: f64 = 1.4826;

/// `min_amp` below this fraction of `max_amp` makes the correction factor
/// meaningless (the static-dominance assumption has failed).
const ENVELOPE_PRODUCT_FLOOR: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum RecoveryError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("angle and amplitude series are not on the same timestamps")]
    TimeMisaligned,
    #[error("no envelope available for correction")]
    NoEnvelope,
    #[error("correction undefined: envelope max {max_amp}, min {min_amp} (static component does not dominate)")]
    CorrectionUndefined { max_amp: f64, min_amp: f64 },
    #[error("domain error: |static| = {static_mag} must exceed dynamic amplitude {dyn_amp}")]
    DomainError { static_mag: f64, dyn_amp: f64 },
    #[error("grid must have at least {min} points, got {got}")]
    InvalidGrid { min: usize, got: usize },
    #[error("degenerate scene: ratio trace collapses to a point")]
    DegenerateScene,
    #[error("wavelength must be > 0, got {0}")]
    InvalidWavelength(f64),
}

/// Denominator-channel amplitude stream `|H2(t)|`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSeries {
    timestamps: Vec<f64>,
    magnitude: Vec<f64>,
}

impl AmplitudeSeries {
    pub fn new(timestamps: Vec<f64>, magnitude: Vec<f64>) -> Result<Self, RecoveryError> {
        if timestamps.len() != magnitude.len() {
            return Err(RecoveryError::InvalidParameter(format!(
                "length mismatch: {} timestamps vs {} magnitudes",
                timestamps.len(),
                magnitude.len()
            )));
        }
        for (i, &m) in magnitude.iter().enumerate() {
            if !m.is_finite() || m < 0.0 {
                return Err(RecoveryError::InvalidParameter(format!(
                    "magnitude at index {i} is {m}"
                )));
            }
        }
        Ok(Self {
            timestamps,
            magnitude,
        })
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn magnitude(&self) -> &[f64] {
        &self.magnitude
    }

    pub fn len(&self) -> usize {
        self.magnitude.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitude.is_empty()
    }

    /// Sub-series covering `range`, keeping timestamps.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            timestamps: self.timestamps[range.clone()].to_vec(),
            magnitude: self.magnitude[range].to_vec(),
        }
    }
}

/// Per-window estimate of the amplitude envelope and rotation rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeEnvelope {
    pub max_amp: f64,
    pub min_amp: f64,
    pub omega_rad_s: f64,
    pub beta_rad: f64,
    pub window_start: f64,
    pub window_end: f64,
    pub fit_rmse: f64,
}

impl AmplitudeEnvelope {
    /// Mapping constant `k = max * min`.
    pub fn k(&self) -> f64 {
        self.max_amp * self.min_amp
    }
}

/// Which estimation route produced a displacement series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodTag {
    Baseline,
    Corrected,
}

impl MethodTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Baseline => "baseline",
            Self::Corrected => "corrected",
        }
    }
}

/// Cumulative path-length change in meters, anchored to 0 at the first
/// sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementSeries {
    timestamps: Vec<f64>,
    delta_d_m: Vec<f64>,
    method_tag: MethodTag,
}

impl DisplacementSeries {
    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn delta_d_m(&self) -> &[f64] {
        &self.delta_d_m
    }

    pub fn method_tag(&self) -> MethodTag {
        self.method_tag
    }

    pub fn len(&self) -> usize {
        self.delta_d_m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta_d_m.is_empty()
    }

    pub fn final_value(&self) -> f64 {
        self.delta_d_m[self.len() - 1]
    }
}

fn median_of(buf: &mut [f64]) -> f64 {
    buf.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = buf.len();
    if n % 2 == 1 {
        buf[n / 2]
    } else {
        0.5 * (buf[n / 2 - 1] + buf[n / 2])
    }
}

/// Hampel outlier filter: a sample deviating from its window median by more
/// than `n_mad` scaled MADs is replaced by that median. Edge windows are
/// truncated; inliers pass through unchanged, bit for bit.
pub fn hampel_filter(
    amps: &AmplitudeSeries,
    half_window: usize,
    n_mad: f64,
) -> Result<AmplitudeSeries, RecoveryError> {
    if half_window < 1 {
        return Err(RecoveryError::InvalidParameter(
            "half_window must be >= 1".into(),
        ));
    }
    if !(n_mad > 0.0) {
        return Err(RecoveryError::InvalidParameter("n_mad must be > 0".into()));
    }
    let x = amps.magnitude();
    let n = x.len();
    let mut out = x.to_vec();
    let mut win = Vec::with_capacity(2 * half_window + 1);
    let mut dev = Vec::with_capacity(2 * half_window + 1);
    for i in 0..n {
        let lo = i.saturating_sub(half_window);
        let hi = (i + half_window + 1).min(n);
        win.clear();
        win.extend_from_slice(&x[lo..hi]);
        let med = median_of(&mut win);
        dev.clear();
        dev.extend(x[lo..hi].iter().map(|v| (v - med).abs()));
        let mad = median_of(&mut dev);
        if (x[i] - med).abs() > n_mad * MAD_SCALE * mad {
            out[i] = med;
        }
    }
    AmplitudeSeries::new(amps.timestamps().to_vec(), out)
}

/// Rescales each ratio-angle increment to the ideal-channel increment:
/// `dtheta_i = |H2|_mid^2 / (max*min) * dphi_i`, where `|H2|_mid` is the
/// mean of the filtered magnitudes at the increment endpoints and the
/// envelope is the one whose window center is nearest the increment
/// midpoint. The corrected increments are re-accumulated from zero.
pub fn correct_increments(
    angles: &AngleSeries,
    amps: &AmplitudeSeries,
    envelopes: &[AmplitudeEnvelope],
) -> Result<AngleSeries, RecoveryError> {
    if angles.timestamps() != amps.timestamps() {
        return Err(RecoveryError::TimeMisaligned);
    }
    if envelopes.is_empty() {
        return Err(RecoveryError::NoEnvelope);
    }
    let centers: Vec<f64> = envelopes
        .iter()
        .map(|e| 0.5 * (e.window_start + e.window_end))
        .collect();
    for w in centers.windows(2) {
        if w[1] < w[0] {
            return Err(RecoveryError::InvalidParameter(
                "envelopes not sorted by window center".into(),
            ));
        }
    }
    let ts = angles.timestamps();
    let mag = amps.magnitude();
    let mut steps = Vec::with_capacity(angles.len() - 1);
    let mut cursor = 0usize;
    for i in 0..angles.len() - 1 {
        let mid_t = 0.5 * (ts[i] + ts[i + 1]);
        while cursor + 1 < centers.len()
            && (centers[cursor + 1] - mid_t).abs() < (centers[cursor] - mid_t).abs()
        {
            cursor += 1;
        }
        let env = &envelopes[cursor];
        if env.min_amp <= 0.0 || env.min_amp <= ENVELOPE_PRODUCT_FLOOR * env.max_amp {
            return Err(RecoveryError::CorrectionUndefined {
                max_amp: env.max_amp,
                min_amp: env.min_amp,
            });
        }
        let mid = 0.5 * (mag[i] + mag[i + 1]);
        steps.push(mid * mid / env.k() * angles.increments_rad()[i]);
    }
    AngleSeries::from_steps(ts.to_vec(), 0.0, &steps)
        .map_err(|_| RecoveryError::InvalidParameter("series too short".into()))
}

/// Converts an unwrapped angle series to a cumulative path-length change:
/// `delta_d(t) = -lambda * (phi(t) - phi(t0)) / (2*pi)`.
pub fn accumulate_displacement(
    angles: &AngleSeries,
    wavelength_m: f64,
    tag: MethodTag,
) -> Result<DisplacementSeries, RecoveryError> {
    if !(wavelength_m > 0.0) || !wavelength_m.is_finite() {
        return Err(RecoveryError::InvalidWavelength(wavelength_m));
    }
    let u0 = angles.unwrapped_rad()[0];
    let scale = wavelength_m / (2.0 * std::f64::consts::PI);
    let delta = angles
        .unwrapped_rad()
        .iter()
        .map(|&u| scale * (u0 - u))
        .collect();
    Ok(DisplacementSeries {
        timestamps: angles.timestamps().to_vec(),
        delta_d_m: delta,
        method_tag: tag,
    })
}

/// Numeric check of the envelope-product constant: returns
/// `2*pi / integral over a cycle of dtheta / |s + a e^{j theta}|^2`
/// by the periodic trapezoid rule. Matches `(|s|+a)(|s|-a)` analytically.
pub fn integral_k_oracle(
    static_2: Complex64,
    dyn_amp_2: f64,
    n_grid: usize,
) -> Result<f64, RecoveryError> {
    if n_grid < 1024 {
        return Err(RecoveryError::InvalidGrid {
            min: 1024,
            got: n_grid,
        });
    }
    let s_mag = static_2.norm();
    if !(s_mag > dyn_amp_2) || dyn_amp_2 < 0.0 {
        return Err(RecoveryError::DomainError {
            static_mag: s_mag,
            dyn_amp: dyn_amp_2,
        });
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let h = two_pi / n_grid as f64;
    let mut sum = 0.0;
    for i in 0..n_grid {
        let theta = i as f64 * h;
        let den = static_2 + Complex64::from_polar(dyn_amp_2, theta);
        sum += 1.0 / den.norm_sqr();
    }
    Ok(two_pi / (h * sum))
}

/// Exact center and radius of the ratio circle from the scene parameters.
///
/// The unit-circle image under `(b + a z) / (d + c z)` has a closed form;
/// this is independent of the least-squares fitter and is used by the
/// finite-difference oracle below.
pub fn exact_ratio_circle(scene: &MultipathScene) -> Result<RatioCircle, RecoveryError> {
    let s1 = scene.static_1;
    let s2 = scene.static_2;
    let a1 = scene.dyn_coeff_1();
    let a2 = scene.dyn_amp_2;
    let s2_mag = s2.norm();
    if !(s2_mag > a2) {
        return Err(RecoveryError::DomainError {
            static_mag: s2_mag,
            dyn_amp: a2,
        });
    }
    let numerator = a1 * s2 - s1 * a2;
    let scale = s1.norm().max(a1.norm()).max(s2_mag).max(a2);
    if numerator.norm() < 1e-14 * scale * scale {
        return Err(RecoveryError::DegenerateScene);
    }
    if a2 == 0.0 {
        return Ok(RatioCircle {
            center: s1 / s2,
            radius: a1.norm() / s2_mag,
            rms_residual: 0.0,
        });
    }
    let denom = s2.norm_sqr() - a2 * a2;
    let center = a1 / a2 + (s1 * a2 - a1 * s2) * s2.conj() / (a2 * denom);
    let radius = (s1 * a2 - a1 * s2).norm() / denom;
    Ok(RatioCircle {
        center,
        radius,
        rms_residual: 0.0,
    })
}

/// Finite-difference check of the differential angle mapping: evaluates the
/// exact ratio angle on `theta_grid`, differentiates numerically, and
/// returns `dphi/dtheta` per grid point for comparison against
/// `k / |H2(theta)|^2`.
pub fn differential_mapping_oracle(
    scene: &MultipathScene,
    theta_grid: &[f64],
) -> Result<Vec<f64>, RecoveryError> {
    if theta_grid.len() < 3 {
        return Err(RecoveryError::InvalidGrid {
            min: 3,
            got: theta_grid.len(),
        });
    }
    let circle = exact_ratio_circle(scene)?;
    let s1 = scene.static_1;
    let s2 = scene.static_2;
    let a1 = scene.dyn_coeff_1();
    let a2 = scene.dyn_amp_2;

    let mut phi = Vec::with_capacity(theta_grid.len());
    let mut prev_raw = 0.0;
    let mut acc = 0.0;
    for (i, &theta) in theta_grid.iter().enumerate() {
        let z = Complex64::from_polar(1.0, theta);
        let ratio = (s1 + a1 * z) / (s2 + a2 * z);
        let raw = (ratio - circle.center).arg();
        if i == 0 {
            acc = raw;
        } else {
            acc += wrap_angle(raw - prev_raw);
        }
        prev_raw = raw;
        phi.push(acc);
    }

    let n = theta_grid.len();
    let mut deriv = Vec::with_capacity(n);
    deriv.push((-3.0 * phi[0] + 4.0 * phi[1] - phi[2]) / (theta_grid[2] - theta_grid[0]));
    for i in 1..n - 1 {
        deriv.push((phi[i + 1] - phi[i - 1]) / (theta_grid[i + 1] - theta_grid[i - 1]));
    }
    deriv.push(
        (3.0 * phi[n - 1] - 4.0 * phi[n - 2] + phi[n - 3])
            / (theta_grid[n - 1] - theta_grid[n - 3]),
    );
    Ok(deriv)
}
