//! Synthetic two-antenna channel measurements.
//!
//! The channel seen by each receive antenna is modeled as a static component
//! plus one dynamic component whose phase rotates with the reflection path
//! length: `H_k(t) = H_{s,k} + A_k * exp(-j*2*pi*d_k(t)/lambda)`. Clock
//! asynchronism between transmitter and receiver multiplies both antennas by
//! the same unit phasor `exp(-j*phi_offset(t))`, which is what the
//! cross-antenna ratio later cancels.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

/// Errors from trace construction and the channel simulator.
#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("timestamps and samples have different lengths ({timestamps} vs {samples})")]
    LengthMismatch { timestamps: usize, samples: usize },
    #[error("trace must contain at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("timestamps not strictly increasing at index {0}")]
    NonMonotonicTimestamps(usize),
    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),
    #[error("non-finite trajectory value at t = {t} s")]
    NonFiniteTrajectory { t: f64 },
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("invalid clock model: {0}")]
    InvalidClockModel(String),
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
}

/// Time-stamped sequence of complex channel samples for one antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTrace {
    timestamps: Vec<f64>,
    samples: Vec<Complex64>,
}

impl ChannelTrace {
    /// Validates timestamps (strictly increasing, finite) and samples
    /// (finite, same length).
    pub fn new(timestamps: Vec<f64>, samples: Vec<Complex64>) -> Result<Self, ChannelError> {
        if timestamps.len() != samples.len() {
            return Err(ChannelError::LengthMismatch {
                timestamps: timestamps.len(),
                samples: samples.len(),
            });
        }
        if timestamps.len() < 2 {
            return Err(ChannelError::TooShort(timestamps.len()));
        }
        for (i, &t) in timestamps.iter().enumerate() {
            if !t.is_finite() {
                return Err(ChannelError::NonMonotonicTimestamps(i));
            }
            if i > 0 && t <= timestamps[i - 1] {
                return Err(ChannelError::NonMonotonicTimestamps(i));
            }
        }
        for (i, s) in samples.iter().enumerate() {
            if !s.re.is_finite() || !s.im.is_finite() {
                return Err(ChannelError::NonFiniteSample(i));
            }
        }
        Ok(Self {
            timestamps,
            samples,
        })
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Nominal sample rate from the endpoints of the timestamp grid.
    pub fn nominal_rate_hz(&self) -> f64 {
        let span = self.timestamps[self.len() - 1] - self.timestamps[0];
        (self.len() - 1) as f64 / span
    }
}

/// Target trajectory `d2(t)`: reflection path length of the denominator
/// antenna as a function of time, in meters.
#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    /// `d2(t) = start_m + speed_mps * t`
    ConstantSpeed { start_m: f64, speed_mps: f64 },
    /// Constant-speed segments walked in order; time past the last segment
    /// holds the final position.
    Piecewise {
        start_m: f64,
        segments: Vec<PiecewiseSegment>,
    },
    /// `d2(t) = offset_m + amplitude_m * sin(2*pi*freq_hz*t)`
    Sinusoidal {
        offset_m: f64,
        amplitude_m: f64,
        freq_hz: f64,
    },
}

/// One leg of a piecewise constant-speed trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiecewiseSegment {
    pub duration_s: f64,
    pub speed_mps: f64,
}

impl Trajectory {
    pub fn constant_speed(start_m: f64, speed_mps: f64) -> Result<Self, ChannelError> {
        if !start_m.is_finite() || !speed_mps.is_finite() {
            return Err(ChannelError::InvalidTrajectory(
                "non-finite parameter".into(),
            ));
        }
        Ok(Self::ConstantSpeed { start_m, speed_mps })
    }

    pub fn piecewise(start_m: f64, segments: Vec<PiecewiseSegment>) -> Result<Self, ChannelError> {
        if !start_m.is_finite() {
            return Err(ChannelError::InvalidTrajectory("non-finite start".into()));
        }
        for seg in &segments {
            if !seg.duration_s.is_finite() || seg.duration_s < 0.0 {
                return Err(ChannelError::InvalidTrajectory(format!(
                    "segment duration {} s is negative or non-finite",
                    seg.duration_s
                )));
            }
            if !seg.speed_mps.is_finite() {
                return Err(ChannelError::InvalidTrajectory(
                    "non-finite segment speed".into(),
                ));
            }
        }
        Ok(Self::Piecewise { start_m, segments })
    }

    pub fn sinusoidal(offset_m: f64, amplitude_m: f64, freq_hz: f64) -> Result<Self, ChannelError> {
        if !offset_m.is_finite() || !amplitude_m.is_finite() || !freq_hz.is_finite() {
            return Err(ChannelError::InvalidTrajectory(
                "non-finite parameter".into(),
            ));
        }
        Ok(Self::Sinusoidal {
            offset_m,
            amplitude_m,
            freq_hz,
        })
    }

    /// Path length at time `t`, in meters.
    pub fn position(&self, t: f64) -> f64 {
        match self {
            Self::ConstantSpeed { start_m, speed_mps } => start_m + speed_mps * t,
            Self::Piecewise { start_m, segments } => {
                let mut pos = *start_m;
                let mut remaining = t;
                for seg in segments {
                    if remaining <= 0.0 {
                        break;
                    }
                    let dt = remaining.min(seg.duration_s);
                    pos += seg.speed_mps * dt;
                    remaining -= seg.duration_s;
                }
                pos
            }
            Self::Sinusoidal {
                offset_m,
                amplitude_m,
                freq_hz,
            } => offset_m + amplitude_m * (2.0 * std::f64::consts::PI * freq_hz * t).sin(),
        }
    }
}

/// Static/dynamic decomposition of a two-antenna scene.
///
/// Antenna 2 is the denominator of the downstream channel ratio. Antenna 1
/// shares the same trajectory up to a constant path offset `path_delta_m`,
/// so its dynamic phasor is the antenna-2 phasor times a fixed rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipathScene {
    pub wavelength_m: f64,
    pub static_1: Complex64,
    pub static_2: Complex64,
    pub dyn_amp_1: f64,
    pub dyn_amp_2: f64,
    pub path_delta_m: f64,
    pub trajectory: Trajectory,
}

impl MultipathScene {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.wavelength_m > 0.0) || !self.wavelength_m.is_finite() {
            return Err(ChannelError::InvalidScene(format!(
                "wavelength_m must be > 0, got {}",
                self.wavelength_m
            )));
        }
        if self.dyn_amp_1 < 0.0 || self.dyn_amp_2 < 0.0 {
            return Err(ChannelError::InvalidScene(
                "dynamic amplitudes must be >= 0".into(),
            ));
        }
        for v in [
            self.static_1.re,
            self.static_1.im,
            self.static_2.re,
            self.static_2.im,
            self.dyn_amp_1,
            self.dyn_amp_2,
            self.path_delta_m,
        ] {
            if !v.is_finite() {
                return Err(ChannelError::InvalidScene("non-finite parameter".into()));
            }
        }
        Ok(())
    }

    /// Whether the denominator static component dominates its dynamic one.
    ///
    /// The amplitude-based recovery is only defined in this regime; scenes
    /// violating it are still simulatable but the recovery stage rejects
    /// them.
    pub fn is_amplitude_recoverable(&self) -> bool {
        self.static_2.norm() > self.dyn_amp_2
    }

    /// Effective antenna-1 dynamic coefficient: the antenna-1 amplitude
    /// rotated by the constant path offset between the two antennas.
    pub fn dyn_coeff_1(&self) -> Complex64 {
        let phase = -2.0 * std::f64::consts::PI * self.path_delta_m / self.wavelength_m;
        Complex64::from_polar(self.dyn_amp_1, phase)
    }
}

/// Phase-offset model shared by both antennas of one receiver.
///
/// `phi_offset(t) = 2*pi*cfo_hz*t + 2*pi*sfo_ppm*1e-6*f_nominal*t + jitter`,
/// with `f_nominal` the nominal sample rate taken from the trace timestamps
/// and the jitter i.i.d. Gaussian per sample, seeded for reproducibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockOffsetModel {
    pub cfo_hz: f64,
    pub sfo_ppm: f64,
    pub jitter_rad_std: f64,
    pub seed: u64,
}

impl ClockOffsetModel {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.jitter_rad_std >= 0.0) {
            return Err(ChannelError::InvalidClockModel(format!(
                "jitter_rad_std must be >= 0, got {}",
                self.jitter_rad_std
            )));
        }
        if !self.cfo_hz.is_finite() || !self.sfo_ppm.is_finite() {
            return Err(ChannelError::InvalidClockModel(
                "non-finite parameter".into(),
            ));
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.cfo_hz == 0.0 && self.sfo_ppm == 0.0 && self.jitter_rad_std == 0.0
    }
}

/// Synthesizes the ideal (offset-free) channel pair for a scene on the
/// given timestamps. Antenna 1 sees `d1(t) = d2(t) + path_delta_m`.
pub fn synthesize_ideal(
    scene: &MultipathScene,
    timestamps: &[f64],
) -> Result<(ChannelTrace, ChannelTrace), ChannelError> {
    scene.validate()?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut s1 = Vec::with_capacity(timestamps.len());
    let mut s2 = Vec::with_capacity(timestamps.len());
    for &t in timestamps {
        let d2 = scene.trajectory.position(t);
        if !d2.is_finite() {
            return Err(ChannelError::NonFiniteTrajectory { t });
        }
        let d1 = d2 + scene.path_delta_m;
        s1.push(
            scene.static_1
                + Complex64::from_polar(scene.dyn_amp_1, -two_pi * d1 / scene.wavelength_m),
        );
        s2.push(
            scene.static_2
                + Complex64::from_polar(scene.dyn_amp_2, -two_pi * d2 / scene.wavelength_m),
        );
    }
    let h1 = ChannelTrace::new(timestamps.to_vec(), s1)?;
    let h2 = ChannelTrace::new(timestamps.to_vec(), s2)?;
    Ok((h1, h2))
}

/// Multiplies each sample by `exp(-j*phi_offset(t_i))`.
///
/// A zero model returns the input unchanged, bit for bit. Magnitudes are
/// preserved to machine precision in all cases.
pub fn apply_clock_offsets(
    trace: &ChannelTrace,
    model: &ClockOffsetModel,
) -> Result<ChannelTrace, ChannelError> {
    model.validate()?;
    if model.is_identity() {
        return Ok(trace.clone());
    }
    let rate = trace.nominal_rate_hz();
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let jitter = Normal::new(0.0, model.jitter_rad_std.max(0.0))
        .map_err(|e| ChannelError::InvalidClockModel(e.to_string()))?;
    let mut out = Vec::with_capacity(trace.len());
    for (&t, &s) in trace.timestamps().iter().zip(trace.samples()) {
        let mut phi = two_pi * model.cfo_hz * t + two_pi * model.sfo_ppm * 1e-6 * rate * t;
        if model.jitter_rad_std > 0.0 {
            phi += jitter.sample(&mut rng);
        }
        out.push(s * Complex64::from_polar(1.0, -phi));
    }
    ChannelTrace::new(trace.timestamps().to_vec(), out)
}

/// Adds complex white Gaussian noise at the given SNR (dB) relative to the
/// trace's mean power. Seeded and deterministic.
pub fn add_awgn(
    trace: &ChannelTrace,
    snr_db: f64,
    seed: u64,
) -> Result<ChannelTrace, ChannelError> {
    let n = trace.len() as f64;
    let power: f64 = trace.samples().iter().map(|s| s.norm_sqr()).sum::<f64>() / n;
    let noise_power = power / 10f64.powf(snr_db / 10.0);
    let sigma = (noise_power / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal =
        Normal::new(0.0, sigma).map_err(|e| ChannelError::InvalidClockModel(e.to_string()))?;
    let samples = trace
        .samples()
        .iter()
        .map(|&s| s + Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect();
    ChannelTrace::new(trace.timestamps().to_vec(), samples)
}
