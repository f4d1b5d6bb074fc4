//! Pipeline configuration: a flat `key = value` file with one `[simulate]`
//! section. Every key can be overridden on the command line with
//! `--set key=value`; key names are unique across sections so no prefix is
//! needed.

use num_complex::Complex64;
use std::path::PathBuf;
use subwave_core::channel::{ClockOffsetModel, MultipathScene, PiecewiseSegment, Trajectory};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("io error reading config: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Ingest,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Ingest => "ingest",
        }
    }
}

/// Scene, clock, noise, and trajectory parameters for simulate mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateConfig {
    pub static_1: Complex64,
    pub static_2: Complex64,
    pub dyn_amp_1: f64,
    pub dyn_amp_2: f64,
    pub path_delta_m: f64,
    pub duration_s: f64,
    pub snr_db: Option<f64>,
    pub cfo_hz: f64,
    pub sfo_ppm: f64,
    pub jitter_rad_std: f64,
    pub trajectory: String,
    pub speed_mps: f64,
    pub start_m: f64,
    pub amp_m: f64,
    pub freq_hz: f64,
    pub segments: String,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            // moderately eccentric two-antenna scene
            static_1: Complex64::from_polar(0.9, -1.1),
            static_2: Complex64::from_polar(1.0, 0.3),
            dyn_amp_1: 0.55,
            dyn_amp_2: 0.72,
            path_delta_m: 0.013,
            duration_s: 10.0,
            snr_db: None,
            cfo_hz: 0.0,
            sfo_ppm: 0.0,
            jitter_rad_std: 0.0,
            trajectory: "constant_speed".into(),
            speed_mps: 0.02,
            start_m: 0.0,
            amp_m: 0.05,
            freq_hz: 0.2,
            segments: String::new(),
        }
    }
}

impl SimulateConfig {
    pub fn build_trajectory(&self) -> Result<Trajectory, ConfigError> {
        let invalid = |message: String| ConfigError::InvalidValue {
            key: "trajectory".into(),
            message,
        };
        match self.trajectory.as_str() {
            "constant_speed" => Trajectory::constant_speed(self.start_m, self.speed_mps)
                .map_err(|e| invalid(e.to_string())),
            "sinusoidal" => Trajectory::sinusoidal(self.start_m, self.amp_m, self.freq_hz)
                .map_err(|e| invalid(e.to_string())),
            "piecewise" => {
                let mut segs = Vec::new();
                for part in self.segments.split(',').filter(|s| !s.trim().is_empty()) {
                    let (dur, speed) = part
                        .split_once(':')
                        .ok_or_else(|| invalid(format!("segment `{part}` is not dur:speed")))?;
                    segs.push(PiecewiseSegment {
                        duration_s: dur.trim().parse().map_err(|_| {
                            invalid(format!("segment duration `{dur}` is not a number"))
                        })?,
                        speed_mps: speed.trim().parse().map_err(|_| {
                            invalid(format!("segment speed `{speed}` is not a number"))
                        })?,
                    });
                }
                if segs.is_empty() {
                    return Err(invalid("piecewise trajectory needs segments".into()));
                }
                Trajectory::piecewise(self.start_m, segs).map_err(|e| invalid(e.to_string()))
            }
            other => Err(invalid(format!(
                "unknown trajectory kind `{other}` (constant_speed|sinusoidal|piecewise)"
            ))),
        }
    }

    pub fn build_scene(&self, wavelength_m: f64) -> Result<MultipathScene, ConfigError> {
        let scene = MultipathScene {
            wavelength_m,
            static_1: self.static_1,
            static_2: self.static_2,
            dyn_amp_1: self.dyn_amp_1,
            dyn_amp_2: self.dyn_amp_2,
            path_delta_m: self.path_delta_m,
            trajectory: self.build_trajectory()?,
        };
        scene
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(scene)
    }

    pub fn clock_model(&self, seed: u64) -> ClockOffsetModel {
        ClockOffsetModel {
            cfo_hz: self.cfo_hz,
            sfo_ppm: self.sfo_ppm,
            jitter_rad_std: self.jitter_rad_std,
            seed,
        }
    }
}

/// Full pipeline configuration with CLI-overridable keys.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub wavelength_m: f64,
    pub sample_rate_hz: f64,
    pub window_s: f64,
    pub hop_s: f64,
    pub hampel_half_window: usize,
    pub hampel_n_mad: f64,
    pub denominator_antenna: u8,
    pub magnitude_floor: f64,
    pub seed: u64,
    pub trace: Option<PathBuf>,
    pub dump_trace: bool,
    pub simulate: SimulateConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Simulate,
            wavelength_m: 0.121,
            sample_rate_hz: 1000.0,
            window_s: 0.5,
            hop_s: 0.25,
            hampel_half_window: 5,
            hampel_n_mad: 3.0,
            denominator_antenna: 2,
            magnitude_floor: 1e-9,
            seed: 0,
            trace: None,
            dump_trace: false,
            simulate: SimulateConfig::default(),
        }
    }
}

fn parse_num(key: &str, value: &str) -> Result<f64, ConfigError> {
    value.parse::<f64>().map_err(|_| ConfigError::InvalidValue {
        key: key.into(),
        message: format!("`{value}` is not a number"),
    })
}

impl PipelineConfig {
    /// Applies one `key = value` assignment by key name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "mode" => {
                self.mode = match v {
                    "simulate" => Mode::Simulate,
                    "ingest" => Mode::Ingest,
                    other => {
                        return Err(ConfigError::InvalidValue {
                            key: key.into(),
                            message: format!("`{other}` is not simulate|ingest"),
                        })
                    }
                }
            }
            "wavelength_m" => self.wavelength_m = parse_num(key, v)?,
            "sample_rate_hz" => self.sample_rate_hz = parse_num(key, v)?,
            "window_s" => self.window_s = parse_num(key, v)?,
            "hop_s" => self.hop_s = parse_num(key, v)?,
            "hampel_half_window" => {
                self.hampel_half_window =
                    v.parse::<usize>().map_err(|_| ConfigError::InvalidValue {
                        key: key.into(),
                        message: format!("`{v}` is not a non-negative integer"),
                    })?
            }
            "hampel_n_mad" => self.hampel_n_mad = parse_num(key, v)?,
            "denominator_antenna" => {
                self.denominator_antenna =
                    v.parse::<u8>().map_err(|_| ConfigError::InvalidValue {
                        key: key.into(),
                        message: format!("`{v}` is not 1 or 2"),
                    })?
            }
            "magnitude_floor" => self.magnitude_floor = parse_num(key, v)?,
            "seed" => {
                self.seed = v.parse::<u64>().map_err(|_| ConfigError::InvalidValue {
                    key: key.into(),
                    message: format!("`{v}` is not an unsigned integer"),
                })?
            }
            "trace" => self.trace = Some(PathBuf::from(v)),
            "dump_trace" => {
                self.dump_trace = match v {
                    "true" | "1" => true,
                    "false" | "0" => false,
                    other => {
                        return Err(ConfigError::InvalidValue {
                            key: key.into(),
                            message: format!("`{other}` is not true|false"),
                        })
                    }
                }
            }
            "static_1_re" => self.simulate.static_1.re = parse_num(key, v)?,
            "static_1_im" => self.simulate.static_1.im = parse_num(key, v)?,
            "static_2_re" => self.simulate.static_2.re = parse_num(key, v)?,
            "static_2_im" => self.simulate.static_2.im = parse_num(key, v)?,
            "dyn_amp_1" => self.simulate.dyn_amp_1 = parse_num(key, v)?,
            "dyn_amp_2" => self.simulate.dyn_amp_2 = parse_num(key, v)?,
            "path_delta_m" => self.simulate.path_delta_m = parse_num(key, v)?,
            "duration_s" => self.simulate.duration_s = parse_num(key, v)?,
            "snr_db" => {
                self.simulate.snr_db = if v == "none" {
                    None
                } else {
                    Some(parse_num(key, v)?)
                }
            }
            "cfo_hz" => self.simulate.cfo_hz = parse_num(key, v)?,
            "sfo_ppm" => self.simulate.sfo_ppm = parse_num(key, v)?,
            "jitter_rad_std" => self.simulate.jitter_rad_std = parse_num(key, v)?,
            "trajectory" => self.simulate.trajectory = v.to_string(),
            "speed_mps" => self.simulate.speed_mps = parse_num(key, v)?,
            "start_m" => self.simulate.start_m = parse_num(key, v)?,
            "amp_m" => self.simulate.amp_m = parse_num(key, v)?,
            "freq_hz" => self.simulate.freq_hz = parse_num(key, v)?,
            "segments" => self.simulate.segments = v.to_string(),
            other => return Err(ConfigError::UnknownKey(other.into())),
        }
        Ok(())
    }

    /// Parses the config file format on top of the defaults.
    pub fn parse_str(content: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut in_simulate = false;
        for (idx, raw) in content.lines().enumerate() {
            let line = idx + 1;
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            if text.starts_with('[') {
                match text {
                    "[simulate]" => in_simulate = true,
                    other => {
                        return Err(ConfigError::Parse {
                            line,
                            message: format!("unknown section `{other}`"),
                        })
                    }
                }
                continue;
            }
            let Some((key, value)) = text.split_once('=') else {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("expected `key = value`, got `{text}`"),
                });
            };
            let _ = in_simulate; // keys are unique across sections
            cfg.set(key.trim(), value.trim()).map_err(|e| match e {
                ConfigError::UnknownKey(k) => ConfigError::Parse {
                    line,
                    message: format!("unknown key `{k}`"),
                },
                other => other,
            })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.wavelength_m > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "wavelength_m must be > 0, got {}",
                self.wavelength_m
            )));
        }
        if !(self.sample_rate_hz > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "sample_rate_hz must be > 0, got {}",
                self.sample_rate_hz
            )));
        }
        if !(self.window_s > 0.0) {
            return Err(ConfigError::Invalid("window_s must be > 0".into()));
        }
        if !(self.hop_s > 0.0) || self.hop_s > self.window_s {
            return Err(ConfigError::Invalid(format!(
                "hop_s must be in (0, window_s], got {}",
                self.hop_s
            )));
        }
        if self.hampel_half_window < 1 {
            return Err(ConfigError::Invalid(
                "hampel_half_window must be >= 1".into(),
            ));
        }
        if !(self.hampel_n_mad > 0.0) {
            return Err(ConfigError::Invalid("hampel_n_mad must be > 0".into()));
        }
        if self.denominator_antenna != 1 && self.denominator_antenna != 2 {
            return Err(ConfigError::Invalid(format!(
                "denominator_antenna must be 1 or 2, got {}",
                self.denominator_antenna
            )));
        }
        if !(self.magnitude_floor >= 0.0) {
            return Err(ConfigError::Invalid("magnitude_floor must be >= 0".into()));
        }
        match self.mode {
            Mode::Ingest => {
                if self.trace.is_none() {
                    return Err(ConfigError::Invalid(
                        "ingest mode requires a trace file (key `trace` or --trace)".into(),
                    ));
                }
            }
            Mode::Simulate => {
                if !(self.simulate.duration_s > 0.0) {
                    return Err(ConfigError::Invalid(format!(
                        "duration_s must be > 0, got {}",
                        self.simulate.duration_s
                    )));
                }
                self.simulate.build_scene(self.wavelength_m)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_with_section_and_comments() {
        let text = "\
# pipeline
mode = simulate
wavelength_m = 0.328
seed = 42

[simulate]
dyn_amp_2 = 0.6      # dynamic path
snr_db = 30
trajectory = constant_speed
speed_mps = 0.01
";
        let cfg = PipelineConfig::parse_str(text).unwrap();
        assert_eq!(cfg.wavelength_m, 0.328);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.simulate.dyn_amp_2, 0.6);
        assert_eq!(cfg.simulate.snr_db, Some(30.0));
        cfg.validate().unwrap();
    }

    #[test]
    fn unknown_key_names_line() {
        let err = PipelineConfig::parse_str("mode = simulate\nbogus = 1\n").unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ingest_requires_trace() {
        let cfg = PipelineConfig::parse_str("mode = ingest\n").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_bad_geometry() {
        let mut cfg = PipelineConfig::default();
        cfg.set("hop_s", "0.6").unwrap();
        assert!(cfg.validate().is_err());
        let mut cfg = PipelineConfig::default();
        cfg.set("wavelength_m", "-1").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn piecewise_segments_parse() {
        let mut cfg = PipelineConfig::default();
        cfg.set("trajectory", "piecewise").unwrap();
        cfg.set("segments", "2.0:0.01, 1.0:0.0, 3.0:-0.02").unwrap();
        let tr = cfg.simulate.build_trajectory().unwrap();
        assert!((tr.position(6.0) - (0.02 - 0.06)).abs() < 1e-12);
    }
}
