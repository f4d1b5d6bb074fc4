//! Cross-antenna channel ratio and its circular geometry.
//!
//! Dividing the two antennas' measurements cancels the common clock-offset
//! phasor exactly; what remains is a Moebius image of the unit dynamic
//! phasor, which traces a circle in the complex plane. This module computes
//! the ratio, fits the circle, and extracts the unwrapped rotation angle
//! about its center.

use crate::channel::ChannelTrace;
use num_complex::Complex64;
use thiserror::Error;

/// Denominator magnitude below which a ratio sample is not produced.
pub const DEFAULT_MAGNITUDE_FLOOR: f64 = 1e-9;

/// Fraction of samples allowed below the magnitude floor before the whole
/// trace is rejected.
const MAX_DROPPED_FRACTION: f64 = 0.01;

/// Samples closer to the circle center than this fraction of the radius
/// have no usable angle.
const NEAR_CENTER_FRACTION: f64 = 0.05;

/// Normalized conditioning below which the circle fit is degenerate.
const CONDITIONING_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum RatioError {
    #[error("traces have different timestamps")]
    TimestampMismatch,
    #[error("{dropped} of {total} samples below magnitude floor {floor:e}")]
    TooManyLowMagnitude {
        dropped: usize,
        total: usize,
        floor: f64,
    },
    #[error("fewer than 3 usable samples for circle fit, got {0}")]
    TooFewSamples(usize),
    #[error(
        "degenerate circle fit: samples collinear or coincident (conditioning {conditioning:e})"
    )]
    DegenerateFit { conditioning: f64 },
    #[error("circle radius must be > 0")]
    ZeroRadius,
    #[error("sample {index} lies within {fraction} of the radius from the circle center; angle ill-defined")]
    NearCenter { index: usize, fraction: f64 },
    #[error("angle series needs at least 2 samples")]
    TooShortSeries,
}

/// Per-sample quotient of two antennas' channel measurements.
///
/// Rows whose denominator magnitude fell below the floor are dropped;
/// `dropped` records their original indices.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioTrace {
    timestamps: Vec<f64>,
    samples: Vec<Complex64>,
    dropped: Vec<usize>,
}

impl RatioTrace {
    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Rebuilds the trace with different samples on the same time base.
    pub fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        assert_eq!(samples.len(), self.timestamps.len());
        Self {
            timestamps: self.timestamps.clone(),
            samples,
            dropped: self.dropped.clone(),
        }
    }
}

/// Fitted center and radius of the ratio trace in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioCircle {
    pub center: Complex64,
    pub radius: f64,
    pub rms_residual: f64,
}

/// Unwrapped rotation angle of the ratio about its circle center.
///
/// `increments` always equals the difference of consecutive `unwrapped`
/// values exactly; it is recomputed from the accumulated series.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSeries {
    timestamps: Vec<f64>,
    unwrapped_rad: Vec<f64>,
    increments_rad: Vec<f64>,
}

impl AngleSeries {
    /// Accumulates wrapped steps onto `anchor` and derives the increments
    /// from the accumulated series so the invariant holds bit for bit.
    pub fn from_steps(
        timestamps: Vec<f64>,
        anchor: f64,
        steps: &[f64],
    ) -> Result<Self, RatioError> {
        if timestamps.len() < 2 || steps.len() + 1 != timestamps.len() {
            return Err(RatioError::TooShortSeries);
        }
        let mut unwrapped = Vec::with_capacity(timestamps.len());
        unwrapped.push(anchor);
        let mut acc = anchor;
        for &s in steps {
            acc += s;
            unwrapped.push(acc);
        }
        let increments = unwrapped.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(Self {
            timestamps,
            unwrapped_rad: unwrapped,
            increments_rad: increments,
        })
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn unwrapped_rad(&self) -> &[f64] {
        &self.unwrapped_rad
    }

    pub fn increments_rad(&self) -> &[f64] {
        &self.increments_rad
    }

    pub fn len(&self) -> usize {
        self.unwrapped_rad.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unwrapped_rad.is_empty()
    }

    pub fn total_rotation(&self) -> f64 {
        self.unwrapped_rad[self.len() - 1] - self.unwrapped_rad[0]
    }
}

/// Wraps an angle difference into (-pi, pi].
pub fn wrap_angle(mut d: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    while d > std::f64::consts::PI {
        d -= two_pi;
    }
    while d <= -std::f64::consts::PI {
        d += two_pi;
    }
    d
}

/// Computes `h1 / h2` per sample with the default magnitude floor.
pub fn compute_ratio(h1: &ChannelTrace, h2: &ChannelTrace) -> Result<RatioTrace, RatioError> {
    compute_ratio_with_floor(h1, h2, DEFAULT_MAGNITUDE_FLOOR)
}

/// Computes `h1 / h2` per sample. Samples whose denominator magnitude is
/// below `floor` are dropped; more than 1% dropped rejects the trace.
pub fn compute_ratio_with_floor(
    h1: &ChannelTrace,
    h2: &ChannelTrace,
    floor: f64,
) -> Result<RatioTrace, RatioError> {
    if h1.timestamps() != h2.timestamps() {
        return Err(RatioError::TimestampMismatch);
    }
    let total = h1.len();
    let mut timestamps = Vec::with_capacity(total);
    let mut samples = Vec::with_capacity(total);
    let mut dropped = Vec::new();
    for i in 0..total {
        let den = h2.samples()[i];
        if den.norm() < floor {
            dropped.push(i);
        } else {
            timestamps.push(h1.timestamps()[i]);
            samples.push(h1.samples()[i] / den);
        }
    }
    if dropped.len() as f64 > MAX_DROPPED_FRACTION * total as f64 {
        return Err(RatioError::TooManyLowMagnitude {
            dropped: dropped.len(),
            total,
            floor,
        });
    }
    Ok(RatioTrace {
        timestamps,
        samples,
        dropped,
    })
}

/// Algebraic least-squares circle through `samples`.
///
/// Solves the linearized normal equations of `|z|^2 = 2 Re(conj(c) z) +
/// (r^2 - |c|^2)` in centroid-shifted coordinates. The reported residual is
/// the geometric rms distance to the fitted circle.
pub fn fit_circle(samples: &[Complex64]) -> Result<RatioCircle, RatioError> {
    if samples.len() < 3 {
        return Err(RatioError::TooFewSamples(samples.len()));
    }
    let n = samples.len() as f64;
    let cx = samples.iter().map(|z| z.re).sum::<f64>() / n;
    let cy = samples.iter().map(|z| z.im).sum::<f64>() / n;

    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    let (mut rx, mut ry, mut sq) = (0.0, 0.0, 0.0);
    for z in samples {
        let x = z.re - cx;
        let y = z.im - cy;
        let q = x * x + y * y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        rx += x * q;
        ry += y * q;
        sq += q;
    }

    // scatter-matrix isotropy; zero for collinear or coincident points
    let tr = sxx + syy;
    let det = sxx * syy - sxy * sxy;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let lam_max = 0.5 * (tr + disc);
    let lam_min = 0.5 * (tr - disc);
    let conditioning = if lam_max > 0.0 {
        lam_min / lam_max
    } else {
        0.0
    };
    if !(conditioning > CONDITIONING_FLOOR) {
        return Err(RatioError::DegenerateFit { conditioning });
    }

    let a = 0.5 * (syy * rx - sxy * ry) / det;
    let b = 0.5 * (sxx * ry - sxy * rx) / det;
    let r2 = sq / n + a * a + b * b;
    let center = Complex64::new(cx + a, cy + b);
    let radius = r2.max(0.0).sqrt();

    let rms_residual = (samples
        .iter()
        .map(|z| {
            let d = (z - center).norm() - radius;
            d * d
        })
        .sum::<f64>()
        / n)
        .sqrt();

    Ok(RatioCircle {
        center,
        radius,
        rms_residual,
    })
}

/// Gauss-Newton refinement of a circle on the geometric distances
/// `|z - c| - r`, started from `init`. Falls back to the initial circle if
/// the normal equations degenerate.
pub fn refine_circle(samples: &[Complex64], init: &RatioCircle) -> RatioCircle {
    let n = samples.len() as f64;
    let mut cx = init.center.re;
    let mut cy = init.center.im;
    let mut r = init.radius;
    for _ in 0..60 {
        let mut a11 = 0.0;
        let mut a12 = 0.0;
        let mut a13 = 0.0;
        let mut a22 = 0.0;
        let mut a23 = 0.0;
        let mut g1 = 0.0;
        let mut g2 = 0.0;
        let mut g3 = 0.0;
        for z in samples {
            let dx = z.re - cx;
            let dy = z.im - cy;
            let d = (dx * dx + dy * dy).sqrt();
            if d <= 0.0 {
                return RatioCircle {
                    center: Complex64::new(cx, cy),
                    radius: r,
                    rms_residual: init.rms_residual,
                };
            }
            let f = d - r;
            let ux = dx / d;
            let uy = dy / d;
            a11 += ux * ux;
            a12 += ux * uy;
            a13 += ux;
            a22 += uy * uy;
            a23 += uy;
            g1 += ux * f;
            g2 += uy * f;
            g3 += f;
        }
        let m = nalgebra::Matrix3::new(a11, a12, a13, a12, a22, a23, a13, a23, n);
        let rhs = nalgebra::Vector3::new(g1, g2, g3);
        let Some(step) = m.lu().solve(&rhs) else {
            break;
        };
        cx += step[0];
        cy += step[1];
        r += step[2];
        let scale = r.abs().max(1.0);
        if step.amax() < 1e-15 * scale {
            break;
        }
    }
    let center = Complex64::new(cx, cy);
    let rms_residual = (samples
        .iter()
        .map(|z| {
            let d = (z - center).norm() - r;
            d * d
        })
        .sum::<f64>()
        / n)
        .sqrt();
    RatioCircle {
        center,
        radius: r,
        rms_residual,
    }
}

/// Angle of each ratio sample about the circle center, unwrapped with the
/// pi-threshold rule. Errors if any sample sits too close to the center.
pub fn extract_rotation(
    ratio: &RatioTrace,
    circle: &RatioCircle,
) -> Result<AngleSeries, RatioError> {
    let circles = [*circle];
    let assignment = vec![0usize; ratio.len().saturating_sub(1)];
    extract_rotation_assigned(ratio, &circles, &assignment)
}

/// Windowed variant: increment `i` (between samples `i` and `i+1`) uses
/// `circles[assignment[i]]`, so every step is measured about one consistent
/// center even when the circle is refitted along the trace.
pub fn extract_rotation_assigned(
    ratio: &RatioTrace,
    circles: &[RatioCircle],
    assignment: &[usize],
) -> Result<AngleSeries, RatioError> {
    let n = ratio.len();
    if n < 2 || assignment.len() != n - 1 {
        return Err(RatioError::TooShortSeries);
    }
    for c in circles {
        if !(c.radius > 0.0) {
            return Err(RatioError::ZeroRadius);
        }
    }
    let angle_about = |i: usize, c: &RatioCircle| -> Result<f64, RatioError> {
        let rel = ratio.samples()[i] - c.center;
        if rel.norm() < NEAR_CENTER_FRACTION * c.radius {
            return Err(RatioError::NearCenter {
                index: i,
                fraction: NEAR_CENTER_FRACTION,
            });
        }
        Ok(rel.arg())
    };
    let mut steps = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let c = &circles[assignment[i]];
        let a0 = angle_about(i, c)?;
        let a1 = angle_about(i + 1, c)?;
        steps.push(wrap_angle(a1 - a0));
    }
    let anchor = angle_about(0, &circles[assignment[0]])?;
    AngleSeries::from_steps(ratio.timestamps().to_vec(), anchor, &steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{synthesize_ideal, MultipathScene, Trajectory};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn trace(samples: Vec<Complex64>) -> ChannelTrace {
        let ts = (0..samples.len()).map(|i| i as f64 * 1e-3).collect();
        ChannelTrace::new(ts, samples).unwrap()
    }

    fn ratio_from(samples: Vec<Complex64>) -> RatioTrace {
        let ones = vec![Complex64::new(1.0, 0.0); samples.len()];
        compute_ratio(&trace(samples), &trace(ones)).unwrap()
    }

    #[test]
    fn identical_antennas_give_unity() {
        let s = vec![
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.25),
            Complex64::new(3.0, -1.0),
        ];
        let r = compute_ratio(&trace(s.clone()), &trace(s)).unwrap();
        for z in r.samples() {
            assert_relative_eq!(z.re, 1.0, max_relative = 1e-15);
            assert!(z.im.abs() < 1e-15);
        }
    }

    #[test]
    fn common_phase_factor_cancels() {
        let a = vec![
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.25),
            Complex64::new(3.0, -1.0),
            Complex64::new(0.2, 0.9),
        ];
        let b = vec![
            Complex64::new(2.0, -1.0),
            Complex64::new(1.5, 0.5),
            Complex64::new(-0.7, 2.0),
            Complex64::new(1.1, -0.3),
        ];
        let phases = [0.4, -2.9, 1.3, 3.0];
        let rot = |v: &[Complex64]| {
            v.iter()
                .zip(phases)
                .map(|(z, p)| z * Complex64::from_polar(1.0, -p))
                .collect::<Vec<_>>()
        };
        let plain = compute_ratio(&trace(a.clone()), &trace(b.clone())).unwrap();
        let rotated = compute_ratio(&trace(rot(&a)), &trace(rot(&b))).unwrap();
        for (x, y) in plain.samples().iter().zip(rotated.samples()) {
            assert!((x - y).norm() <= 1e-12 * x.norm());
        }
    }

    #[test]
    fn low_magnitude_samples_are_dropped_or_rejected() {
        let n = 500;
        let mut den: Vec<Complex64> = (0..n).map(|_| Complex64::new(1.0, 0.0)).collect();
        let num = vec![Complex64::new(1.0, 1.0); n];
        den[7] = Complex64::new(0.0, 0.0);
        let r = compute_ratio(&trace(num.clone()), &trace(den.clone())).unwrap();
        assert_eq!(r.dropped(), &[7]);
        assert_eq!(r.len(), n - 1);

        for i in 0..10 {
            den[i * 3] = Complex64::new(0.0, 0.0);
        }
        let err = compute_ratio(&trace(num), &trace(den));
        assert!(matches!(err, Err(RatioError::TooManyLowMagnitude { .. })));
    }

    #[test]
    fn exact_circle_three_points() {
        let c = fit_circle(&[
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
        ])
        .unwrap();
        assert!(c.center.norm() < 1e-12);
        assert_relative_eq!(c.radius, 1.0, max_relative = 1e-12);
        assert!(c.rms_residual < 1e-12);
    }

    #[test]
    fn axis_symmetric_circle() {
        let c = fit_circle(&[
            Complex64::new(5.0, 1.0),
            Complex64::new(5.0, -1.0),
            Complex64::new(6.0, 0.0),
            Complex64::new(4.0, 0.0),
        ])
        .unwrap();
        assert_relative_eq!(c.center.re, 5.0, max_relative = 1e-12);
        assert!(c.center.im.abs() < 1e-12);
        assert_relative_eq!(c.radius, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn collinear_points_degenerate() {
        let pts: Vec<Complex64> = (0..10)
            .map(|i| Complex64::new(i as f64, 2.0 * i as f64))
            .collect();
        assert!(matches!(
            fit_circle(&pts),
            Err(RatioError::DegenerateFit { .. })
        ));
        assert!(matches!(
            fit_circle(&pts[..2]),
            Err(RatioError::TooFewSamples(2))
        ));
    }

    #[test]
    fn refine_matches_exact_circle() {
        let truth = Complex64::new(2.0, -3.0);
        let pts: Vec<Complex64> = (0..100)
            .map(|i| truth + Complex64::from_polar(1.5, 0.05 * i as f64))
            .collect();
        let init = fit_circle(&pts).unwrap();
        let refined = refine_circle(&pts, &init);
        assert!((refined.center - truth).norm() < 1e-10);
        assert_relative_eq!(refined.radius, 1.5, max_relative = 1e-10);
    }

    #[test]
    fn refine_converges_on_noisy_circle() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let noise = Normal::new(0.0, 0.05).unwrap();
        let truth = Complex64::new(-1.0, 2.0);
        let pts: Vec<Complex64> = (0..2000)
            .map(|i| {
                truth
                    + Complex64::from_polar(1.2, 0.01 * i as f64)
                    + Complex64::new(noise.sample(&mut rng), noise.sample(&mut rng))
            })
            .collect();
        let init = fit_circle(&pts).unwrap();
        let refined = refine_circle(&pts, &init);
        assert!(
            (refined.center - truth).norm() < 0.01,
            "center error {}",
            (refined.center - truth).norm()
        );
        assert!(
            (refined.radius - 1.2).abs() < 0.01,
            "radius {}",
            refined.radius
        );
        assert!(refined.rms_residual < 0.1);
    }

    fn eccentric_scene(traj: Trajectory) -> MultipathScene {
        MultipathScene {
            wavelength_m: 0.121,
            static_1: Complex64::from_polar(0.9, -1.1),
            static_2: Complex64::from_polar(1.0, 0.3),
            dyn_amp_1: 0.55,
            dyn_amp_2: 0.72,
            path_delta_m: 0.013,
            trajectory: traj,
        }
    }

    #[test]
    fn synthetic_ratio_is_circular() {
        let scene = eccentric_scene(Trajectory::constant_speed(0.0, 0.02).unwrap());
        let ts: Vec<f64> = (0..=7000).map(|i| i as f64 * 1e-3).collect();
        let (h1, h2) = synthesize_ideal(&scene, &ts).unwrap();
        let ratio = compute_ratio(&h1, &h2).unwrap();
        let circle = fit_circle(ratio.samples()).unwrap();
        assert!(
            circle.rms_residual < 1e-9 * circle.radius,
            "residual {} vs radius {}",
            circle.rms_residual,
            circle.radius
        );
    }

    #[test]
    fn full_cycle_rotation_is_two_pi() {
        let scene = eccentric_scene(Trajectory::constant_speed(0.0, 0.02).unwrap());
        // exactly one wavelength of motion: 0.121 m at 2 cm/s = 6.05 s
        let ts: Vec<f64> = (0..=6050).map(|i| i as f64 * 1e-3).collect();
        let (h1, h2) = synthesize_ideal(&scene, &ts).unwrap();
        let ratio = compute_ratio(&h1, &h2).unwrap();
        let circle = fit_circle(ratio.samples()).unwrap();
        let angles = extract_rotation(&ratio, &circle).unwrap();
        assert!(
            (angles.total_rotation().abs() - 2.0 * PI).abs() < 1e-6,
            "total {}",
            angles.total_rotation()
        );
    }

    #[test]
    fn increments_on_known_circle() {
        let center = Complex64::new(5.0, 0.0);
        let pts: Vec<Complex64> = [0.0, PI / 2.0, PI]
            .iter()
            .map(|&a| center + Complex64::from_polar(1.0, a))
            .collect();
        let ratio = ratio_from(pts);
        let circle = RatioCircle {
            center,
            radius: 1.0,
            rms_residual: 0.0,
        };
        let angles = extract_rotation(&ratio, &circle).unwrap();
        for inc in angles.increments_rad() {
            assert_relative_eq!(*inc, PI / 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn unwrap_crosses_pi_boundary() {
        let center = Complex64::new(0.0, 0.0);
        let pts = vec![
            Complex64::from_polar(1.0, 3.1),
            Complex64::from_polar(1.0, -3.1),
        ];
        let ratio = ratio_from(pts);
        let circle = RatioCircle {
            center,
            radius: 1.0,
            rms_residual: 0.0,
        };
        let angles = extract_rotation(&ratio, &circle).unwrap();
        let expected = 2.0 * PI - 6.2;
        assert_relative_eq!(angles.increments_rad()[0], expected, max_relative = 1e-9);
    }

    #[test]
    fn zero_radius_circle_rejected() {
        let pts = vec![Complex64::new(1.0, 0.0), Complex64::new(1.1, 0.0)];
        let ratio = ratio_from(pts);
        let circle = RatioCircle {
            center: Complex64::new(0.0, 0.0),
            radius: 0.0,
            rms_residual: 0.0,
        };
        assert!(matches!(
            extract_rotation(&ratio, &circle),
            Err(RatioError::ZeroRadius)
        ));
    }

    #[test]
    fn near_center_sample_errors() {
        let pts = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.01, 0.0),
            Complex64::new(-1.0, 0.0),
        ];
        let ratio = ratio_from(pts);
        let circle = RatioCircle {
            center: Complex64::new(0.0, 0.0),
            radius: 1.0,
            rms_residual: 0.0,
        };
        assert!(matches!(
            extract_rotation(&ratio, &circle),
            Err(RatioError::NearCenter { index: 1, .. })
        ));
    }

    #[test]
    fn increments_match_unwrapped_exactly() {
        let pts: Vec<Complex64> = (0..50)
            .map(|i| Complex64::from_polar(2.0, 0.37 * i as f64))
            .collect();
        let ratio = ratio_from(pts);
        let circle = RatioCircle {
            center: Complex64::new(0.0, 0.0),
            radius: 2.0,
            rms_residual: 0.0,
        };
        let angles = extract_rotation(&ratio, &circle).unwrap();
        for i in 0..angles.len() - 1 {
            assert_eq!(
                angles.increments_rad()[i],
                angles.unwrapped_rad()[i + 1] - angles.unwrapped_rad()[i]
            );
        }
    }

    #[test]
    fn eccentric_circle_distorts_subwavelength_rotation() {
        // |center| about 3x the radius; somewhere in a half cycle the ratio
        // angle and the ideal angle differ by more than 0.3 rad.
        let scene = MultipathScene {
            wavelength_m: 0.121,
            static_1: Complex64::from_polar(2.2, 0.4),
            static_2: Complex64::from_polar(1.0, -0.2),
            dyn_amp_1: 0.3,
            dyn_amp_2: 0.55,
            path_delta_m: 0.007,
            trajectory: Trajectory::constant_speed(0.0, 0.02).unwrap(),
        };
        let ts: Vec<f64> = (0..=6050).map(|i| i as f64 * 1e-3).collect();
        let (h1, h2) = synthesize_ideal(&scene, &ts).unwrap();
        let ratio = compute_ratio(&h1, &h2).unwrap();
        let circle = fit_circle(ratio.samples()).unwrap();
        assert!(circle.center.norm() > 1.5 * circle.radius);
        let angles = extract_rotation(&ratio, &circle).unwrap();
        let two_pi = 2.0 * PI;
        let mut max_dev: f64 = 0.0;
        for (i, &t) in ts.iter().enumerate() {
            let dtheta = -two_pi * 0.02 * t / 0.121;
            let dphi = angles.unwrapped_rad()[i] - angles.unwrapped_rad()[0];
            max_dev = max_dev.max((dphi - dtheta).abs());
        }
        assert!(max_dev > 0.3, "max deviation {max_dev}");
    }
}
