//! Reference implementations for the channel-ratio geometry, used only by
//! tests.
//!
//! Everything here recomputes the quantities the production crate estimates,
//! by routes that share no code with it: the circle center comes from the
//! circumcenter of three exactly mapped points rather than a least-squares
//! fit, and the angle table is evaluated directly on a dense grid. Built for
//! correctness, not speed.

// negated comparisons like `!(x > 0.0)` are deliberate: they reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use num_complex::Complex64;
use subwave_core::channel::MultipathScene;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("grid must have at least {min} points, got {got}")]
    GridTooCoarse { min: usize, got: usize },
    #[error("scene domain error: |static_2| = {static_mag} must exceed dyn_amp_2 = {dyn_amp}")]
    Domain { static_mag: f64, dyn_amp: f64 },
    #[error("degenerate scene: the ratio image is a single point")]
    Degenerate,
}

/// Uniform grid on `[0, 2*pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    n_points: usize,
}

impl GridSpec {
    pub const MIN_POINTS: usize = 1024;

    pub fn new(n_points: usize) -> Result<Self, OracleError> {
        if n_points < Self::MIN_POINTS {
            return Err(OracleError::GridTooCoarse {
                min: Self::MIN_POINTS,
                got: n_points,
            });
        }
        Ok(Self { n_points })
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn theta(&self, i: usize) -> f64 {
        2.0 * std::f64::consts::PI * i as f64 / self.n_points as f64
    }
}

/// Image of the unit dynamic phasor under the channel-ratio map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MobiusImage {
    Circle {
        center: Complex64,
        radius: f64,
        /// Largest point-to-circle distance over the grid.
        max_deviation: f64,
    },
    /// Concentric numerator and denominator collapse the image to a point.
    Point { value: Complex64 },
}

fn ratio_at(scene: &MultipathScene, theta: f64) -> Complex64 {
    let z = Complex64::from_polar(1.0, theta);
    (scene.static_1 + scene.dyn_coeff_1() * z) / (scene.static_2 + scene.dyn_amp_2 * z)
}

fn check_domain(scene: &MultipathScene) -> Result<(), OracleError> {
    let s_mag = scene.static_2.norm();
    if !(s_mag > scene.dyn_amp_2) {
        return Err(OracleError::Domain {
            static_mag: s_mag,
            dyn_amp: scene.dyn_amp_2,
        });
    }
    Ok(())
}

fn is_degenerate(scene: &MultipathScene) -> bool {
    let numerator = scene.dyn_coeff_1() * scene.static_2 - scene.static_1 * scene.dyn_amp_2;
    let scale = scene
        .static_1
        .norm()
        .max(scene.dyn_amp_1)
        .max(scene.static_2.norm())
        .max(scene.dyn_amp_2);
    numerator.norm() < 1e-14 * scale * scale
}

/// Circumcenter of three points in the complex plane, via the perpendicular
/// bisector equations.
fn circumcenter(z1: Complex64, z2: Complex64, z3: Complex64) -> Option<Complex64> {
    let ax = z2.re - z1.re;
    let ay = z2.im - z1.im;
    let bx = z3.re - z1.re;
    let by = z3.im - z1.im;
    let det = 2.0 * (ax * by - ay * bx);
    if det == 0.0 {
        return None;
    }
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let ux = (by * a2 - ay * b2) / det;
    let uy = (ax * b2 - bx * a2) / det;
    Some(Complex64::new(z1.re + ux, z1.im + uy))
}

/// Maps the grid through the exact ratio expression and measures how far
/// the image strays from the circle through three exact reference points.
pub fn mobius_image_circle(
    scene: &MultipathScene,
    grid: GridSpec,
) -> Result<MobiusImage, OracleError> {
    check_domain(scene)?;
    if is_degenerate(scene) {
        return Ok(MobiusImage::Point {
            value: ratio_at(scene, 0.0),
        });
    }
    let two_thirds = 2.0 * std::f64::consts::PI / 3.0;
    let z1 = ratio_at(scene, 0.0);
    let z2 = ratio_at(scene, two_thirds);
    let z3 = ratio_at(scene, 2.0 * two_thirds);
    let center = circumcenter(z1, z2, z3).ok_or(OracleError::Degenerate)?;
    let radius = (z1 - center).norm();
    let mut max_deviation = 0.0f64;
    for i in 0..grid.len() {
        let w = ratio_at(scene, grid.theta(i));
        max_deviation = max_deviation.max(((w - center).norm() - radius).abs());
    }
    Ok(MobiusImage::Circle {
        center,
        radius,
        max_deviation,
    })
}

/// Exact ratio angle about the exact center, tabulated over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTable {
    pub theta: Vec<f64>,
    pub phi_unwrapped: Vec<f64>,
    pub center: Complex64,
    pub radius: f64,
}

impl PhaseTable {
    /// Number of full turns the ratio makes as theta sweeps one cycle,
    /// including the closing step back to the start.
    pub fn winding_number(&self) -> i64 {
        let n = self.phi_unwrapped.len();
        let open_sweep = self.phi_unwrapped[n - 1] - self.phi_unwrapped[0];
        let first_step = self.phi_unwrapped[1] - self.phi_unwrapped[0];
        ((open_sweep + first_step) / (2.0 * std::f64::consts::PI)).round() as i64
    }
}

/// Tabulates `phi(theta)` on the grid via the circumcenter route.
pub fn phase_of_theta(scene: &MultipathScene, grid: GridSpec) -> Result<PhaseTable, OracleError> {
    check_domain(scene)?;
    if is_degenerate(scene) {
        return Err(OracleError::Degenerate);
    }
    let two_thirds = 2.0 * std::f64::consts::PI / 3.0;
    let z1 = ratio_at(scene, 0.0);
    let z2 = ratio_at(scene, two_thirds);
    let z3 = ratio_at(scene, 2.0 * two_thirds);
    let center = circumcenter(z1, z2, z3).ok_or(OracleError::Degenerate)?;
    let radius = (z1 - center).norm();

    let n = grid.len();
    let mut theta = Vec::with_capacity(n);
    let mut phi = Vec::with_capacity(n);
    let mut acc = 0.0;
    let mut prev_raw = 0.0;
    for i in 0..n {
        let th = grid.theta(i);
        let raw = (ratio_at(scene, th) - center).arg();
        if i == 0 {
            acc = raw;
        } else {
            let mut step = raw - prev_raw;
            let pi = std::f64::consts::PI;
            while step > pi {
                step -= 2.0 * pi;
            }
            while step <= -pi {
                step += 2.0 * pi;
            }
            acc += step;
        }
        prev_raw = raw;
        theta.push(th);
        phi.push(acc);
    }
    Ok(PhaseTable {
        theta,
        phi_unwrapped: phi,
        center,
        radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circumcenter_of_known_circle() {
        let c = Complex64::new(2.0, -1.0);
        let p = |a: f64| c + Complex64::from_polar(3.0, a);
        let found = circumcenter(p(0.1), p(1.9), p(4.4)).unwrap();
        assert!((found - c).norm() < 1e-12);
    }
}
