//! Centered moving-average smoothing and a noise-driven width selector.
//!
//! Channel samples arrive with measurement noise that is wideband compared
//! to the target-induced rotation, so a short centered average trades a tiny
//! amount of arc bias for a large noise reduction. The width is chosen from
//! the data itself: second differences suppress the slowly varying signal
//! and leave the noise, giving a scale-free noise ratio.

use num_complex::Complex64;

/// Largest smoothing window the selector will pick, in samples.
pub const MAX_SMOOTHING_WINDOW: usize = 101;

fn reflect(i: isize, n: isize) -> usize {
    // mirror without repeating the edge sample
    let mut j = i;
    if j < 0 {
        j = -j;
    }
    if j >= n {
        j = 2 * (n - 1) - j;
    }
    j as usize
}

/// Centered moving average with reflected edges. `width` must be odd;
/// `width <= 1` returns the input unchanged.
pub fn moving_average(x: &[f64], width: usize) -> Vec<f64> {
    if width <= 1 || x.len() < 3 {
        return x.to_vec();
    }
    let h = (width / 2) as isize;
    let n = x.len() as isize;
    let inv = 1.0 / width as f64;
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for j in (i - h)..=(i + h) {
                acc += x[reflect(j, n)];
            }
            acc * inv
        })
        .collect()
}

/// Complex counterpart of [`moving_average`].
pub fn moving_average_complex(x: &[Complex64], width: usize) -> Vec<Complex64> {
    if width <= 1 || x.len() < 3 {
        return x.to_vec();
    }
    let h = (width / 2) as isize;
    let n = x.len() as isize;
    let inv = 1.0 / width as f64;
    (0..n)
        .map(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in (i - h)..=(i + h) {
                acc += x[reflect(j, n)];
            }
            acc * inv
        })
        .collect()
}

/// Median of the second-difference magnitudes over the spread of the cloud.
///
/// Near zero for smooth noise-free traces; of order the noise-to-signal
/// ratio otherwise.
pub fn noise_ratio(x: &[Complex64]) -> f64 {
    if x.len() < 8 {
        return 0.0;
    }
    let n = x.len();
    let mean = x.iter().sum::<Complex64>() / n as f64;
    let spread = (x.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / n as f64).sqrt();
    if spread <= 0.0 {
        return 0.0;
    }
    let mut d2: Vec<f64> = x
        .windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]).norm())
        .collect();
    let mid = d2.len() / 2;
    d2.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).unwrap());
    d2[mid] / spread
}

/// Odd smoothing width from the measured noise ratio.
///
/// Noise-free traces map to width 1 (no smoothing); the width grows as
/// `nr^(2/3)` so that smoothing bias and residual noise shrink together.
pub fn adaptive_width(nr: f64) -> usize {
    let w = (375.0 * nr.max(0.0).powf(2.0 / 3.0)).round() as usize;
    let w = w.clamp(1, MAX_SMOOTHING_WINDOW);
    if w.is_multiple_of(2) {
        w + 1
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn width_one_is_identity() {
        let x = vec![1.0, 4.0, 9.0, 16.0];
        assert_eq!(moving_average(&x, 1), x);
    }

    #[test]
    fn constant_series_unchanged() {
        let x = vec![3.5; 20];
        for v in moving_average(&x, 7) {
            assert_relative_eq!(v, 3.5, max_relative = 1e-15);
        }
    }

    #[test]
    fn linear_series_unchanged_in_interior() {
        let x: Vec<f64> = (0..50).map(|i| 0.3 * i as f64 + 1.0).collect();
        let y = moving_average(&x, 9);
        for i in 4..46 {
            assert_relative_eq!(y[i], x[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn noise_ratio_separates_regimes() {
        let clean: Vec<Complex64> = (0..1000)
            .map(|i| Complex64::from_polar(1.0, 1e-3 * i as f64) + Complex64::new(2.0, 0.0))
            .collect();
        let nr_clean = noise_ratio(&clean);
        assert!(nr_clean < 1e-4, "clean nr = {nr_clean}");
        assert_eq!(adaptive_width(nr_clean), 1);

        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let nrm = Normal::new(0.0, 0.03).unwrap();
        let noisy: Vec<Complex64> = clean
            .iter()
            .map(|z| z + Complex64::new(nrm.sample(&mut rng), nrm.sample(&mut rng)))
            .collect();
        let nr_noisy = noise_ratio(&noisy);
        assert!(nr_noisy > 1e-2, "noisy nr = {nr_noisy}");
        let w = adaptive_width(nr_noisy);
        assert!(w >= 21 && w % 2 == 1, "w = {w}");
    }
}
