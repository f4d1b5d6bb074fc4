//! Sliding window partition shared by the circle-fit and envelope stages.

/// Overlapping time windows of fixed length and hop over `[t0, t_end]`.
///
/// Window `k` nominally covers `[t0 + k*hop, t0 + k*hop + window)`; the last
/// windows are truncated at `t_end`. Every instant in `[t0, t_end]` is
/// covered and maps to the latest window that starts at or before it.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowGrid {
    t0: f64,
    t_end: f64,
    window_s: f64,
    hop_s: f64,
    n_windows: usize,
    centers: Vec<f64>,
}

impl WindowGrid {
    pub fn new(t0: f64, t_end: f64, window_s: f64, hop_s: f64) -> Self {
        assert!(window_s > 0.0 && hop_s > 0.0 && t_end > t0);
        let span = t_end - t0;
        let n_windows = if span <= window_s {
            1
        } else {
            ((span - window_s) / hop_s).ceil() as usize + 1
        };
        let centers = (0..n_windows)
            .map(|k| {
                let start = t0 + k as f64 * hop_s;
                let end = (start + window_s).min(t_end);
                0.5 * (start + end)
            })
            .collect();
        Self {
            t0,
            t_end,
            window_s,
            hop_s,
            n_windows,
            centers,
        }
    }

    pub fn len(&self) -> usize {
        self.n_windows
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Nominal `[start, end)` of window `k`, truncated at the grid end.
    pub fn bounds(&self, k: usize) -> (f64, f64) {
        let start = self.t0 + k as f64 * self.hop_s;
        (start, (start + self.window_s).min(self.t_end))
    }

    pub fn center(&self, k: usize) -> f64 {
        self.centers[k]
    }

    /// Latest window whose start lies at or before `t` (clamped to range).
    pub fn index_for(&self, t: f64) -> usize {
        let raw = ((t - self.t0) / self.hop_s).floor();
        if raw < 0.0 {
            0
        } else {
            (raw as usize).min(self.n_windows - 1)
        }
    }

    /// Window whose center is nearest to `t`; ties resolve to the earlier
    /// window.
    pub fn nearest_center(&self, t: f64) -> usize {
        let mut best = 0;
        let mut best_d = (t - self.centers[0]).abs();
        // centers are sorted; a fast scan start saves nothing at these sizes
        for (k, &c) in self.centers.iter().enumerate().skip(1) {
            let d = (t - c).abs();
            if d < best_d {
                best = k;
                best_d = d;
            }
        }
        best
    }

    /// Indices of `timestamps` (sorted ascending) that fall in window `k`.
    /// The final window also takes the exact end point.
    pub fn sample_range(&self, k: usize, timestamps: &[f64]) -> std::ops::Range<usize> {
        let (start, end) = self.bounds(k);
        let lo = timestamps.partition_point(|&t| t < start);
        let hi = if k + 1 == self.n_windows {
            timestamps.partition_point(|&t| t <= end)
        } else {
            timestamps.partition_point(|&t| t < end)
        };
        lo..hi
    }
}
