//! Error metrics and output-value formatting.
//!
//! Displacement values are written with 10 significant digits; the metrics
//! are computed from the values exactly as printed (format, then parse
//! back), so an independent reader of the CSV reproduces them bit for bit.

/// Formats a meters value for the displacement CSV.
pub fn fmt_meters(x: f64) -> String {
    format!("{x:.9e}")
}

/// Formats a full-precision value for the metrics file.
pub fn fmt_full(x: f64) -> String {
    format!("{x:.16e}")
}

/// The value an output CSV reader will see for `x`.
pub fn round_to_output(x: f64) -> f64 {
    fmt_meters(x).parse().unwrap()
}

/// Absolute-error summary of an estimate against ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub max_abs_m: f64,
    pub median_abs_m: f64,
    pub p90_abs_m: f64,
}

/// Metrics over output-rounded series.
///
/// The p90 convention is the smallest error with at least 90% of samples at
/// or below it: sorted index `ceil(0.9 * n) - 1`.
pub fn compute_metrics(estimate: &[f64], truth: &[f64]) -> Metrics {
    assert_eq!(estimate.len(), truth.len());
    assert!(!estimate.is_empty());
    let mut errs: Vec<f64> = estimate
        .iter()
        .zip(truth)
        .map(|(e, t)| (round_to_output(*e) - round_to_output(*t)).abs())
        .collect();
    errs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = errs.len();
    let median = if n % 2 == 1 {
        errs[n / 2]
    } else {
        0.5 * (errs[n / 2 - 1] + errs[n / 2])
    };
    let p90_idx = ((0.9 * n as f64).ceil() as usize).max(1) - 1;
    Metrics {
        max_abs_m: errs[n - 1],
        median_abs_m: median,
        p90_abs_m: errs[p90_idx.min(n - 1)],
    }
}
