//! Trace CSV format.
//!
//! Header `t,ant1_re,ant1_im,ant2_re,ant2_im` with an optional trailing
//! `d_truth` column; comma-separated decimal floats, UTF-8, `\n` newlines.
//! Values are written with 17 significant digits so that a write/read
//! round trip reproduces every f64 exactly.

use num_complex::Complex64;
use std::io::Write;
use std::path::Path;
use subwave_core::channel::{ChannelError, ChannelTrace};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceIoError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: timestamps not strictly increasing")]
    NonMonotonic { line: usize },
    #[error("timestamps deviate from a uniform grid by more than 10% of the nominal period (line {line})")]
    NonUniform { line: usize },
    #[error("trace validation failed: {0}")]
    Validation(#[from] ChannelError),
}

const BASE_HEADER: &str = "t,ant1_re,ant1_im,ant2_re,ant2_im";

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes two aligned traces (and optional ground truth) in the trace CSV
/// format.
pub fn write_trace_csv(
    path: &Path,
    h1: &ChannelTrace,
    h2: &ChannelTrace,
    truth: Option<&[f64]>,
) -> Result<(), TraceIoError> {
    assert_eq!(h1.timestamps(), h2.timestamps());
    if let Some(d) = truth {
        assert_eq!(d.len(), h1.len());
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    match truth {
        Some(_) => writeln!(out, "{BASE_HEADER},d_truth")?,
        None => writeln!(out, "{BASE_HEADER}")?,
    }
    for i in 0..h1.len() {
        let t = h1.timestamps()[i];
        let a = h1.samples()[i];
        let b = h2.samples()[i];
        match truth {
            Some(d) => writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt(t),
                fmt(a.re),
                fmt(a.im),
                fmt(b.re),
                fmt(b.im),
                fmt(d[i])
            )?,
            None => writeln!(
                out,
                "{},{},{},{},{}",
                fmt(t),
                fmt(a.re),
                fmt(a.im),
                fmt(b.re),
                fmt(b.im)
            )?,
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a trace CSV back into validated channel traces.
///
/// Rejects malformed rows (with their line number), non-monotonic
/// timestamps, mixed row lengths, and grids that deviate from uniform
/// spacing by more than 10% of the nominal period.
pub fn ingest_trace_csv(
    path: &Path,
) -> Result<(ChannelTrace, ChannelTrace, Option<Vec<f64>>), TraceIoError> {
    let content = std::fs::read_to_string(path)?;
    let mut lines = content.lines().enumerate();
    let (_, header) = lines.next().ok_or(TraceIoError::Malformed {
        line: 1,
        message: "empty file".into(),
    })?;
    let has_truth = match header.trim_end() {
        h if h == BASE_HEADER => false,
        h if h == format!("{BASE_HEADER},d_truth") => true,
        other => {
            return Err(TraceIoError::Malformed {
                line: 1,
                message: format!("unexpected header `{other}`"),
            })
        }
    };
    let n_cols = if has_truth { 6 } else { 5 };

    let mut ts = Vec::new();
    let mut s1 = Vec::new();
    let mut s2 = Vec::new();
    let mut truth = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != n_cols {
            return Err(TraceIoError::Malformed {
                line,
                message: format!("expected {n_cols} columns, found {}", fields.len()),
            });
        }
        let mut vals = [0.0f64; 6];
        for (j, f) in fields.iter().enumerate() {
            vals[j] = f
                .trim()
                .parse::<f64>()
                .map_err(|_| TraceIoError::Malformed {
                    line,
                    message: format!("column {} `{}` is not a number", j + 1, f.trim()),
                })?;
        }
        if let Some(&prev) = ts.last() {
            if vals[0] <= prev {
                return Err(TraceIoError::NonMonotonic { line });
            }
        }
        ts.push(vals[0]);
        s1.push(Complex64::new(vals[1], vals[2]));
        s2.push(Complex64::new(vals[3], vals[4]));
        if has_truth {
            truth.push(vals[5]);
        }
    }

    if ts.len() >= 3 {
        let nominal = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
        for i in 1..ts.len() {
            let dt = ts[i] - ts[i - 1];
            if (dt - nominal).abs() > 0.10 * nominal {
                return Err(TraceIoError::NonUniform { line: i + 2 });
            }
        }
    }

    let h1 = ChannelTrace::new(ts.clone(), s1)?;
    let h2 = ChannelTrace::new(ts, s2)?;
    Ok((h1, h2, if has_truth { Some(truth) } else { None }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("subwave-trace-io-tests");
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn four_row_file_round_trips() {
        let ts = vec![0.0, 0.001, 0.002, 0.003];
        let s1: Vec<Complex64> = (0..4)
            .map(|i| Complex64::new(0.1 + i as f64 / 3.0, -0.7 * i as f64))
            .collect();
        let s2: Vec<Complex64> = (0..4)
            .map(|i| Complex64::new(1.0 / (i as f64 + 1.5), 0.3))
            .collect();
        let h1 = ChannelTrace::new(ts.clone(), s1).unwrap();
        let h2 = ChannelTrace::new(ts, s2).unwrap();
        let path = tmp("roundtrip.csv");
        write_trace_csv(&path, &h1, &h2, Some(&[0.0, 0.1, 0.2, 0.3])).unwrap();
        let (r1, r2, truth) = ingest_trace_csv(&path).unwrap();
        assert_eq!(r1.len(), 4);
        assert_eq!(r1.samples(), h1.samples());
        assert_eq!(r2.samples(), h2.samples());
        assert_eq!(truth.unwrap(), vec![0.0, 0.1, 0.2, 0.3]);
    }

    #[test]
    fn text_in_numeric_column_names_line() {
        let path = tmp("badrow.csv");
        let mut body = String::from("t,ant1_re,ant1_im,ant2_re,ant2_im\n");
        for i in 0..10 {
            if i == 5 {
                body.push_str(&format!("{}e-3,0.1,oops,0.3,0.4\n", i));
            } else {
                body.push_str(&format!("{}e-3,0.1,0.2,0.3,0.4\n", i));
            }
        }
        std::fs::write(&path, body).unwrap();
        match ingest_trace_csv(&path) {
            Err(TraceIoError::Malformed { line, .. }) => assert_eq!(line, 7),
            other => panic!("expected malformed-row error, got {other:?}"),
        }
    }

    #[test]
    fn non_monotonic_rejected() {
        let path = tmp("nonmono.csv");
        std::fs::write(
            &path,
            "t,ant1_re,ant1_im,ant2_re,ant2_im\n0.0,1,0,1,0\n0.002,1,0,1,0\n0.001,1,0,1,0\n",
        )
        .unwrap();
        assert!(matches!(
            ingest_trace_csv(&path),
            Err(TraceIoError::NonMonotonic { .. })
        ));
    }

    #[test]
    fn ragged_rows_rejected() {
        let path = tmp("ragged.csv");
        std::fs::write(
            &path,
            "t,ant1_re,ant1_im,ant2_re,ant2_im\n0.0,1,0,1,0\n0.001,1,0,1\n",
        )
        .unwrap();
        assert!(matches!(
            ingest_trace_csv(&path),
            Err(TraceIoError::Malformed { line: 3, .. })
        ));
    }

    #[test]
    fn irregular_grid_rejected() {
        let path = tmp("nonuniform.csv");
        let mut body = String::from("t,ant1_re,ant1_im,ant2_re,ant2_im\n");
        let times = [0.0, 0.001, 0.0025, 0.003, 0.004];
        for t in times {
            body.push_str(&format!("{t},1,0,1,0\n"));
        }
        std::fs::write(&path, body).unwrap();
        assert!(matches!(
            ingest_trace_csv(&path),
            Err(TraceIoError::NonUniform { .. })
        ));
    }
}
