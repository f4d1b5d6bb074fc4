//! Amplitude-envelope fitting.
//!
//! Within a short window the channel rotates at a near-constant rate, so
//! the denominator amplitude follows `|m + r*exp(j(w*t + beta))|` with
//! `m = (max+min)/2` and `r = (max-min)/2`. The squared amplitude is then
//! affine in `cos`/`sin` at fixed rate, which gives a cheap linear
//! subproblem; a rate scan plus golden-section refinement initializes a
//! damped Gauss-Newton polish on the amplitude residuals.
//!
//! [`calibrate_k_scale`] estimates the envelope product `k = max*min` from
//! a whole trace at once by exploiting self-consistency: the corrected
//! rotation built with the right `k` must phase-align the squared-amplitude
//! oscillation over the full record.

use crate::recovery::{AmplitudeEnvelope, AmplitudeSeries};
use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use thiserror::Error;

/// Minimum time a fitted window must span, in seconds.
const MIN_WINDOW_SPAN_S: f64 = 0.1;

/// Amplitude swing below this fraction of the mean means the window holds
/// no usable rotation information.
const STATIC_SWING_FRACTION: f64 = 0.02;

const MAX_LM_ITERS: usize = 100;
const LM_RELATIVE_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum EnvelopeError {
    #[error("window spans {span_s} s, need at least {min_s} s")]
    WindowTooShort { span_s: f64, min_s: f64 },
    #[error("too few samples for envelope fit: {0}")]
    TooFewSamples(usize),
    #[error("static window: amplitude swing is {swing_ratio:.4} of the mean")]
    StaticWindow { swing_ratio: f64 },
    #[error("optimizer did not converge after {iters} iterations (rmse {rmse:e})")]
    NonConvergence { iters: usize, rmse: f64 },
    #[error("total rotation {total_rad} rad too small to calibrate the envelope scale")]
    InsufficientRotation { total_rad: f64 },
    #[error("degenerate calibration input: {0}")]
    Degenerate(String),
}

/// Trace-level envelope scale estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleCalibration {
    /// Envelope product `max*min` that best explains the amplitude record.
    pub k: f64,
    /// Fitted mean of the squared amplitude (`max^2 + min^2`)/2 analog.
    pub c_coeff: f64,
    /// Fitted oscillation amplitude of the squared amplitude.
    pub d_coeff: f64,
    /// Product implied by the quadratic coefficients, `sqrt(C^2 - D^2)`;
    /// agreement with `k` is a consistency diagnostic.
    pub implied_k: f64,
    /// RMS residual of the squared-amplitude fit at the optimum.
    pub residual_rms: f64,
    /// Envelope maximum consistent with the fit.
    pub max_amp: f64,
    /// Envelope minimum, `k / max_amp`.
    pub min_amp: f64,
}

/// Least squares of `s ~ c0 + a*cos(phase) + b*sin(phase)`.
/// Returns `(c0, a, b, sum of squared residuals)`.
fn fit_offset_cosine(phases: &[f64], s: &[f64]) -> Option<(f64, f64, f64, f64)> {
    let n = phases.len() as f64;
    let (mut sc, mut ss, mut scc, mut scs, mut sss) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut sy, mut syc, mut sys) = (0.0, 0.0, 0.0);
    for (&p, &y) in phases.iter().zip(s) {
        let c = p.cos();
        let si = p.sin();
        sc += c;
        ss += si;
        scc += c * c;
        scs += c * si;
        sss += si * si;
        sy += y;
        syc += y * c;
        sys += y * si;
    }
    let m = Matrix3::new(n, sc, ss, sc, scc, scs, ss, scs, sss);
    let rhs = Vector3::new(sy, syc, sys);
    let sol = m.lu().solve(&rhs)?;
    let (c0, a, b) = (sol[0], sol[1], sol[2]);
    let mut resid = 0.0;
    for (&p, &y) in phases.iter().zip(s) {
        let e = y - c0 - a * p.cos() - b * p.sin();
        resid += e * e;
    }
    Some((c0, a, b, resid))
}

fn varpro_cost(tau: &[f64], s: &[f64], omega: f64) -> Option<(f64, f64, f64, f64)> {
    let phases: Vec<f64> = tau.iter().map(|&t| omega * t).collect();
    fit_offset_cosine(&phases, s).map(|(c0, a, b, resid)| (resid, c0, a, b))
}

/// Golden-section minimization of `f` on `[lo, hi]`.
fn golden_min<F: FnMut(f64) -> f64>(mut lo: f64, mut hi: f64, iters: usize, mut f: F) -> f64 {
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - gr * (hi - lo);
    let mut d = lo + gr * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

struct LmFit {
    m: f64,
    r: f64,
    omega: f64,
    beta: f64,
    cost: f64,
    converged: bool,
    iters: usize,
}

/// Damped Gauss-Newton on amplitude residuals
/// `sqrt(m^2 + r^2 + 2 m r cos(w tau + beta)) - y`, parameterized so that
/// `m >= r >= 0` holds throughout (`m = mu^2 + rho^2`, `r = rho^2`).
fn lm_refine(tau: &[f64], y: &[f64], m0: f64, r0: f64, omega0: f64, beta0: f64) -> LmFit {
    let n = tau.len();
    let mut mu = (m0 - r0).max(0.0).sqrt();
    let mut rho = r0.max(1e-12).sqrt();
    let mut omega = omega0;
    let mut beta = beta0;

    let eval = |mu: f64, rho: f64, omega: f64, beta: f64, resid: &mut Vec<f64>| -> f64 {
        let m = mu * mu + rho * rho;
        let r = rho * rho;
        resid.clear();
        let mut cost = 0.0;
        for (&t, &yy) in tau.iter().zip(y) {
            let psi = omega * t + beta;
            let a2 = (m * m + r * r + 2.0 * m * r * psi.cos()).max(0.0);
            let f = a2.sqrt() - yy;
            resid.push(f);
            cost += f * f;
        }
        cost
    };

    let mut resid = Vec::with_capacity(n);
    let mut trial = Vec::with_capacity(n);
    let mut cost = eval(mu, rho, omega, beta, &mut resid);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iters = 0;

    for it in 0..MAX_LM_ITERS {
        iters = it + 1;
        let m = mu * mu + rho * rho;
        let r = rho * rho;
        let mut jtj = Matrix4::zeros();
        let mut jtf = Vector4::zeros();
        for (i, &t) in tau.iter().enumerate() {
            let psi = omega * t + beta;
            let cosp = psi.cos();
            let a = (m * m + r * r + 2.0 * m * r * cosp).max(1e-300).sqrt();
            let da_dm = (m + r * cosp) / a;
            let da_dr = (r + m * cosp) / a;
            let da_dpsi = -m * r * psi.sin() / a;
            let j = Vector4::new(
                da_dm * 2.0 * mu,
                (da_dm + da_dr) * 2.0 * rho,
                da_dpsi * t,
                da_dpsi,
            );
            jtj += j * j.transpose();
            jtf += j * resid[i];
        }
        let mut stepped = false;
        let mut rel = f64::INFINITY;
        for _ in 0..15 {
            let mut damped = jtj;
            for d in 0..4 {
                damped[(d, d)] += lambda * jtj[(d, d)] + 1e-300;
            }
            let Some(step) = damped.lu().solve(&(-jtf)) else {
                lambda *= 10.0;
                continue;
            };
            let cand = (mu + step[0], rho + step[1], omega + step[2], beta + step[3]);
            let c2 = eval(cand.0, cand.1, cand.2, cand.3, &mut trial);
            if c2 < cost {
                rel = (cost - c2) / cost.max(1e-300);
                mu = cand.0;
                rho = cand.1;
                omega = cand.2;
                beta = cand.3;
                std::mem::swap(&mut resid, &mut trial);
                cost = c2;
                lambda = (lambda / 10.0).max(1e-14);
                stepped = true;
                break;
            }
            lambda *= 10.0;
        }
        if stepped && rel < LM_RELATIVE_TOL {
            converged = true;
            break;
        }
        if !stepped {
            // no direction improves the cost; treat as converged at the
            // current minimum
            converged = true;
            break;
        }
    }

    LmFit {
        m: mu * mu + rho * rho,
        r: rho * rho,
        omega,
        beta,
        cost,
        converged,
        iters,
    }
}

/// Dominant nonzero-frequency bin of the demeaned series, as an angular
/// rate over the window span.
fn dominant_rate(tau: &[f64], y: &[f64]) -> f64 {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let span = tau[n - 1] - tau[0];
    let max_bin = (n / 2).clamp(1, 256);
    let mut best_k = 1;
    let mut best_mag = -1.0;
    for k in 1..=max_bin {
        let (mut re, mut im) = (0.0, 0.0);
        let w = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        for (i, &v) in y.iter().enumerate() {
            let ph = w * i as f64;
            re += (v - mean) * ph.cos();
            im -= (v - mean) * ph.sin();
        }
        let mag = re * re + im * im;
        if mag > best_mag {
            best_mag = mag;
            best_k = k;
        }
    }
    2.0 * std::f64::consts::PI * best_k as f64 / span
}

/// Fits the rotating-envelope amplitude model to one window of samples.
///
/// Errors with [`EnvelopeError::StaticWindow`] when the swing is below 2%
/// of the mean; callers fall back to the previous valid envelope.
pub fn fit_envelope(amps: &AmplitudeSeries) -> Result<AmplitudeEnvelope, EnvelopeError> {
    let y = amps.magnitude();
    let ts = amps.timestamps();
    let n = y.len();
    if n < 8 {
        return Err(EnvelopeError::TooFewSamples(n));
    }
    let span = ts[n - 1] - ts[0];
    if span < MIN_WINDOW_SPAN_S {
        return Err(EnvelopeError::WindowTooShort {
            span_s: span,
            min_s: MIN_WINDOW_SPAN_S,
        });
    }
    let (mut y_max, mut y_min, mut sum) = (f64::MIN, f64::MAX, 0.0);
    for &v in y {
        y_max = y_max.max(v);
        y_min = y_min.min(v);
        sum += v;
    }
    let mean = sum / n as f64;
    let swing_ratio = (y_max - y_min) / mean.max(1e-300);
    if swing_ratio < STATIC_SWING_FRACTION {
        return Err(EnvelopeError::StaticWindow { swing_ratio });
    }

    let t_mid = ts.iter().sum::<f64>() / n as f64;
    let tau: Vec<f64> = ts.iter().map(|&t| t - t_mid).collect();
    let s: Vec<f64> = y.iter().map(|&v| v * v).collect();

    // rate scan: log grid over the window bandwidth plus the DFT peak
    let bin = 2.0 * std::f64::consts::PI / span;
    let lo = 0.02 * bin;
    let hi = 4.0 * bin;
    let n_cand = 128;
    let mut best = (f64::INFINITY, lo);
    for j in 0..n_cand {
        let omega = lo * (hi / lo).powf(j as f64 / (n_cand - 1) as f64);
        if let Some((resid, ..)) = varpro_cost(&tau, &s, omega) {
            if resid < best.0 {
                best = (resid, omega);
            }
        }
    }
    let omega_fft = dominant_rate(&tau, y);
    if let Some((resid, ..)) = varpro_cost(&tau, &s, omega_fft) {
        if resid < best.0 {
            best = (resid, omega_fft);
        }
    }
    let step = (hi / lo).powf(1.0 / (n_cand - 1) as f64);
    let omega_star = golden_min(best.1 / step, best.1 * step, 60, |w| {
        varpro_cost(&tau, &s, w).map_or(f64::INFINITY, |r| r.0)
    });

    let (_, c0, a, b) =
        varpro_cost(&tau, &s, omega_star).ok_or(EnvelopeError::Degenerate("rate scan".into()))?;
    let d = a.hypot(b);
    let beta_quad = (-b).atan2(a);
    let max0 = (c0 + d).max(0.0).sqrt();
    let min0 = (c0 - d).max(0.0).sqrt();
    let fit_a = lm_refine(
        &tau,
        y,
        0.5 * (max0 + min0),
        0.5 * (max0 - min0),
        omega_star,
        beta_quad,
    );

    // second start per the sample-extrema initialization, with the DFT rate
    // and the best of 16 grid phases
    let m_init = 0.5 * (y_max + y_min);
    let r_init = 0.5 * (y_max - y_min);
    let mut beta_best = 0.0;
    let mut cost_best = f64::INFINITY;
    for j in 0..16 {
        let beta = 2.0 * std::f64::consts::PI * j as f64 / 16.0 - std::f64::consts::PI;
        let mut cost = 0.0;
        for (&t, &yy) in tau.iter().zip(y) {
            let psi = omega_fft * t + beta;
            let a2 = m_init * m_init + r_init * r_init + 2.0 * m_init * r_init * psi.cos();
            let f = a2.max(0.0).sqrt() - yy;
            cost += f * f;
        }
        if cost < cost_best {
            cost_best = cost;
            beta_best = beta;
        }
    }
    let fit_b = lm_refine(&tau, y, m_init, r_init, omega_fft, beta_best);

    let fit = if fit_a.cost <= fit_b.cost {
        fit_a
    } else {
        fit_b
    };
    if !fit.converged {
        return Err(EnvelopeError::NonConvergence {
            iters: fit.iters,
            rmse: (fit.cost / n as f64).sqrt(),
        });
    }

    let (mut omega, mut beta) = (fit.omega, fit.beta);
    if omega < 0.0 {
        omega = -omega;
        beta = -beta;
    }
    // reference beta to absolute time
    beta = crate::ratio::wrap_angle(beta - omega * t_mid);

    Ok(AmplitudeEnvelope {
        max_amp: fit.m + fit.r,
        min_amp: fit.m - fit.r,
        omega_rad_s: omega,
        beta_rad: beta,
        window_start: ts[0],
        window_end: ts[n - 1],
        fit_rmse: (fit.cost / n as f64).sqrt(),
    })
}

/// Residual of the squared-amplitude regression at scale `k`, evaluated on
/// a strided subset. The accumulated weighted rotation `g` is independent
/// of `k` (the candidate only rescales it), so it is computed once by the
/// caller.
fn scale_cost_strided(k: f64, sq: &[f64], g: &[f64], stride: usize) -> f64 {
    let phases: Vec<f64> = g.iter().step_by(stride).map(|&gi| gi / k).collect();
    let samples: Vec<f64> = sq.iter().step_by(stride).copied().collect();
    fit_offset_cosine(&phases, &samples).map_or(f64::INFINITY, |(_, _, _, r)| r)
}

/// Estimates the envelope product `k = max*min` from a whole trace.
///
/// For each candidate `k` the corrected rotation is accumulated from the
/// measured ratio increments and the squared amplitude is regressed on its
/// cosine; the `k` minimizing the residual phase-aligns the record. The
/// long accumulated arc makes this far better conditioned than any
/// single-window fit.
pub fn calibrate_k_scale(
    sq: &[f64],
    mid_sq: &[f64],
    increments: &[f64],
) -> Result<ScaleCalibration, EnvelopeError> {
    let n = sq.len();
    if n < 16 || mid_sq.len() != n - 1 || increments.len() != n - 1 {
        return Err(EnvelopeError::Degenerate(format!(
            "need aligned series, got {n} amplitudes, {} mids, {} increments",
            mid_sq.len(),
            increments.len()
        )));
    }
    let total: f64 = increments.iter().sum();
    if total.abs() < 0.5 {
        return Err(EnvelopeError::InsufficientRotation { total_rad: total });
    }
    let (mut y_max, mut y_min) = (f64::MIN, f64::MAX);
    for &v in sq {
        y_max = y_max.max(v);
        y_min = y_min.min(v);
    }
    let mean = sq.iter().sum::<f64>() / n as f64;
    if (y_max - y_min) < STATIC_SWING_FRACTION * mean.max(1e-300) {
        return Err(EnvelopeError::StaticWindow {
            swing_ratio: (y_max - y_min) / mean.max(1e-300),
        });
    }

    // accumulated |H2|^2-weighted rotation; candidates only rescale it
    let mut g = Vec::with_capacity(n);
    let mut acc = 0.0;
    g.push(acc);
    for (m, dphi) in mid_sq.iter().zip(increments) {
        acc += m * dphi;
        g.push(acc);
    }
    let stride = (n / 4096).max(1);

    let lo = 0.03 * mean;
    let hi = 3.0 * mean;
    let n_cand = 240;
    let mut best = (f64::INFINITY, lo);
    for j in 0..n_cand {
        let k = lo * (hi / lo).powf(j as f64 / (n_cand - 1) as f64);
        let cost = scale_cost_strided(k, sq, &g, stride);
        if cost < best.0 {
            best = (cost, k);
        }
    }
    let step = (hi / lo).powf(1.0 / (n_cand - 1) as f64);
    let k = golden_min(best.1 / step, best.1 * step, 70, |kk| {
        scale_cost_strided(kk, sq, &g, stride)
    });

    let phases: Vec<f64> = g.iter().map(|&gi| gi / k).collect();
    let (c0, a, b, resid) = fit_offset_cosine(&phases, sq)
        .ok_or(EnvelopeError::Degenerate("scale regression".into()))?;
    let d = a.hypot(b);
    let implied_k = (c0 * c0 - d * d).max(0.0).sqrt();
    let max_amp = (c0 + d).max(k).sqrt();
    Ok(ScaleCalibration {
        k,
        c_coeff: c0,
        d_coeff: d,
        implied_k,
        residual_rms: (resid / n as f64).sqrt(),
        max_amp,
        min_amp: k / max_amp,
    })
}
