//! Threshold detectors on the vertical accelerometer axis.
//!
//! Each detector evaluates a per-sample predicate and reports one event at
//! the first sample of every maximal qualifying run.

use crate::error::{Error, Result};
use crate::features::samples_for;
use crate::ingest::SampleStream;
use crate::scalar::Real;

use super::{run_starts, DetectionEvent, Method};

/// Default thresholds in m/s² and window lengths in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineDefaults;

impl BaselineDefaults {
    pub const Z_THRESH: f64 = 4.0;
    pub const Z_DIFF: f64 = 3.0;
    pub const STDEV_WINDOW_S: f64 = 0.5;
    pub const STDEV_Z: f64 = 1.5;
    pub const G_ZERO: f64 = 2.0;
    pub const G_ZERO_MIN_DUR_S: f64 = 0.06;
}

fn check_threshold<T: Real>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} threshold must be positive, got {v}"
        )))
    }
}

fn events<T: Real>(
    stream: &SampleStream<T>,
    method: Method,
    stat: &[T],
    offset: usize,
    thr: T,
) -> Vec<DetectionEvent<T>> {
    let s = stream.samples();
    run_starts(stat.iter().map(|&v| v > thr))
        .into_iter()
        .map(|k| DetectionEvent {
            t: s[k + offset].t,
            method,
            value: stat[k],
            location: None,
        })
        .collect()
}

fn median<T: Real>(mut v: Vec<T>) -> T {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) * T::lit(0.5)
    }
}

/// `|az − median(az)| > threshold`.
pub fn z_thresh<T: Real>(stream: &SampleStream<T>, threshold: T) -> Result<Vec<DetectionEvent<T>>> {
    check_threshold("z_thresh", threshold)?;
    if stream.is_empty() {
        return Ok(Vec::new());
    }
    let az: Vec<T> = stream.samples().iter().map(|s| s.accel[2]).collect();
    let m = median(az.clone());
    let dev: Vec<T> = az.iter().map(|&a| (a - m).abs()).collect();
    Ok(events(stream, Method::ZThresh, &dev, 0, threshold))
}

/// `|az[i] − az[i−1]| > threshold`, reported at sample `i`.
pub fn z_diff<T: Real>(stream: &SampleStream<T>, threshold: T) -> Result<Vec<DetectionEvent<T>>> {
    check_threshold("z_diff", threshold)?;
    let s = stream.samples();
    if s.len() < 2 {
        return Ok(Vec::new());
    }
    let d: Vec<T> = s
        .windows(2)
        .map(|w| (w[1].accel[2] - w[0].accel[2]).abs())
        .collect();
    Ok(events(stream, Method::ZDiff, &d, 1, threshold))
}

/// Population std of `az` over a trailing window of `win` seconds,
/// evaluated once the window is full.
pub fn stdev_z<T: Real>(
    stream: &SampleStream<T>,
    win: T,
    threshold: T,
) -> Result<Vec<DetectionEvent<T>>> {
    check_threshold("stdev_z", threshold)?;
    if !(win > T::zero()) {
        return Err(Error::InvalidArgument(
            "stdev_z window must be positive".into(),
        ));
    }
    let m = samples_for(win, stream.nominal_rate());
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "stdev_z window holds {m} samples, need at least 2"
        )));
    }
    let s = stream.samples();
    if s.len() < m {
        return Ok(Vec::new());
    }
    // running sums of az - az[0]
    let shift = s[0].accel[2];
    let mf = T::from_usize_lossy(m);
    let (mut s1, mut s2) = (T::zero(), T::zero());
    let mut sd = Vec::with_capacity(s.len() - m + 1);
    for (i, smp) in s.iter().enumerate() {
        let x = smp.accel[2] - shift;
        s1 += x;
        s2 += x * x;
        if i >= m {
            let y = s[i - m].accel[2] - shift;
            s1 -= y;
            s2 -= y * y;
        }
        if i + 1 >= m {
            let mean = s1 / mf;
            sd.push((s2 / mf - mean * mean).max(T::zero()).sqrt());
        }
    }
    Ok(events(stream, Method::StdevZ, &sd, m - 1, threshold))
}

/// All three accelerometer axes below `threshold` in magnitude for at least
/// `min_dur` seconds. The event value is the run duration in seconds.
pub fn g_zero<T: Real>(
    stream: &SampleStream<T>,
    threshold: T,
    min_dur: T,
) -> Result<Vec<DetectionEvent<T>>> {
    check_threshold("g_zero", threshold)?;
    if !(min_dur >= T::zero() && min_dur.is_finite()) {
        return Err(Error::InvalidArgument("g_zero min_dur must be >= 0".into()));
    }
    let rate = stream.nominal_rate();
    let need = (min_dur * rate - T::lit(1e-9)).ceil().max(T::one());
    let need = need.as_f64() as usize;
    let s = stream.samples();
    let q: Vec<bool> = s
        .iter()
        .map(|x| x.accel.iter().all(|a| a.abs() < threshold))
        .collect();
    let mut out = Vec::new();
    for k in run_starts(q.iter().copied()) {
        let len = q[k..].iter().take_while(|&&b| b).count();
        if len >= need {
            out.push(DetectionEvent {
                t: s[k].t,
                method: Method::GZero,
                value: T::from_usize_lossy(len) / rate,
                location: None,
            });
        }
    }
    Ok(out)
}
