//! Sensor log format: parsing, writing and rate validation.
//!
//! A log is UTF-8 CSV with eight columns `t,ax,ay,az,gx,gy,gz,flag`. The
//! first row may be a header if its first token is not numeric. Rows end in
//! LF or CRLF; blank lines are ignored.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_RATE: f64 = 50.0;
pub const LOG_COLUMNS: usize = 8;
pub const LOG_HEADER: &str = "t,ax,ay,az,gx,gy,gz,flag";

/// One timestamped 6-axis inertial reading plus the ground-truth flag.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ImuSample<T> {
    /// Seconds since stream start.
    pub t: T,
    /// Acceleration, m/s².
    pub accel: [T; 3],
    /// Angular rate, rad/s.
    pub gyro: [T; 3],
    pub flag: bool,
}

impl<T: Real> ImuSample<T> {
    pub fn new(t: T, accel: [T; 3], gyro: [T; 3], flag: bool) -> Self {
        Self {
            t,
            accel,
            gyro,
            flag,
        }
    }

    pub fn accel_norm(&self) -> T {
        norm3(&self.accel)
    }

    pub fn gyro_norm(&self) -> T {
        norm3(&self.gyro)
    }

    fn is_valid(&self) -> bool {
        self.t.is_finite()
            && self
                .accel
                .iter()
                .chain(self.gyro.iter())
                .all(|v| v.is_finite())
    }
}

fn norm3<T: Real>(v: &[T; 3]) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Ordered samples with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStream<T> {
    samples: Vec<ImuSample<T>>,
    nominal_rate: T,
}

impl<T: Real> SampleStream<T> {
    /// Builds a stream, checking every invariant.
    pub fn new(samples: Vec<ImuSample<T>>, nominal_rate: T) -> Result<Self> {
        if !(nominal_rate > T::zero()) || !nominal_rate.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "nominal rate must be positive, got {nominal_rate}"
            )));
        }
        for (i, s) in samples.iter().enumerate() {
            if !s.is_valid() {
                return Err(Error::NonFinite("sample stream"));
            }
            if s.t < T::zero() {
                return Err(Error::Field {
                    row: i + 1,
                    column: 1,
                    msg: format!("negative timestamp {}", s.t),
                });
            }
            if i > 0 && s.t <= samples[i - 1].t {
                return Err(Error::Ordering { row: i + 1 });
            }
        }
        Ok(Self {
            samples,
            nominal_rate,
        })
    }

    pub fn empty() -> Self {
        Self {
            samples: Vec::new(),
            nominal_rate: T::lit(DEFAULT_RATE),
        }
    }

    pub fn samples(&self) -> &[ImuSample<T>] {
        &self.samples
    }

    pub fn nominal_rate(&self) -> T {
        self.nominal_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn into_samples(self) -> Vec<ImuSample<T>> {
        self.samples
    }

    /// Whether any sample carries the ground-truth flag.
    pub fn is_labeled(&self) -> bool {
        self.samples.iter().any(|s| s.flag)
    }

    /// Index ranges `[start, end)` of each contiguous run of flagged samples.
    pub fn flagged_runs(&self) -> Vec<std::ops::Range<usize>> {
        let mut runs = Vec::new();
        let mut start = None;
        for (i, s) in self.samples.iter().enumerate() {
            match (s.flag, start) {
                (true, None) => start = Some(i),
                (false, Some(b)) => {
                    runs.push(b..i);
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(b) = start {
            runs.push(b..self.samples.len());
        }
        runs
    }
}

/// Parses a sensor log. The nominal rate is estimated from the first and last
/// timestamps when at least two samples are present.
pub fn parse_log<T: Real>(text: &str) -> Result<SampleStream<T>> {
    let mut samples: Vec<ImuSample<T>> = Vec::new();
    let mut seen_row = false;

    for (idx, raw) in text.split('\n').enumerate() {
        let row = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if !seen_row {
            seen_row = true;
            if fields[0].parse::<f64>().is_err() {
                continue;
            }
        }
        if fields.len() != LOG_COLUMNS {
            return Err(Error::Arity {
                row,
                expected: LOG_COLUMNS,
                found: fields.len(),
            });
        }
        let mut vals = [T::zero(); LOG_COLUMNS - 1];
        for (col, (slot, tok)) in vals.iter_mut().zip(&fields).enumerate() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                row,
                column: col + 1,
                value: tok.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::Field {
                    row,
                    column: col + 1,
                    msg: "value is not finite".into(),
                });
            }
            *slot = T::lit(v);
        }
        if vals[0] < T::zero() {
            return Err(Error::Field {
                row,
                column: 1,
                msg: "timestamp is negative".into(),
            });
        }
        let flag = match fields[7] {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::Field {
                    row,
                    column: 8,
                    msg: format!("flag must be 0 or 1, got {other:?}"),
                })
            }
        };
        if let Some(prev) = samples.last() {
            if vals[0] <= prev.t {
                return Err(Error::Ordering { row });
            }
        }
        samples.push(ImuSample {
            t: vals[0],
            accel: [vals[1], vals[2], vals[3]],
            gyro: [vals[4], vals[5], vals[6]],
            flag,
        });
    }

    let rate = match (samples.first(), samples.last()) {
        (Some(a), Some(b)) if samples.len() >= 2 => {
            T::from_usize_lossy(samples.len() - 1) / (b.t - a.t)
        }
        _ => T::lit(DEFAULT_RATE),
    };
    SampleStream::new(samples, rate)
}

/// Writes a stream in the log format, without a header. Values use the
/// shortest representation that parses back to the same number.
pub fn write_log<T: Real>(stream: &SampleStream<T>) -> String {
    let mut out = String::with_capacity(stream.len() * 64);
    for s in stream.samples() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.t,
            s.accel[0],
            s.accel[1],
            s.accel[2],
            s.gyro[0],
            s.gyro[1],
            s.gyro[2],
            u8::from(s.flag)
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateViolation<T> {
    /// Index of the sample that closes the offending gap.
    pub index: usize,
    pub gap: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RateReport<T> {
    /// Fewer than two samples; there is no gap to check.
    NotApplicable,
    Checked(Vec<RateViolation<T>>),
}

impl<T> RateReport<T> {
    pub fn is_conformant(&self) -> bool {
        matches!(self, RateReport::Checked(v) if v.is_empty())
    }
}

/// Lists every inter-sample gap deviating from `1/expected` by more than
/// `tolerance / expected`.
pub fn validate_rate<T: Real>(
    stream: &SampleStream<T>,
    expected: T,
    tolerance: T,
) -> Result<RateReport<T>> {
    if !(expected > T::zero()) {
        return Err(Error::InvalidArgument(
            "expected rate must be positive".into(),
        ));
    }
    if !(tolerance > T::zero() && tolerance < T::one()) {
        return Err(Error::InvalidArgument(
            "tolerance must lie in (0, 1)".into(),
        ));
    }
    let s = stream.samples();
    if s.len() < 2 {
        return Ok(RateReport::NotApplicable);
    }
    let period = expected.recip();
    let slack = tolerance * period;
    let violations = s
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| {
            let gap = w[1].t - w[0].t;
            ((gap - period).abs() > slack).then_some(RateViolation { index: i + 1, gap })
        })
        .collect();
    Ok(RateReport::Checked(violations))
}
