//! Event detectors over sample streams and their evaluation.

mod baselines;
mod compare;
mod eval;

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::features::{extract_from_samples, samples_for};
use crate::ingest::SampleStream;
use crate::scalar::Real;
use crate::svm::LinearSvmModel;

pub use baselines::{g_zero, stdev_z, z_diff, z_thresh, BaselineDefaults};
pub use compare::{
    compare_detectors, ground_truth, render_comparison, CompareRow, Sweep, TruthSpan,
    MATCH_TOLERANCE_S,
};
pub use eval::{
    balanced_event_dataset, cross_validate, evaluate, render_confusion, ConfusionMatrix,
    CrossValidation,
};

pub const DEFAULT_REFRACTORY_S: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Svm,
    ZThresh,
    ZDiff,
    StdevZ,
    GZero,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Svm,
        Method::ZThresh,
        Method::ZDiff,
        Method::StdevZ,
        Method::GZero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Svm => "svm",
            Method::ZThresh => "z_thresh",
            Method::ZDiff => "z_diff",
            Method::StdevZ => "stdev_z",
            Method::GZero => "g_zero",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionEvent<T> {
    /// Start of the triggering window (SVM) or first sample of the
    /// qualifying run (baselines), seconds.
    pub t: T,
    pub method: Method,
    /// SVM margin, or the statistic that crossed the threshold.
    pub value: T,
    /// `(lat, lon)` in degrees.
    pub location: Option<(f64, f64)>,
}

/// Sliding SVM detector. Windows of `win` seconds are classified every
/// `win / 2`; after an event, windows starting within `refractory` seconds
/// (inclusive) of it are skipped.
pub fn detect_svm_stream<T: Real>(
    model: &LinearSvmModel<T>,
    stream: &SampleStream<T>,
    win: T,
    refractory: T,
) -> Result<Vec<DetectionEvent<T>>> {
    if !(win > T::zero()) {
        return Err(Error::InvalidArgument("window must be positive".into()));
    }
    if !(refractory >= T::zero()) {
        return Err(Error::InvalidArgument("refractory must be >= 0".into()));
    }
    let rate = stream.nominal_rate();
    let len = samples_for(win, rate);
    if len == 0 {
        return Err(Error::InvalidArgument(
            "window shorter than one sample".into(),
        ));
    }
    let hop = samples_for(win * T::lit(0.5), rate).max(1);
    let s = stream.samples();
    let slack = T::lit(1e-9);
    let mut events = Vec::new();
    let mut last: Option<T> = None;
    let mut start = 0;
    while start + len <= s.len() {
        let t = s[start].t;
        let blocked = last.is_some_and(|e| t - e <= refractory + slack);
        if !blocked {
            let fv = extract_from_samples(&s[start..start + len])?;
            let margin = model.decision(&fv)?;
            if margin > T::zero() {
                events.push(DetectionEvent {
                    t,
                    method: Method::Svm,
                    value: margin,
                    location: None,
                });
                last = Some(t);
            }
        }
        start += hop;
    }
    Ok(events)
}

/// Time-stamped positions; lookups return the nearest fix in time.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GpsTrack {
    fixes: Vec<(f64, f64, f64)>,
}

impl GpsTrack {
    pub fn new(mut fixes: Vec<(f64, f64, f64)>) -> Result<Self> {
        for &(t, lat, lon) in &fixes {
            if !t.is_finite() || lat.abs() > 90.0 || lon.abs() > 180.0 {
                return Err(Error::InvalidArgument(format!(
                    "bad GPS fix ({t}, {lat}, {lon})"
                )));
            }
        }
        fixes.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self { fixes })
    }

    /// Parses `t,lat,lon` CSV with an optional header row.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut fixes = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if i == 0 && f[0].parse::<f64>().is_err() {
                continue;
            }
            if f.len() != 3 {
                return Err(Error::Arity {
                    row: i + 1,
                    expected: 3,
                    found: f.len(),
                });
            }
            let mut v = [0.0; 3];
            for (c, slot) in v.iter_mut().enumerate() {
                *slot = f[c].parse().map_err(|_| Error::Parse {
                    row: i + 1,
                    column: c + 1,
                    value: f[c].to_string(),
                })?;
            }
            fixes.push((v[0], v[1], v[2]));
        }
        Self::new(fixes)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,lat,lon\n");
        for (t, lat, lon) in &self.fixes {
            let _ = writeln!(out, "{t},{lat},{lon}");
        }
        out
    }

    pub fn nearest(&self, t: f64) -> Option<(f64, f64)> {
        let i = self.fixes.partition_point(|f| f.0 < t);
        let cand = [i.checked_sub(1), (i < self.fixes.len()).then_some(i)];
        cand.into_iter()
            .flatten()
            .min_by(|&a, &b| {
                (self.fixes[a].0 - t)
                    .abs()
                    .total_cmp(&(self.fixes[b].0 - t).abs())
            })
            .map(|k| (self.fixes[k].1, self.fixes[k].2))
    }
}

pub fn attach_locations<T: Real>(events: &mut [DetectionEvent<T>], track: &GpsTrack) {
    for e in events {
        e.location = track.nearest(e.t.as_f64());
    }
}

/// CSV `t,method,value,lat,lon`; lat/lon empty when unknown.
pub fn write_events_csv<T: Real>(events: &[DetectionEvent<T>]) -> String {
    let mut out = String::from("t,method,value,lat,lon\n");
    for e in events {
        let (lat, lon) = match e.location {
            Some((a, b)) => (a.to_string(), b.to_string()),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(out, "{},{},{},{},{}", e.t, e.method, e.value, lat, lon);
    }
    out
}

/// Collapses a per-sample predicate into one index per maximal run.
pub(crate) fn run_starts(qualifies: impl Iterator<Item = bool>) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prev = false;
    for (i, q) in qualifies.enumerate() {
        if q && !prev {
            out.push(i);
        }
        prev = q;
    }
    out
}
