//! Windowing and the six-statistic feature summary.
//!
//! Features are `[mean, std, range]` of the accelerometer magnitude followed
//! by the same three statistics of the gyroscope magnitude. Standard
//! deviations are population (divide by N).

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::ingest::{ImuSample, SampleStream};
use crate::scalar::{snap_floor, Real};

pub const N_FEATURES: usize = 6;
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "accel_mean",
    "accel_std",
    "accel_range",
    "gyro_mean",
    "gyro_std",
    "gyro_range",
];

pub const DEFAULT_WINDOW_S: f64 = 1.0;
pub const DEFAULT_HOP_S: f64 = 0.5;

/// A contiguous, non-empty slice of a stream.
#[derive(Debug, Clone, Copy)]
pub struct Window<'a, T> {
    pub samples: &'a [ImuSample<T>],
    /// Index of the first sample in the source stream.
    pub start_index: usize,
    pub start_t: T,
    /// True iff any contained sample is flagged.
    pub label: bool,
}

impl<'a, T: Real> Window<'a, T> {
    pub fn new(stream: &'a SampleStream<T>, start: usize, len: usize) -> Self {
        let samples = &stream.samples()[start..start + len];
        Self {
            samples,
            start_index: start,
            start_t: samples[0].t,
            label: samples.iter().any(|s| s.flag),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Number of samples covering `seconds` at `rate`.
pub fn samples_for<T: Real>(seconds: T, rate: T) -> usize {
    snap_floor(seconds * rate)
}

/// Slices `stream` into windows of `⌊win·rate⌋` samples every `⌊hop·rate⌋`
/// samples. A trailing partial window is dropped.
pub fn make_windows<T: Real>(
    stream: &SampleStream<T>,
    win_seconds: T,
    hop_seconds: T,
) -> Result<Vec<Window<'_, T>>> {
    if !(hop_seconds > T::zero() && hop_seconds <= win_seconds) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < hop ({hop_seconds}) <= window ({win_seconds})"
        )));
    }
    let rate = stream.nominal_rate();
    let len = samples_for(win_seconds, rate);
    let hop = samples_for(hop_seconds, rate);
    if len == 0 || hop == 0 {
        return Err(Error::InvalidArgument(
            "window or hop shorter than one sample".into(),
        ));
    }
    let n = stream.len();
    if len > n {
        return Ok(Vec::new());
    }
    Ok((0..=n - len)
        .step_by(hop)
        .map(|start| Window::new(stream, start, len))
        .collect())
}

/// The six per-window statistics fed to the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureVector<T>(pub [T; N_FEATURES]);

impl<T: Real> FeatureVector<T> {
    pub fn as_array(&self) -> &[T; N_FEATURES] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &[T; N_FEATURES]) -> T {
        self.0.iter().zip(other).map(|(a, b)| *a * *b).sum()
    }
}

impl<T> From<[T; N_FEATURES]> for FeatureVector<T> {
    fn from(v: [T; N_FEATURES]) -> Self {
        Self(v)
    }
}

/// Mean, population standard deviation and range in one pass (Welford).
fn summarize<T: Real>(values: impl Iterator<Item = T>) -> [T; 3] {
    let mut n = T::zero();
    let mut mean = T::zero();
    let mut m2 = T::zero();
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for x in values {
        n += T::one();
        let d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
        lo = lo.min(x);
        hi = hi.max(x);
    }
    let var = (m2 / n).max(T::zero());
    [mean, var.sqrt(), hi - lo]
}

pub fn extract_from_samples<T: Real>(samples: &[ImuSample<T>]) -> Result<FeatureVector<T>> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("empty window".into()));
    }
    let a = summarize(samples.iter().map(ImuSample::accel_norm));
    let g = summarize(samples.iter().map(ImuSample::gyro_norm));
    Ok(FeatureVector([a[0], a[1], a[2], g[0], g[1], g[2]]))
}

pub fn extract_features<T: Real>(w: &Window<'_, T>) -> Result<FeatureVector<T>> {
    extract_from_samples(w.samples)
}

/// Per-feature z-score parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaler<T> {
    pub mean: [T; N_FEATURES],
    /// Never zero: zero-variance columns store 1.
    pub std: [T; N_FEATURES],
}

impl<T: Real> Scaler<T> {
    pub fn identity() -> Self {
        Self {
            mean: [T::zero(); N_FEATURES],
            std: [T::one(); N_FEATURES],
        }
    }

    /// Builds a scaler, replacing zero deviations by 1.
    pub fn new(mean: [T; N_FEATURES], mut std: [T; N_FEATURES]) -> Result<Self> {
        if mean.iter().chain(std.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scaler"));
        }
        if std.iter().any(|s| *s < T::zero()) {
            return Err(Error::InvalidArgument("scaler std must be >= 0".into()));
        }
        for s in std.iter_mut() {
            if *s == T::zero() {
                *s = T::one();
            }
        }
        Ok(Self { mean, std })
    }

    pub fn apply(&self, fv: &FeatureVector<T>) -> FeatureVector<T> {
        let mut out = [T::zero(); N_FEATURES];
        for (k, o) in out.iter_mut().enumerate() {
            *o = (fv.0[k] - self.mean[k]) / self.std[k];
        }
        FeatureVector(out)
    }
}

pub fn fit_scaler<T: Real>(features: &[FeatureVector<T>]) -> Result<Scaler<T>> {
    if features.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot fit a scaler on no vectors".into(),
        ));
    }
    let mut mean = [T::zero(); N_FEATURES];
    let mut std = [T::zero(); N_FEATURES];
    for k in 0..N_FEATURES {
        let s = summarize(features.iter().map(|f| f.0[k]));
        mean[k] = s[0];
        std[k] = s[1];
    }
    Scaler::new(mean, std)
}

pub fn apply_scaler<T: Real>(s: &Scaler<T>, fv: &FeatureVector<T>) -> FeatureVector<T> {
    s.apply(fv)
}

/// Positive windows anchored at each flagged run and flag-free negatives.
#[derive(Debug, Clone)]
pub struct EventWindows<'a, T> {
    /// One window per flagged run, starting at the run's first sample.
    pub positives: Vec<Window<'a, T>>,
    /// Non-overlapping windows tiled from the stream start that contain no
    /// flagged sample.
    pub negatives: Vec<Window<'a, T>>,
}

impl<'a, T: Real> EventWindows<'a, T> {
    pub fn extract(stream: &'a SampleStream<T>, win_seconds: T) -> Result<Self> {
        let len = samples_for(win_seconds, stream.nominal_rate());
        if len == 0 {
            return Err(Error::InvalidArgument(
                "window shorter than one sample".into(),
            ));
        }
        let n = stream.len();
        let positives = stream
            .flagged_runs()
            .into_iter()
            .filter(|r| r.start + len <= n)
            .map(|r| Window::new(stream, r.start, len))
            .collect();
        let negatives = if len > n {
            Vec::new()
        } else {
            (0..=n - len)
                .step_by(len)
                .map(|s| Window::new(stream, s, len))
                .filter(|w| !w.label)
                .collect()
        };
        Ok(Self {
            positives,
            negatives,
        })
    }

    /// Keeps `k` negatives spread evenly over the stream (all of them if
    /// fewer are available).
    pub fn thin_negatives(&mut self, k: usize) {
        let n = self.negatives.len();
        if k >= n {
            return;
        }
        self.negatives = (0..k).map(|i| self.negatives[i * n / k]).collect();
    }

    /// Balanced set: as many negatives as positives.
    pub fn balanced(mut self) -> Self {
        let k = self.positives.len();
        self.thin_negatives(k);
        self
    }

    /// Positives then negatives, as `(window, is_pothole)` pairs.
    pub fn labeled(&self) -> Vec<(Window<'a, T>, bool)> {
        self.positives
            .iter()
            .map(|w| (*w, true))
            .chain(self.negatives.iter().map(|w| (*w, false)))
            .collect()
    }
}

/// CSV with a header, six feature columns and a trailing 0/1 label.
pub fn write_feature_csv<T: Real>(rows: &[(FeatureVector<T>, bool)]) -> String {
    let mut out = FEATURE_NAMES.join(",");
    out.push_str(",label\n");
    for (fv, label) in rows {
        for v in fv.0 {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{}", u8::from(*label));
    }
    out
}
