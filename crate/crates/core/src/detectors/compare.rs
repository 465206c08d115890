//! Detection-rate comparison of all detectors across threshold grids.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::features::DEFAULT_WINDOW_S;
use crate::ingest::SampleStream;
use crate::scalar::Real;
use crate::simulator::GRAVITY;
use crate::svm::LinearSvmModel;

use super::baselines::{g_zero, stdev_z, z_diff, z_thresh, BaselineDefaults};
use super::{detect_svm_stream, DetectionEvent, Method, DEFAULT_REFRACTORY_S};

/// An event counts as a detection when its anchor lies within this many
/// seconds of a pothole onset. SVM events are anchored at the window centre,
/// baseline events at their trigger sample. Events anchored anywhere from
/// `onset - MATCH_TOLERANCE_S` to the end of the flagged span are repeats,
/// not false alarms.
pub const MATCH_TOLERANCE_S: f64 = 0.5;

/// Labelled pothole span in seconds: onset and end of the flagged run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthSpan {
    pub onset: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    /// Thresholds in m/s² per baseline, in report order.
    pub grids: Vec<(Method, Vec<f64>)>,
    pub stdev_window: f64,
    pub g_zero_min_dur: f64,
    pub svm_window: f64,
    pub refractory: f64,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            grids: vec![
                (Method::ZThresh, vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]),
                (Method::ZDiff, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
                (Method::StdevZ, vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0]),
                (Method::GZero, vec![1.0, 2.0, 3.0, 4.0]),
            ],
            stdev_window: BaselineDefaults::STDEV_WINDOW_S,
            g_zero_min_dur: BaselineDefaults::G_ZERO_MIN_DUR_S,
            svm_window: DEFAULT_WINDOW_S,
            refractory: DEFAULT_REFRACTORY_S,
        }
    }
}

impl Sweep {
    /// Parses `method=grid;method=grid`, where a grid is a comma list
    /// (`1,2.5,4`) or an inclusive range `start:stop:step`. Window settings
    /// keep their defaults.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut grids: Vec<(Method, Vec<f64>)> = Vec::new();
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, grid) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("sweep entry {part:?} lacks '='")))?;
            let method: Method = name.trim().parse()?;
            if method == Method::Svm {
                return Err(Error::InvalidArgument(
                    "svm has no threshold to sweep".into(),
                ));
            }
            if grids.iter().any(|(m, _)| *m == method) {
                return Err(Error::InvalidArgument(format!("{method} listed twice")));
            }
            grids.push((method, parse_grid(grid.trim())?));
        }
        if grids.is_empty() {
            return Err(Error::InvalidArgument("empty sweep".into()));
        }
        Ok(Self {
            grids,
            ..Self::default()
        })
    }
}

fn num(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::InvalidArgument(format!("bad number {s:?} in sweep")))
}

fn parse_grid(g: &str) -> Result<Vec<f64>> {
    let vals = match g.split(':').collect::<Vec<_>>()[..] {
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || b < a {
                return Err(Error::InvalidArgument(format!("bad range {g:?}")));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            if n > 10_000 {
                return Err(Error::InvalidArgument(format!("range {g:?} too long")));
            }
            (0..=n).map(|i| a + i as f64 * step).collect()
        }
        [_] => g.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => return Err(Error::InvalidArgument(format!("bad grid {g:?}"))),
    };
    if vals.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "thresholds must be positive in {g:?}"
        )));
    }
    Ok(vals)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub method: Method,
    /// m/s²; `None` for the SVM row.
    pub threshold: Option<f64>,
    pub detected: usize,
    pub actual: usize,
    pub false_alarms: usize,
}

impl CompareRow {
    pub fn threshold_g(&self) -> Option<f64> {
        self.threshold.map(|t| t / GRAVITY)
    }

    /// 0 when there is nothing to detect.
    pub fn detected_pct(&self) -> f64 {
        if self.actual == 0 {
            0.0
        } else {
            100.0 * self.detected as f64 / self.actual as f64
        }
    }
}

/// One span per flagged run; the end is the time one sample past the run.
pub fn ground_truth<T: Real>(stream: &SampleStream<T>) -> Result<Vec<TruthSpan>> {
    let runs = stream.flagged_runs();
    if runs.is_empty() {
        return Err(Error::Unlabeled);
    }
    let s = stream.samples();
    let dt = stream.nominal_rate().recip().as_f64();
    Ok(runs
        .iter()
        .map(|r| TruthSpan {
            onset: s[r.start].t.as_f64(),
            end: s[r.end - 1].t.as_f64() + dt,
        })
        .collect())
}

/// Returns (potholes detected, false alarms).
fn score(anchors: &[f64], truth: &[TruthSpan]) -> (usize, usize) {
    let tol = MATCH_TOLERANCE_S + 1e-9;
    let detected = truth
        .iter()
        .filter(|p| anchors.iter().any(|a| (a - p.onset).abs() <= tol))
        .count();
    let false_alarms = anchors
        .iter()
        .filter(|&&a| {
            !truth
                .iter()
                .any(|p| a >= p.onset - tol && a < p.end.max(p.onset + tol))
        })
        .count();
    (detected, false_alarms)
}

/// Runs every grid point of `sweep` (and the SVM when a model is given)
/// and scores events against `truth`.
pub fn compare_detectors<T: Real>(
    stream: &SampleStream<T>,
    truth: &[TruthSpan],
    sweep: &Sweep,
    model: Option<&LinearSvmModel<T>>,
) -> Result<Vec<CompareRow>> {
    let mut rows = Vec::new();
    let mut push = |method, threshold, events: Vec<DetectionEvent<T>>, shift: f64| {
        let anchors: Vec<f64> = events.iter().map(|e| e.t.as_f64() + shift).collect();
        let (detected, false_alarms) = score(&anchors, truth);
        rows.push(CompareRow {
            method,
            threshold,
            detected,
            actual: truth.len(),
            false_alarms,
        });
    };
    if let Some(m) = model {
        let ev = detect_svm_stream(
            m,
            stream,
            T::lit(sweep.svm_window),
            T::lit(sweep.refractory),
        )?;
        push(Method::Svm, None, ev, 0.5 * sweep.svm_window);
    }
    for (method, grid) in &sweep.grids {
        for &thr in grid {
            let t = T::lit(thr);
            let ev = match method {
                Method::ZThresh => z_thresh(stream, t)?,
                Method::ZDiff => z_diff(stream, t)?,
                Method::StdevZ => stdev_z(stream, T::lit(sweep.stdev_window), t)?,
                Method::GZero => g_zero(stream, t, T::lit(sweep.g_zero_min_dur))?,
                Method::Svm => {
                    return Err(Error::InvalidArgument(
                        "svm has no threshold to sweep".into(),
                    ))
                }
            };
            push(*method, Some(thr), ev, 0.0);
        }
    }
    Ok(rows)
}

pub fn render_comparison(rows: &[CompareRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10} {:>10} {:>8} {:>9} {:>7} {:>10} {:>13}",
        "method", "threshold", "T/g", "detected", "actual", "detected%", "false_alarms"
    );
    for r in rows {
        let (t, g) = match (r.threshold, r.threshold_g()) {
            (Some(t), Some(g)) => (format!("{t:.2}"), format!("{g:.3}")),
            _ => ("-".to_string(), "-".to_string()),
        };
        let _ = writeln!(
            out,
            "{:<10} {:>10} {:>8} {:>9} {:>7} {:>9.1}% {:>13}",
            r.method.name(),
            t,
            g,
            r.detected,
            r.actual,
            r.detected_pct(),
            r.false_alarms
        );
    }
    out
}
