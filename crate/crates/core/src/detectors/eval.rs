//! Confusion matrices, the report table and k-fold cross-validation.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::{extract_features, EventWindows, Window};
use crate::ingest::SampleStream;
use crate::scalar::Real;
use crate::svm::{train, Class, LabeledDataset, TrainConfig};

/// Pothole is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

#[derive(Serialize)]
struct Summary {
    #[serde(flatten)]
    m: ConfusionMatrix,
    accuracy: f64,
}

impl ConfusionMatrix {
    /// Counts `(target, output)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Class, Class)>) -> Self {
        let mut m = Self::default();
        for (target, output) in pairs {
            m.add(target, output);
        }
        m
    }

    pub fn add(&mut self, target: Class, output: Class) {
        match (target, output) {
            (Class::Pothole, Class::Pothole) => self.tp += 1,
            (Class::Pothole, Class::Plain) => self.fn_ += 1,
            (Class::Plain, Class::Pothole) => self.fp += 1,
            (Class::Plain, Class::Plain) => self.tn += 1,
        }
    }

    pub fn merge(&mut self, o: &ConfusionMatrix) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.tn += o.tn;
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total()).unwrap_or(0.0)
    }

    pub fn pothole_recall(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn plain_recall(&self) -> Option<f64> {
        ratio(self.tn, self.tn + self.fp)
    }

    /// `{tp, fp, fn, tn, accuracy}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(Summary {
            m: *self,
            accuracy: self.accuracy(),
        })
        .expect("plain struct serializes")
    }
}

fn ratio(a: usize, b: usize) -> Option<f64> {
    (b > 0).then(|| a as f64 / b as f64)
}

/// Scores predictions against the windows' labels.
pub fn evaluate<T: Real>(
    windows: &[Window<'_, T>],
    predictions: &[Class],
) -> Result<ConfusionMatrix> {
    if windows.len() != predictions.len() {
        return Err(Error::InvalidArgument(format!(
            "{} windows but {} predictions",
            windows.len(),
            predictions.len()
        )));
    }
    if windows.is_empty() {
        return Err(Error::InvalidArgument("nothing to evaluate".into()));
    }
    Ok(ConfusionMatrix::from_pairs(
        windows
            .iter()
            .zip(predictions)
            .map(|(w, &p)| (Class::from_flag(w.label), p)),
    ))
}

fn pct(a: usize, total: usize) -> String {
    format!("{:.1}%", 100.0 * ratio(a, total).unwrap_or(0.0))
}

fn opt_pct(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{:.1}%", 100.0 * v))
}

/// Text table with rows as target class and columns as output class. Each
/// cell shows the count and its share of all windows; the last column is
/// per-class accuracy and the last row the overall accuracy.
pub fn render_confusion(m: &ConfusionMatrix) -> String {
    let n = m.total();
    let cell = |c: usize| format!("{c:>4} {:>6}", pct(c, n));
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<20} {:>18} {:>18} {:>10}",
        "", "output 0 pothole", "output 1 plain", "accuracy"
    );
    let _ = writeln!(
        out,
        "{:<20} {:>18} {:>18} {:>10}",
        "target 0 pothole",
        cell(m.tp),
        cell(m.fn_),
        opt_pct(m.pothole_recall())
    );
    let _ = writeln!(
        out,
        "{:<20} {:>18} {:>18} {:>10}",
        "target 1 plain",
        cell(m.fp),
        cell(m.tn),
        opt_pct(m.plain_recall())
    );
    let _ = writeln!(
        out,
        "{:<20} {:>18} {:>18} {:>10}",
        "overall",
        "",
        "",
        pct(m.tp + m.tn, n)
    );
    out
}

/// Balanced positive/negative windows labelled by the flag column, as a
/// training set.
pub fn balanced_event_dataset<T: Real>(
    stream: &SampleStream<T>,
    win: T,
) -> Result<LabeledDataset<T>> {
    if !stream.is_labeled() {
        return Err(Error::Unlabeled);
    }
    let ev = EventWindows::extract(stream, win)?.balanced();
    let rows = ev
        .labeled()
        .iter()
        .map(|(w, y)| Ok((extract_features(w)?, Class::from_flag(*y))))
        .collect::<Result<Vec<_>>>()?;
    Ok(LabeledDataset::new(rows))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    pub folds: Vec<ConfusionMatrix>,
    pub pooled: ConfusionMatrix,
}

impl CrossValidation {
    pub fn accuracy(&self) -> f64 {
        self.pooled.accuracy()
    }
}

/// Stratified k-fold: the i-th example of each class goes to fold `i % k`.
pub fn cross_validate<T: Real>(
    data: &LabeledDataset<T>,
    k: usize,
    cfg: &TrainConfig<T>,
) -> Result<CrossValidation> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    let mut fold_of = vec![0usize; data.len()];
    let (mut np, mut nn) = (0, 0);
    for (i, (_, c)) in data.rows.iter().enumerate() {
        let counter = if c.is_pothole() { &mut np } else { &mut nn };
        fold_of[i] = *counter % k;
        *counter += 1;
    }
    if np < k || nn < k {
        return Err(Error::InvalidArgument(format!(
            "{k} folds need at least {k} examples per class, have {np} pothole and {nn} plain"
        )));
    }
    let mut folds = Vec::with_capacity(k);
    let mut pooled = ConfusionMatrix::default();
    for f in 0..k {
        let split = |test: bool| {
            LabeledDataset::new(
                data.rows
                    .iter()
                    .zip(&fold_of)
                    .filter(|(_, &g)| (g == f) == test)
                    .map(|(r, _)| *r)
                    .collect(),
            )
        };
        let model = train(&split(false), cfg)?;
        let mut m = ConfusionMatrix::default();
        for (fv, c) in split(true).rows {
            m.add(c, model.predict(&fv)?.0);
        }
        pooled.merge(&m);
        folds.push(m);
    }
    Ok(CrossValidation { folds, pooled })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureVector;
    use crate::ingest::ImuSample;

    fn reference_matrix() -> ConfusionMatrix {
        ConfusionMatrix {
            tp: 25,
            fn_: 1,
            fp: 0,
            tn: 26,
        }
    }

    #[test]
    fn report_percentages() {
        let txt = render_confusion(&reference_matrix());
        for p in ["48.1%", "1.9%", "50.0%", "98.1%", "0.0%", "96.2%", "100.0%"] {
            assert!(txt.contains(p), "{p} missing from\n{txt}");
        }
        let rows: Vec<&str> = txt.lines().collect();
        assert!(rows[1].contains("25") && rows[1].contains("48.1%") && rows[1].contains("1.9%"));
        assert!(rows[2].contains("26") && rows[2].contains("50.0%"));
    }

    #[test]
    fn json_summary() {
        let v = reference_matrix().to_json();
        assert_eq!(v["tp"], 25);
        assert_eq!(v["fn"], 1);
        assert_eq!(v["fp"], 0);
        assert_eq!(v["tn"], 26);
        assert!((v["accuracy"].as_f64().unwrap() - 51.0 / 52.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_and_empty() {
        let m = ConfusionMatrix::from_pairs([
            (Class::Pothole, Class::Pothole),
            (Class::Plain, Class::Plain),
        ]);
        assert_eq!(m.accuracy(), 1.0);
        assert_eq!(ConfusionMatrix::default().accuracy(), 0.0);
        assert_eq!(ConfusionMatrix::default().pothole_recall(), None);
    }

    #[test]
    fn evaluate_uses_window_labels() {
        let v = (0..100)
            .map(|i| {
                ImuSample::new(
                    i as f64 / 50.0,
                    [0.0, 0.0, 9.8],
                    [0.0; 3],
                    (10..20).contains(&i),
                )
            })
            .collect();
        let s = SampleStream::new(v, 50.0).unwrap();
        let ws = [Window::new(&s, 10, 50), Window::new(&s, 50, 50)];
        let m = evaluate(&ws, &[Class::Pothole, Class::Pothole]).unwrap();
        assert_eq!((m.tp, m.fp, m.fn_, m.tn), (1, 1, 0, 0));
        assert!(evaluate(&ws, &[Class::Plain]).is_err());
        assert!(evaluate::<f64>(&[], &[]).is_err());
    }

    fn separable(n: usize) -> LabeledDataset<f64> {
        let rows = (0..2 * n)
            .map(|i| {
                let pos = i % 2 == 0;
                let base = if pos { 3.0 } else { -3.0 };
                let j = i as f64 * 0.01;
                (
                    FeatureVector([base + j, j, -j, 0.5 * j, 1.0, 2.0]),
                    Class::from_flag(pos),
                )
            })
            .collect();
        LabeledDataset::new(rows)
    }

    #[test]
    fn cv_on_separable_data() {
        let cv = cross_validate(&separable(10), 5, &TrainConfig::default()).unwrap();
        assert_eq!(cv.folds.len(), 5);
        assert_eq!(cv.pooled.total(), 20);
        assert!(cv
            .folds
            .iter()
            .all(|f| f.tp + f.fn_ == 2 && f.tn + f.fp == 2));
        assert_eq!(cv.accuracy(), 1.0);
    }

    #[test]
    fn cv_rejects_tiny_sets() {
        assert!(cross_validate(&separable(3), 5, &TrainConfig::default()).is_err());
        assert!(cross_validate(&separable(10), 1, &TrainConfig::default()).is_err());
    }

    #[test]
    fn unlabeled_stream_has_no_dataset() {
        let v = (0..100)
            .map(|i| ImuSample::new(i as f64 / 50.0, [0.0, 0.0, 9.8], [0.0; 3], false))
            .collect();
        let s = SampleStream::new(v, 50.0).unwrap();
        assert!(matches!(
            balanced_event_dataset(&s, 1.0),
            Err(Error::Unlabeled)
        ));
    }
}
