//! Soft-margin linear two-class SVM.
//!
//! Training minimizes `½‖w‖² + C·Σ max(0, 1 − yᵢ(w·xᵢ + b))` on z-scored
//! features with an unregularized bias. The solver is SMO on the dual with
//! second-order working-set selection; since the kernel is linear the weight
//! vector is kept explicitly. At every epoch boundary (n pair updates) the
//! primal objective is evaluated with the bias minimized exactly for the
//! current weights, and the best primal iterate so far is retained. Training
//! stops once the relative duality gap of the retained iterate drops below
//! `tol`, which certifies it is within `tol` of the optimum.

use std::fmt;

use crate::error::{Error, Result};
use crate::features::{FeatureVector, Scaler, N_FEATURES};
use crate::scalar::Real;

pub const DEFAULT_C: f64 = 1.0;
pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_MAX_EPOCHS: usize = 10_000;

/// Internal label. `Pothole` is `+1` internally and "class 0" in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Class {
    Pothole,
    Plain,
}

impl Class {
    pub fn sign<T: Real>(self) -> T {
        match self {
            Class::Pothole => T::one(),
            Class::Plain => -T::one(),
        }
    }

    pub fn from_flag(is_pothole: bool) -> Self {
        if is_pothole {
            Class::Pothole
        } else {
            Class::Plain
        }
    }

    pub fn is_pothole(self) -> bool {
        self == Class::Pothole
    }

    /// Report numbering: pothole is class 0, plain road class 1.
    pub fn report_index(self) -> u8 {
        match self {
            Class::Pothole => 0,
            Class::Plain => 1,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Class::Pothole => write!(f, "pothole"),
            Class::Plain => write!(f, "plain"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LabeledDataset<T> {
    pub rows: Vec<(FeatureVector<T>, Class)>,
}

impl<T: Real> LabeledDataset<T> {
    pub fn new(rows: Vec<(FeatureVector<T>, Class)>) -> Self {
        Self { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn features(&self) -> Vec<FeatureVector<T>> {
        self.rows.iter().map(|r| r.0).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig<T> {
    pub c: T,
    pub tol: T,
    pub max_epochs: usize,
}

impl<T: Real> Default for TrainConfig<T> {
    fn default() -> Self {
        Self {
            c: T::lit(DEFAULT_C),
            tol: T::lit(DEFAULT_TOL),
            max_epochs: DEFAULT_MAX_EPOCHS,
        }
    }
}

impl<T: Real> TrainConfig<T> {
    fn validate(&self) -> Result<()> {
        if !(self.c > T::zero() && self.c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if !(self.tol > T::zero() && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidArgument("max_epochs must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSvmModel<T> {
    pub weights: [T; N_FEATURES],
    pub bias: T,
    pub scaler: Scaler<T>,
    pub c: T,
    pub tol: T,
}

impl<T: Real> LinearSvmModel<T> {
    pub fn new(weights: [T; N_FEATURES], bias: T, scaler: Scaler<T>, c: T, tol: T) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
            return Err(Error::NonFinite("model parameters"));
        }
        if !(c > T::zero()) {
            return Err(Error::InvalidArgument("C must be positive".into()));
        }
        Ok(Self {
            weights,
            bias,
            scaler,
            c,
            tol,
        })
    }

    /// Signed distance-like score; positive means pothole.
    pub fn decision(&self, fv: &FeatureVector<T>) -> Result<T> {
        if !fv.is_finite() {
            return Err(Error::NonFinite("feature vector"));
        }
        Ok(self.scaler.apply(fv).dot(&self.weights) + self.bias)
    }

    pub fn predict(&self, fv: &FeatureVector<T>) -> Result<(Class, T)> {
        let m = self.decision(fv)?;
        Ok((Class::from_flag(m > T::zero()), m))
    }
}

pub fn predict<T: Real>(m: &LinearSvmModel<T>, fv: &FeatureVector<T>) -> Result<(Class, T)> {
    m.predict(fv)
}

/// Primal objective on already-scaled points.
pub fn objective<T: Real>(w: &[T; N_FEATURES], b: T, xs: &[[T; N_FEATURES]], ys: &[T], c: T) -> T {
    let reg: T = w.iter().map(|v| *v * *v).sum::<T>() * T::lit(0.5);
    let loss: T = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (T::one() - *y * (dot(w, x) + b)).max(T::zero()))
        .sum();
    reg + c * loss
}

/// A subgradient of [`objective`] with respect to `(w, b)`. Samples sitting
/// exactly on the margin contribute nothing.
pub fn subgradient<T: Real>(
    w: &[T; N_FEATURES],
    b: T,
    xs: &[[T; N_FEATURES]],
    ys: &[T],
    c: T,
) -> ([T; N_FEATURES], T) {
    let mut gw = *w;
    let mut gb = T::zero();
    for (x, y) in xs.iter().zip(ys) {
        if *y * (dot(w, x) + b) < T::one() {
            for k in 0..N_FEATURES {
                gw[k] -= c * *y * x[k];
            }
            gb -= c * *y;
        }
    }
    (gw, gb)
}

fn dot<T: Real>(a: &[T; N_FEATURES], b: &[T; N_FEATURES]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Bias minimizing the total hinge loss for fixed `w` (midpoint of the flat
/// optimal segment).
fn optimal_bias<T: Real>(w: &[T; N_FEATURES], xs: &[[T; N_FEATURES]], ys: &[T]) -> T {
    let mut breaks: Vec<T> = xs.iter().zip(ys).map(|(x, y)| *y - dot(w, x)).collect();
    let positives = ys.iter().filter(|y| **y > T::zero()).count();
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    // slope after k breakpoints is k - positives
    match positives {
        0 => breaks[0],
        p if p == breaks.len() => breaks[p - 1],
        p => (breaks[p - 1] + breaks[p]) * T::lit(0.5),
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport<T> {
    pub model: LinearSvmModel<T>,
    /// Objective of the retained iterate at each epoch boundary.
    pub objective_history: Vec<T>,
    pub epochs: usize,
    /// Final relative duality gap.
    pub relative_gap: T,
    pub converged: bool,
}

pub fn train<T: Real>(data: &LabeledDataset<T>, cfg: &TrainConfig<T>) -> Result<LinearSvmModel<T>> {
    train_detailed(data, cfg).map(|r| r.model)
}

pub fn train_detailed<T: Real>(
    data: &LabeledDataset<T>,
    cfg: &TrainConfig<T>,
) -> Result<TrainReport<T>> {
    cfg.validate()?;
    if data.rows.iter().any(|(fv, _)| !fv.is_finite()) {
        return Err(Error::NonFinite("training features"));
    }
    let has_pos = data.rows.iter().any(|r| r.1.is_pothole());
    let has_neg = data.rows.iter().any(|r| !r.1.is_pothole());
    if !(has_pos && has_neg) {
        return Err(Error::SingleClass);
    }

    let scaler = crate::features::fit_scaler(&data.features())?;
    let xs: Vec<[T; N_FEATURES]> = data.rows.iter().map(|(fv, _)| scaler.apply(fv).0).collect();
    let ys: Vec<T> = data.rows.iter().map(|(_, c)| c.sign()).collect();

    let mut smo = Smo::new(&xs, &ys, cfg.c);
    let n = xs.len();
    let mut best_w = [T::zero(); N_FEATURES];
    let mut best_b = optimal_bias(&best_w, &xs, &ys);
    let mut best_obj = objective(&best_w, best_b, &xs, &ys, cfg.c);
    let mut history = Vec::new();
    let mut rel_gap = T::infinity();
    let mut converged = false;
    let mut epochs = 0;

    while epochs < cfg.max_epochs {
        epochs += 1;
        let mut optimal = false;
        for _ in 0..n {
            if !smo.step() {
                optimal = true;
                break;
            }
        }
        let b = optimal_bias(&smo.w, &xs, &ys);
        let obj = objective(&smo.w, b, &xs, &ys, cfg.c);
        if obj < best_obj {
            best_obj = obj;
            best_w = smo.w;
            best_b = b;
        }
        history.push(best_obj);
        let dual = smo.dual_objective();
        rel_gap = ((best_obj - dual) / best_obj.abs().max(T::min_positive_value())).max(T::zero());
        if rel_gap < cfg.tol || optimal {
            converged = true;
            break;
        }
    }

    let model = LinearSvmModel::new(best_w, best_b, scaler, cfg.c, cfg.tol)?;
    Ok(TrainReport {
        model,
        objective_history: history,
        epochs,
        relative_gap: rel_gap,
        converged,
    })
}

/// Dual state for the linear-kernel SMO solver.
struct Smo<'a, T> {
    xs: &'a [[T; N_FEATURES]],
    ys: &'a [T],
    c: T,
    alpha: Vec<T>,
    /// Gradient of the dual objective: `yᵢ w·xᵢ − 1`.
    grad: Vec<T>,
    sqnorm: Vec<T>,
    w: [T; N_FEATURES],
}

impl<'a, T: Real> Smo<'a, T> {
    const TAU: f64 = 1e-12;
    const EPS: f64 = 1e-10;

    fn new(xs: &'a [[T; N_FEATURES]], ys: &'a [T], c: T) -> Self {
        Self {
            xs,
            ys,
            c,
            alpha: vec![T::zero(); xs.len()],
            grad: vec![-T::one(); xs.len()],
            sqnorm: xs.iter().map(|x| dot(x, x)).collect(),
            w: [T::zero(); N_FEATURES],
        }
    }

    fn dual_objective(&self) -> T {
        self.alpha.iter().copied().sum::<T>() - T::lit(0.5) * dot(&self.w, &self.w)
    }

    fn in_up(&self, t: usize) -> bool {
        if self.ys[t] > T::zero() {
            self.alpha[t] < self.c
        } else {
            self.alpha[t] > T::zero()
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if self.ys[t] > T::zero() {
            self.alpha[t] > T::zero()
        } else {
            self.alpha[t] < self.c
        }
    }

    /// Second-order working set selection. `None` once KKT holds to `EPS`.
    fn select(&self) -> Option<(usize, usize)> {
        let tau = T::lit(Self::TAU);
        let mut gmax = T::neg_infinity();
        let mut i = None;
        for t in 0..self.alpha.len() {
            if self.in_up(t) {
                let v = -self.ys[t] * self.grad[t];
                if v >= gmax {
                    gmax = v;
                    i = Some(t);
                }
            }
        }
        let i = i?;
        let mut gmax2 = T::neg_infinity();
        let mut obj_min = T::infinity();
        let mut j = None;
        for t in 0..self.alpha.len() {
            if !self.in_low(t) {
                continue;
            }
            let v = -self.ys[t] * self.grad[t];
            let grad_diff = gmax - v;
            if -v >= gmax2 {
                gmax2 = -v;
            }
            if grad_diff > T::zero() {
                let kit = dot(&self.xs[i], &self.xs[t]);
                let mut quad = self.sqnorm[i] + self.sqnorm[t] - (kit + kit);
                if quad <= T::zero() {
                    quad = tau;
                }
                let obj = -(grad_diff * grad_diff) / quad;
                if obj <= obj_min {
                    obj_min = obj;
                    j = Some(t);
                }
            }
        }
        if gmax + gmax2 < T::lit(Self::EPS) {
            return None;
        }
        j.map(|j| (i, j))
    }

    /// One pair update. Returns false when the dual is optimal.
    fn step(&mut self) -> bool {
        let Some((i, j)) = self.select() else {
            return false;
        };
        let c = self.c;
        let tau = T::lit(Self::TAU);
        let (yi, yj) = (self.ys[i], self.ys[j]);
        let kij = dot(&self.xs[i], &self.xs[j]);
        let mut quad = self.sqnorm[i] + self.sqnorm[j] - (kij + kij);
        if quad <= T::zero() {
            quad = tau;
        }
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let (gi, gj) = (self.grad[i], self.grad[j]);
        let (mut ai, mut aj) = (old_i, old_j);

        if yi != yj {
            let delta = (-gi - gj) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > T::zero() {
                if aj < T::zero() {
                    aj = T::zero();
                    ai = diff;
                }
            } else if ai < T::zero() {
                ai = T::zero();
                aj = -diff;
            }
            if diff > T::zero() {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let delta = (gi - gj) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < T::zero() {
                aj = T::zero();
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < T::zero() {
                ai = T::zero();
                aj = sum;
            }
        }

        self.alpha[i] = ai;
        self.alpha[j] = aj;
        let (di, dj) = ((ai - old_i) * yi, (aj - old_j) * yj);
        for k in 0..N_FEATURES {
            self.w[k] += di * self.xs[i][k] + dj * self.xs[j][k];
        }
        for t in 0..self.alpha.len() {
            self.grad[t] = self.ys[t] * dot(&self.w, &self.xs[t]) - T::one();
        }
        true
    }
}

const MAGIC: &[u8; 8] = b"POTHSVM\0";
pub const MODEL_VERSION: u32 = 1;
/// magic + version + (C, tol, 6 weights, bias, 6 means, 6 stds) as f64.
pub const MODEL_BYTES: usize = 8 + 4 + 8 * (2 + N_FEATURES + 1 + 2 * N_FEATURES);

/// Little-endian binary model file; layout documented in the README.
pub fn serialize<T: Real>(m: &LinearSvmModel<T>) -> Vec<u8> {
    let mut out = Vec::with_capacity(MODEL_BYTES);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    let vals = [m.c, m.tol]
        .into_iter()
        .chain(m.weights)
        .chain([m.bias])
        .chain(m.scaler.mean)
        .chain(m.scaler.std);
    for v in vals {
        out.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    out
}

pub fn deserialize<T: Real>(bytes: &[u8]) -> Result<LinearSvmModel<T>> {
    if bytes.len() < 12 {
        return Err(Error::Truncated {
            expected: MODEL_BYTES,
            found: bytes.len(),
        });
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != MODEL_VERSION {
        return Err(Error::Version(version));
    }
    if bytes.len() != MODEL_BYTES {
        return Err(Error::Truncated {
            expected: MODEL_BYTES,
            found: bytes.len(),
        });
    }
    let vals: Vec<T> = bytes[12..]
        .chunks_exact(8)
        .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
        .collect();
    let arr = |off: usize| -> [T; N_FEATURES] { std::array::from_fn(|k| vals[off + k]) };
    let scaler = Scaler::new(arr(9), arr(15))?;
    LinearSvmModel::new(arr(2), vals[8], scaler, vals[0], vals[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fv(x: [f64; 6]) -> FeatureVector<f64> {
        FeatureVector(x)
    }

    fn e1(v: f64) -> FeatureVector<f64> {
        fv([v, 0.0, 0.0, 0.0, 0.0, 0.0])
    }

    #[test]
    fn one_dimensional_max_margin() {
        let data = LabeledDataset::new(vec![(e1(-1.0), Class::Plain), (e1(1.0), Class::Pothole)]);
        let cfg = TrainConfig {
            c: 1000.0,
            ..Default::default()
        };
        let m = train(&data, &cfg).unwrap();
        // scaler maps ±1 to ±1 (mean 0, population std 1)
        assert_eq!(m.scaler.mean[0], 0.0);
        assert_eq!(m.scaler.std[0], 1.0);
        assert!((m.weights[0] - 1.0).abs() < 1e-6, "{:?}", m.weights);
        assert!(m.weights[1..].iter().all(|w| w.abs() < 1e-9));
        assert!(m.bias.abs() < 1e-6);
        assert!((m.decision(&e1(1.0)).unwrap() - 1.0).abs() < 1e-6);
        assert!((m.decision(&e1(-1.0)).unwrap() + 1.0).abs() < 1e-6);
    }

    #[test]
    fn separable_clusters_fully_classified() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut rows = Vec::new();
        for _ in 0..20 {
            let mut a = [0.0; 6];
            let mut b = [0.0; 6];
            a[0] = 10.0 + rng.gen_range(-0.5..0.5);
            a[1] = 10.0 + rng.gen_range(-0.5..0.5);
            b[0] = -10.0 + rng.gen_range(-0.5..0.5);
            b[1] = -10.0 + rng.gen_range(-0.5..0.5);
            rows.push((fv(a), Class::Pothole));
            rows.push((fv(b), Class::Plain));
        }
        let data = LabeledDataset::new(rows);
        let m = train(
            &data,
            &TrainConfig {
                c: 10.0,
                ..Default::default()
            },
        )
        .unwrap();
        for (x, c) in &data.rows {
            assert_eq!(m.predict(x).unwrap().0, *c);
        }
    }

    #[test]
    fn identical_points_of_both_classes() {
        let p = fv([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let data = LabeledDataset::new(vec![(p, Class::Pothole), (p, Class::Plain)]);
        let m = train(&data, &TrainConfig::default()).unwrap();
        assert!(m.decision(&p).unwrap().abs() < 1e-9);
    }

    #[test]
    fn single_class_rejected() {
        let data = LabeledDataset::new(vec![(e1(1.0), Class::Pothole), (e1(2.0), Class::Pothole)]);
        assert!(matches!(
            train(&data, &TrainConfig::default()),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn non_finite_rejected() {
        let data = LabeledDataset::new(vec![
            (e1(f64::NAN), Class::Pothole),
            (e1(2.0), Class::Plain),
        ]);
        assert!(matches!(
            train(&data, &TrainConfig::default()),
            Err(Error::NonFinite(_))
        ));
        let m = LinearSvmModel::new([0.0; 6], 1.0, Scaler::identity(), 1.0, 1e-4).unwrap();
        assert!(m.predict(&e1(f64::INFINITY)).is_err());
    }

    #[test]
    fn bad_hyperparameters_rejected() {
        let data = LabeledDataset::new(vec![(e1(1.0), Class::Pothole), (e1(-1.0), Class::Plain)]);
        assert!(train(
            &data,
            &TrainConfig {
                c: -5.0,
                ..Default::default()
            }
        )
        .is_err());
        assert!(train(
            &data,
            &TrainConfig {
                tol: 0.0,
                ..Default::default()
            }
        )
        .is_err());
    }

    #[test]
    fn constant_decision() {
        let m = LinearSvmModel::new([0.0; 6], 1.0, Scaler::identity(), 1.0, 1e-4).unwrap();
        assert_eq!(
            m.predict(&fv([3.0, -2.0, 1.0, 0.0, 9.0, 4.0])).unwrap(),
            (Class::Pothole, 1.0)
        );
    }

    #[test]
    fn unit_weight_decision() {
        let m = LinearSvmModel::new(
            [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            0.0,
            Scaler::identity(),
            1.0,
            1e-4,
        )
        .unwrap();
        assert_eq!(m.predict(&e1(2.0)).unwrap(), (Class::Pothole, 2.0));
        assert_eq!(m.predict(&e1(0.0)).unwrap().0, Class::Plain);
    }

    #[test]
    fn reflection_flips_margin() {
        let scaler = Scaler::new(
            [1.0, -2.0, 0.5, 3.0, 0.0, 1.0],
            [2.0, 1.0, 0.5, 4.0, 1.0, 3.0],
        )
        .unwrap();
        let w = [0.3, -1.2, 0.7, 0.1, 2.0, -0.4];
        let m = LinearSvmModel::new(w, 0.25, scaler, 1.0, 1e-4).unwrap();
        let x = fv([2.0, 1.0, -1.0, 0.5, 3.0, 2.0]);
        let d = m.decision(&x).unwrap();
        // reflect the scaled point through the hyperplane, then unscale
        let z = scaler.apply(&x).0;
        let wn: f64 = w.iter().map(|v| v * v).sum();
        let r: [f64; 6] = std::array::from_fn(|k| z[k] - 2.0 * d / wn * w[k]);
        let back = fv(std::array::from_fn(|k| {
            r[k] * scaler.std[k] + scaler.mean[k]
        }));
        let dr = m.decision(&back).unwrap();
        assert!((dr + d).abs() < 1e-9);
        assert_ne!(m.predict(&x).unwrap().0, m.predict(&back).unwrap().0);
    }

    #[test]
    fn positive_rescaling_keeps_labels() {
        let m = LinearSvmModel::new(
            [0.3, -1.2, 0.7, 0.1, 2.0, -0.4],
            -0.3,
            Scaler::identity(),
            1.0,
            1e-4,
        )
        .unwrap();
        let s = LinearSvmModel::new(
            m.weights.map(|w| w * 7.5),
            m.bias * 7.5,
            Scaler::identity(),
            1.0,
            1e-4,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let x = fv(std::array::from_fn(|_| rng.gen_range(-3.0..3.0)));
            assert_eq!(m.predict(&x).unwrap().0, s.predict(&x).unwrap().0);
        }
    }

    fn noisy_dataset(seed: u64, n: usize) -> LabeledDataset<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|i| {
                let c = Class::from_flag(i % 2 == 0);
                let shift = if c.is_pothole() { 0.8 } else { -0.8 };
                (
                    fv(std::array::from_fn(|_| rng.gen_range(-1.5..1.5) + shift)),
                    c,
                )
            })
            .collect();
        LabeledDataset::new(rows)
    }

    #[test]
    fn objective_history_non_increasing() {
        let data = noisy_dataset(11, 120);
        let r = train_detailed(
            &data,
            &TrainConfig {
                c: 5.0,
                tol: 1e-8,
                max_epochs: 500,
            },
        )
        .unwrap();
        assert!(r.converged);
        for w in r.objective_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
        assert!(r.relative_gap < 1e-8);
    }

    #[test]
    fn max_epochs_bounds_work() {
        let data = noisy_dataset(12, 200);
        let r = train_detailed(
            &data,
            &TrainConfig {
                c: 100.0,
                tol: 1e-15,
                max_epochs: 1,
            },
        )
        .unwrap();
        assert_eq!(r.epochs, 1);
    }

    #[test]
    fn bias_minimizer_is_optimal() {
        let data = noisy_dataset(13, 60);
        let xs: Vec<[f64; 6]> = data.rows.iter().map(|r| r.0 .0).collect();
        let ys: Vec<f64> = data.rows.iter().map(|r| r.1.sign()).collect();
        let w = [0.4, -0.2, 0.1, 0.3, 0.0, 0.5];
        let b = optimal_bias(&w, &xs, &ys);
        let best = objective(&w, b, &xs, &ys, 1.0);
        for k in -200..=200 {
            let bb = k as f64 * 0.02;
            assert!(objective(&w, bb, &xs, &ys, 1.0) >= best - 1e-12);
        }
    }

    #[test]
    fn deserialize_rejects_garbage() {
        assert!(matches!(
            deserialize::<f64>(&[]),
            Err(Error::Truncated { found: 0, .. })
        ));
        let m = LinearSvmModel::new([1.0; 6], 0.5, Scaler::identity(), 1.0, 1e-4).unwrap();
        let mut bytes = serialize(&m);
        assert_eq!(bytes.len(), MODEL_BYTES);
        assert!(matches!(
            deserialize::<f64>(&bytes[..100]),
            Err(Error::Truncated { .. })
        ));
        bytes[8..12].copy_from_slice(&999u32.to_le_bytes());
        assert!(matches!(
            deserialize::<f64>(&bytes),
            Err(Error::Version(999))
        ));
        let mut bad = serialize(&m);
        bad[0] = b'X';
        assert!(matches!(deserialize::<f64>(&bad), Err(Error::BadMagic)));
    }

    proptest! {
        #[test]
        fn serialize_round_trip(
            w in prop::array::uniform6(-1e3..1e3f64),
            b in -1e3..1e3f64,
            mean in prop::array::uniform6(-1e3..1e3f64),
            std in prop::array::uniform6(1e-3..1e3f64),
            c in 1e-3..1e3f64,
        ) {
            let m = LinearSvmModel::new(w, b, Scaler::new(mean, std).unwrap(), c, 1e-4).unwrap();
            let back: LinearSvmModel<f64> = deserialize(&serialize(&m)).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
