//! Seeded synthetic IMU traces of a vehicle crossing a road with potholes.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`).
//! A uniform draw is `(next_u64 >> 11) · 2⁻⁵³`; a Gaussian draw consumes two
//! uniforms `u1, u2` and returns `√(−2 ln(1 − u1)) · cos(2π u2)` (one
//! Box-Muller output, the sine branch is discarded). Per sample the draws
//! are taken in channel order `ax, ay, az, gx, gy, gz`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ImuSample, SampleStream};
use crate::scalar::{snap_floor, Real};

pub const GRAVITY: f64 = 9.81;
pub const DEFAULT_NOISE_SIGMA: f64 = 0.3;
pub const DEFAULT_SPEED: f64 = 10.0;
/// Gyro noise per axis relative to the acceleration noise sigma.
pub const GYRO_NOISE_RATIO: f64 = 0.1;
/// Duration of the ground-truth label after pulse onset, seconds.
pub const LABEL_SECONDS: f64 = 1.0;
/// Spacing used by [`default_profile`]: two label periods at 20 m/s.
pub const MIN_SPACING_M: f64 = 2.0 * LABEL_SECONDS * 20.0;
/// Clear road kept before the first and after the last pothole.
pub const END_MARGIN_M: f64 = LABEL_SECONDS * 20.0;

const DEPTH_RANGE: (f64, f64) = (0.03, 0.12);
const LENGTH_RANGE: (f64, f64) = (0.3, 1.0);
/// Depth producing a 1 g dip.
const REFERENCE_DEPTH: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pothole {
    pub pos_m: f64,
    pub depth_m: f64,
    pub len_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadProfile {
    pub length_m: f64,
    pub noise_sigma: f64,
    pub potholes: Vec<Pothole>,
}

impl RoadProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_m > 0.0 && self.length_m.is_finite()) {
            return Err(Error::InvalidArgument(
                "road length must be positive".into(),
            ));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidArgument("noise_sigma must be >= 0".into()));
        }
        for p in &self.potholes {
            if !(0.0..=self.length_m).contains(&p.pos_m) {
                return Err(Error::InvalidArgument(format!(
                    "pothole at {} m lies outside [0, {}]",
                    p.pos_m, self.length_m
                )));
            }
            if !(p.depth_m > 0.0 && p.len_m > 0.0) {
                return Err(Error::InvalidArgument(
                    "pothole depth and length must be positive".into(),
                ));
            }
        }
        let mut sorted: Vec<&Pothole> = self.potholes.iter().collect();
        sorted.sort_by(|a, b| a.pos_m.total_cmp(&b.pos_m));
        for w in sorted.windows(2) {
            if w[0].pos_m + w[0].len_m > w[1].pos_m {
                return Err(Error::InvalidArgument(format!(
                    "potholes at {} m and {} m overlap",
                    w[0].pos_m, w[1].pos_m
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub speed: f64,
    pub rate: f64,
    pub seed: u64,
    pub gravity: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            speed: DEFAULT_SPEED,
            rate: crate::ingest::DEFAULT_RATE,
            seed: 0,
            gravity: GRAVITY,
        }
    }
}

struct Noise(ChaCha8Rng);

impl Noise {
    fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    fn uniform(&mut self) -> f64 {
        self.0.gen::<f64>()
    }

    fn gaussian(&mut self, sigma: f64) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        sigma * (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// First sample index at or after time `t`.
fn index_at(t: f64, rate: f64) -> usize {
    (t * rate - 1e-9).ceil().max(0.0) as usize
}

/// Pulse parameters derived from a pothole and the driving speed.
#[derive(Debug, Clone, Copy)]
pub struct Pulse {
    pub onset: f64,
    /// Duration of the dip (and of the rebound).
    pub half: f64,
    pub accel_amplitude: f64,
    pub gyro_amplitude: f64,
}

impl Pulse {
    pub fn new(p: &Pothole, cfg: &SimConfig) -> Self {
        Self {
            onset: p.pos_m / cfg.speed,
            half: p.len_m / cfg.speed,
            accel_amplitude: (2.0 * cfg.gravity).min(cfg.gravity * p.depth_m / REFERENCE_DEPTH),
            gyro_amplitude: p.depth_m / REFERENCE_DEPTH,
        }
    }

    pub fn end(&self) -> f64 {
        self.onset + 2.0 * self.half
    }

    /// (vertical acceleration offset, pitch rate) at time `t`.
    fn at(&self, t: f64) -> (f64, f64) {
        if t < self.onset || t >= self.end() {
            return (0.0, 0.0);
        }
        let dt = t - self.onset;
        let pi = std::f64::consts::PI;
        let gyro = self.gyro_amplitude * (pi * dt / self.half).sin();
        let accel = if dt < self.half {
            -self.accel_amplitude * (pi * dt / self.half).sin()
        } else {
            0.5 * self.accel_amplitude * (pi * (dt - self.half) / self.half).sin()
        };
        (accel, gyro)
    }
}

/// Renders the trace. Duration is `length / speed`; samples sit at `k / rate`.
pub fn simulate<T: Real>(profile: &RoadProfile, cfg: &SimConfig) -> Result<SampleStream<T>> {
    profile.validate()?;
    if !(cfg.speed > 0.0 && cfg.speed.is_finite()) || !(cfg.rate > 0.0 && cfg.rate.is_finite()) {
        return Err(Error::InvalidArgument(
            "speed and rate must be positive".into(),
        ));
    }
    let pulses: Vec<Pulse> = profile
        .potholes
        .iter()
        .map(|p| Pulse::new(p, cfg))
        .collect();
    for (p, pulse) in profile.potholes.iter().zip(&pulses) {
        if 2.0 * pulse.half * cfg.rate < 2.0 {
            return Err(Error::InvalidArgument(format!(
                "pothole at {} m spans {:.2} samples at {} Hz and {} m/s; raise the rate or lower the speed",
                p.pos_m,
                2.0 * pulse.half * cfg.rate,
                cfg.rate,
                cfg.speed
            )));
        }
    }

    let n = snap_floor(profile.length_m / cfg.speed * cfg.rate);
    let mut flags = vec![false; n];
    for pulse in &pulses {
        let a = index_at(pulse.onset, cfg.rate).min(n);
        let b = index_at(pulse.onset + LABEL_SECONDS, cfg.rate).min(n);
        flags[a..b].iter_mut().for_each(|f| *f = true);
    }

    let sigma = profile.noise_sigma;
    let gyro_sigma = sigma * GYRO_NOISE_RATIO;
    let mut rng = Noise::new(cfg.seed);
    let mut samples = Vec::with_capacity(n);
    for (k, flag) in flags.into_iter().enumerate() {
        let t = k as f64 / cfg.rate;
        let ax = rng.gaussian(sigma / 2.0);
        let ay = rng.gaussian(sigma / 2.0);
        let mut az = cfg.gravity + rng.gaussian(sigma);
        let mut gx = rng.gaussian(gyro_sigma);
        let gy = rng.gaussian(gyro_sigma);
        let gz = rng.gaussian(gyro_sigma);
        for pulse in &pulses {
            let (da, dg) = pulse.at(t);
            az += da;
            gx += dg;
        }
        samples.push(ImuSample::new(
            T::lit(t),
            [ax, ay, az].map(T::lit),
            [gx, gy, gz].map(T::lit),
            flag,
        ));
    }
    SampleStream::new(samples, T::lit(cfg.rate))
}

/// Places `n_potholes` uniformly at random with at least [`MIN_SPACING_M`]
/// between starts and [`END_MARGIN_M`] of clear road at both ends.
pub fn default_profile(n_potholes: usize, length_m: f64, seed: u64) -> Result<RoadProfile> {
    if !(length_m > 0.0 && length_m.is_finite()) {
        return Err(Error::InvalidArgument(
            "road length must be positive".into(),
        ));
    }
    let mut profile = RoadProfile {
        length_m,
        noise_sigma: DEFAULT_NOISE_SIGMA,
        potholes: Vec::with_capacity(n_potholes),
    };
    if n_potholes == 0 {
        return Ok(profile);
    }
    let free =
        length_m - 2.0 * END_MARGIN_M - LENGTH_RANGE.1 - (n_potholes - 1) as f64 * MIN_SPACING_M;
    if free < 0.0 {
        return Err(Error::Infeasible(format!(
            "{n_potholes} potholes need at least {:.0} m of road at {MIN_SPACING_M} m spacing",
            length_m - free
        )));
    }
    let mut rng = Noise::new(seed);
    let mut offsets: Vec<f64> = (0..n_potholes).map(|_| free * rng.uniform()).collect();
    offsets.sort_by(f64::total_cmp);
    for (i, off) in offsets.into_iter().enumerate() {
        let depth = DEPTH_RANGE.0 + (DEPTH_RANGE.1 - DEPTH_RANGE.0) * rng.uniform();
        let len = LENGTH_RANGE.0 + (LENGTH_RANGE.1 - LENGTH_RANGE.0) * rng.uniform();
        profile.potholes.push(Pothole {
            pos_m: END_MARGIN_M + off + i as f64 * MIN_SPACING_M,
            depth_m: depth,
            len_m: len,
        });
    }
    Ok(profile)
}

/// Straight eastbound GPS track: position `speed · t` from `origin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticTrack {
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub speed: f64,
}

impl SyntheticTrack {
    pub fn position_at_distance(&self, meters: f64) -> (f64, f64) {
        let r = crate::registry::EARTH_RADIUS_M;
        let dlon = (meters / (r * self.origin_lat.to_radians().cos())).to_degrees();
        (self.origin_lat, self.origin_lon + dlon)
    }

    pub fn fix_at(&self, t: f64) -> (f64, f64) {
        self.position_at_distance(self.speed * t)
    }
}
