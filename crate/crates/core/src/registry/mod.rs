//! Pothole records, great-circle distance, duplicate suppression and the
//! JSON-lines store.

mod store;

use std::fmt::Write as _;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vision::Severity;

pub use store::PotholeStore;

pub const EARTH_RADIUS_M: f64 = 6_371_000.0;
pub const DEFAULT_RADIUS_M: f64 = 15.0;
pub const DEFAULT_GEOM_TOL: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaUnit {
    /// Fraction of the camera frame.
    FrameFraction,
    SquareMeters,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub value: f64,
    pub unit: AreaUnit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotholeRecord {
    pub id: u64,
    pub lat: f64,
    pub lon: f64,
    pub area: Option<Area>,
    pub length_m: Option<f64>,
    pub width_m: Option<f64>,
    pub severity: Severity,
    pub image_ref: Option<String>,
    pub first_seen: DateTime<Utc>,
    pub last_seen: DateTime<Utc>,
    pub sightings: u32,
}

impl PotholeRecord {
    /// A fresh observation; `id` is assigned by the store on creation.
    pub fn observation(
        lat: f64,
        lon: f64,
        area: Option<Area>,
        severity: Severity,
        seen: DateTime<Utc>,
    ) -> Self {
        Self {
            id: 0,
            lat,
            lon,
            area,
            length_m: None,
            width_m: None,
            severity,
            image_ref: None,
            first_seen: seen,
            last_seen: seen,
            sightings: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_coords(self.lat, self.lon)?;
        if self.sightings < 1 {
            return Err(Error::InvalidArgument("sightings must be >= 1".into()));
        }
        if self.first_seen > self.last_seen {
            return Err(Error::InvalidArgument(
                "first_seen is after last_seen".into(),
            ));
        }
        if let Some(a) = self.area {
            if !(a.value >= 0.0 && a.value.is_finite()) {
                return Err(Error::InvalidArgument(
                    "area must be finite and >= 0".into(),
                ));
            }
        }
        Ok(())
    }

    fn footprint(&self) -> Option<f64> {
        Some(self.length_m? * self.width_m?)
    }
}

fn check_coords<T: Real>(lat: T, lon: T) -> Result<()> {
    let ok = lat.abs() <= T::lit(90.0) && lon.abs() <= T::lit(180.0);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "coordinates ({lat}, {lon}) out of range"
        )))
    }
}

/// Great-circle distance in meters between `(lat, lon)` pairs in degrees.
pub fn haversine<T: Real>(a: (T, T), b: (T, T)) -> Result<T> {
    check_coords(a.0, a.1)?;
    check_coords(b.0, b.1)?;
    let (p1, p2) = (a.0.to_radians(), b.0.to_radians());
    let dp = p2 - p1;
    let dl = (b.1 - a.1).to_radians();
    let half = T::lit(0.5);
    let h = (dp * half).sin().powi(2) + p1.cos() * p2.cos() * (dl * half).sin().powi(2);
    let h = h.min(T::one()).max(T::zero());
    Ok(T::lit(2.0 * EARTH_RADIUS_M) * h.sqrt().asin())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DedupConfig {
    pub radius_m: f64,
    pub geom_tol: f64,
}

impl Default for DedupConfig {
    fn default() -> Self {
        Self {
            radius_m: DEFAULT_RADIUS_M,
            geom_tol: DEFAULT_GEOM_TOL,
        }
    }
}

impl DedupConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius_m > 0.0 && self.radius_m.is_finite()) {
            return Err(Error::InvalidArgument("radius must be positive".into()));
        }
        if !(self.geom_tol > 0.0 && self.geom_tol < 1.0) {
            return Err(Error::InvalidArgument(
                "geometry tolerance must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DuplicateCheck {
    pub matched: Option<u64>,
    /// Nearby records whose geometry shares no comparable field with the
    /// candidate.
    pub incomparable: Vec<u64>,
}

fn relative_diff(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

enum GeometryMatch {
    Same,
    Different,
    Incomparable,
}

fn compare_geometry(a: &PotholeRecord, b: &PotholeRecord, tol: f64) -> GeometryMatch {
    if let (Some(x), Some(y)) = (a.area, b.area) {
        if x.unit == y.unit {
            return if relative_diff(x.value, y.value) <= tol {
                GeometryMatch::Same
            } else {
                GeometryMatch::Different
            };
        }
    }
    match (a.length_m, a.width_m, b.length_m, b.width_m) {
        (Some(l1), Some(w1), Some(l2), Some(w2)) => {
            if relative_diff(l1, l2) <= tol && relative_diff(w1, w2) <= tol {
                GeometryMatch::Same
            } else {
                GeometryMatch::Different
            }
        }
        _ => GeometryMatch::Incomparable,
    }
}

/// Stored records within `radius_m` of `(lat, lon)`, nearest first, ties by id.
pub fn query_nearby<'a>(
    records: impl IntoIterator<Item = &'a PotholeRecord>,
    lat: f64,
    lon: f64,
    radius_m: f64,
) -> Result<Vec<(f64, &'a PotholeRecord)>> {
    check_coords(lat, lon)?;
    let mut hits = Vec::new();
    for r in records {
        let d = haversine((lat, lon), (r.lat, r.lon))?;
        if d <= radius_m {
            hits.push((d, r));
        }
    }
    hits.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)));
    Ok(hits)
}

/// Matches `candidate` against the nearest stored record with similar
/// geometry inside the search radius.
pub fn is_duplicate<'a>(
    candidate: &PotholeRecord,
    records: impl IntoIterator<Item = &'a PotholeRecord>,
    cfg: &DedupConfig,
) -> Result<DuplicateCheck> {
    cfg.validate()?;
    let mut out = DuplicateCheck::default();
    for (_, r) in query_nearby(records, candidate.lat, candidate.lon, cfg.radius_m)? {
        match compare_geometry(candidate, r, cfg.geom_tol) {
            GeometryMatch::Same => {
                out.matched = Some(r.id);
                break;
            }
            GeometryMatch::Different => {}
            GeometryMatch::Incomparable => out.incomparable.push(r.id),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Upsert {
    Created(u64),
    Merged(u64),
}

/// Merged view of `stored` after another sighting `obs`.
pub(crate) fn merge(stored: &PotholeRecord, obs: &PotholeRecord) -> PotholeRecord {
    let mut out = stored.clone();
    out.sightings = stored.sightings.saturating_add(1);
    out.first_seen = stored.first_seen.min(obs.first_seen);
    out.last_seen = stored.last_seen.max(obs.last_seen);
    let larger = match (stored.area, obs.area) {
        (Some(a), Some(b)) if a.unit == b.unit => b.value > a.value,
        _ => match (stored.footprint(), obs.footprint()) {
            (Some(a), Some(b)) => b > a,
            (None, Some(_)) => true,
            _ => false,
        },
    };
    if larger {
        out.area = obs.area;
        out.length_m = obs.length_m;
        out.width_m = obs.width_m;
        out.severity = obs.severity;
    }
    if out.image_ref.is_none() {
        out.image_ref = obs.image_ref.clone();
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into())
}

/// Fixed-width text table, one row per record in id order.
pub fn render_table<'a>(records: impl IntoIterator<Item = &'a PotholeRecord>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>6}  {:>11}  {:>12}  {:>10}  {:<14}  {:>8}  {:>8}  {:<8}  {:>9}  last_seen",
        "id", "lat", "lon", "area", "unit", "length_m", "width_m", "severity", "sightings"
    );
    for r in records {
        let (area, unit) = match r.area {
            Some(a) => (
                format!("{:.6}", a.value),
                match a.unit {
                    AreaUnit::FrameFraction => "frame_fraction",
                    AreaUnit::SquareMeters => "square_meters",
                },
            ),
            None => ("-".into(), "-"),
        };
        let _ = writeln!(
            out,
            "{:>6}  {:>11.6}  {:>12.6}  {:>10}  {:<14}  {:>8}  {:>8}  {:<8}  {:>9}  {}",
            r.id,
            r.lat,
            r.lon,
            area,
            unit,
            opt(r.length_m),
            opt(r.width_m),
            r.severity,
            r.sightings,
            r.last_seen.to_rfc3339()
        );
    }
    out
}

/// GeoJSON FeatureCollection of points (`[lon, lat]`).
pub fn to_geojson<'a>(records: impl IntoIterator<Item = &'a PotholeRecord>) -> serde_json::Value {
    let features: Vec<serde_json::Value> = records
        .into_iter()
        .map(|r| {
            serde_json::json!({
                "type": "Feature",
                "geometry": { "type": "Point", "coordinates": [r.lon, r.lat] },
                "properties": {
                    "id": r.id,
                    "area": r.area,
                    "length_m": r.length_m,
                    "width_m": r.width_m,
                    "severity": r.severity,
                    "image_ref": r.image_ref,
                    "first_seen": r.first_seen,
                    "last_seen": r.last_seen,
                    "sightings": r.sightings,
                }
            })
        })
        .collect();
    serde_json::json!({ "type": "FeatureCollection", "features": features })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ts(s: i64) -> DateTime<Utc> {
        Utc.timestamp_opt(1_700_000_000 + s, 0).unwrap()
    }

    fn rec(id: u64, lat: f64, lon: f64, area: f64) -> PotholeRecord {
        let mut r = PotholeRecord::observation(
            lat,
            lon,
            Some(Area {
                value: area,
                unit: AreaUnit::FrameFraction,
            }),
            Severity::High,
            ts(0),
        );
        r.id = id;
        r
    }

    /// Point `meters` north of `(lat, lon)`.
    fn north(lat: f64, lon: f64, meters: f64) -> (f64, f64) {
        (lat + (meters / EARTH_RADIUS_M).to_degrees(), lon)
    }

    #[test]
    fn haversine_identity_and_equator() {
        assert_eq!(haversine((12.9, 80.2), (12.9, 80.2)).unwrap(), 0.0);
        let d = haversine((0.0, 0.0), (0.0, 1.0)).unwrap();
        let expect = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
        assert!((d - expect).abs() < 0.1);
        assert!((d - 111_194.9).abs() < 0.1);
    }

    #[test]
    fn haversine_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let a = (rng.gen_range(-90.0..90.0), rng.gen_range(-180.0..180.0));
            let b = (rng.gen_range(-90.0..90.0), rng.gen_range(-180.0..180.0));
            assert_eq!(haversine(a, b).unwrap(), haversine(b, a).unwrap());
            assert!(haversine(a, b).unwrap() > 0.0);
        }
    }

    #[test]
    fn haversine_rejects_bad_coords() {
        assert!(haversine((91.0, 0.0), (0.0, 0.0)).is_err());
        assert!(haversine((0.0, 0.0), (0.0, -181.0)).is_err());
    }

    #[test]
    fn duplicate_rules() {
        let base = rec(1, 12.9, 80.2, 0.18);
        let (lat, lon) = north(12.9, 80.2, 5.0);
        let cfg = DedupConfig::default();

        let same = rec(0, lat, lon, 0.18);
        assert_eq!(is_duplicate(&same, [&base], &cfg).unwrap().matched, Some(1));

        let bigger = rec(0, lat, lon, 0.36);
        assert_eq!(is_duplicate(&bigger, [&base], &cfg).unwrap().matched, None);

        let (flat, flon) = north(12.9, 80.2, 500.0);
        let far = rec(0, flat, flon, 0.18);
        assert_eq!(is_duplicate(&far, [&base], &cfg).unwrap().matched, None);
    }

    #[test]
    fn duplicate_prefers_nearest_then_id() {
        let (a_lat, a_lon) = north(12.9, 80.2, 3.0);
        let (b_lat, b_lon) = north(12.9, 80.2, 8.0);
        let near = rec(7, a_lat, a_lon, 0.2);
        let farther = rec(2, b_lat, b_lon, 0.2);
        let cand = rec(0, 12.9, 80.2, 0.2);
        let cfg = DedupConfig::default();
        assert_eq!(
            is_duplicate(&cand, [&farther, &near], &cfg)
                .unwrap()
                .matched,
            Some(7)
        );
        let twin = rec(3, a_lat, a_lon, 0.2);
        assert_eq!(
            is_duplicate(&cand, [&near, &twin], &cfg).unwrap().matched,
            Some(3)
        );
    }

    #[test]
    fn falls_back_to_dimensions() {
        let mut stored = rec(1, 12.9, 80.2, 0.1);
        stored.length_m = Some(1.0);
        stored.width_m = Some(0.6);
        let mut cand = stored.clone();
        cand.area = Some(Area {
            value: 0.5,
            unit: AreaUnit::SquareMeters,
        });
        cand.length_m = Some(1.1);
        cand.width_m = Some(0.55);
        let cfg = DedupConfig::default();
        assert_eq!(
            is_duplicate(&cand, [&stored], &cfg).unwrap().matched,
            Some(1)
        );
        cand.length_m = None;
        let r = is_duplicate(&cand, [&stored], &cfg).unwrap();
        assert_eq!(r.matched, None);
        assert_eq!(r.incomparable, vec![1]);
    }

    #[test]
    fn reflexive() {
        let r = rec(4, -33.9, 151.2, 0.07);
        assert_eq!(
            is_duplicate(&r, [&r], &DedupConfig::default())
                .unwrap()
                .matched,
            Some(4)
        );
    }

    #[test]
    fn bad_dedup_config() {
        let r = rec(4, 0.0, 0.0, 0.07);
        assert!(is_duplicate(
            &r,
            [&r],
            &DedupConfig {
                radius_m: 0.0,
                geom_tol: 0.25
            }
        )
        .is_err());
        assert!(is_duplicate(
            &r,
            [&r],
            &DedupConfig {
                radius_m: 10.0,
                geom_tol: 1.0
            }
        )
        .is_err());
    }

    #[test]
    fn nearby_ordering() {
        let recs: Vec<_> = [1.0, 10.0, 100.0]
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let (lat, lon) = north(10.0, 20.0, *m);
                rec(i as u64 + 1, lat, lon, 0.1)
            })
            .collect();
        let hits = query_nearby(&recs, 10.0, 20.0, 50.0).unwrap();
        let ids: Vec<u64> = hits.iter().map(|h| h.1.id).collect();
        assert_eq!(ids, vec![1, 2]);
        assert!(query_nearby(&Vec::<PotholeRecord>::new(), 10.0, 20.0, 50.0)
            .unwrap()
            .is_empty());
        assert!(query_nearby(&recs, 100.0, 20.0, 50.0).is_err());
    }

    #[test]
    fn nearby_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let recs: Vec<_> = (0..1000)
            .map(|i| {
                rec(
                    i,
                    12.0 + rng.gen_range(0.0..0.02),
                    80.0 + rng.gen_range(0.0..0.02),
                    0.1,
                )
            })
            .collect();
        for _ in 0..20 {
            let (lat, lon) = (
                12.0 + rng.gen_range(0.0..0.02),
                80.0 + rng.gen_range(0.0..0.02),
            );
            let radius = rng.gen_range(50.0..600.0);
            let got: Vec<u64> = query_nearby(&recs, lat, lon, radius)
                .unwrap()
                .iter()
                .map(|h| h.1.id)
                .collect();
            // exhaustive: spherical law of cosines distance
            let mut want: Vec<(f64, u64)> = recs
                .iter()
                .filter_map(|r| {
                    let (p1, p2) = (lat.to_radians(), r.lat.to_radians());
                    let dl = (r.lon - lon).to_radians();
                    let c = (p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos()).clamp(-1.0, 1.0);
                    let d = EARTH_RADIUS_M * c.acos();
                    (d <= radius).then_some((d, r.id))
                })
                .collect();
            want.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let want: Vec<u64> = want.into_iter().map(|w| w.1).collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn merge_keeps_larger_geometry() {
        let stored = rec(1, 1.0, 1.0, 0.1);
        let mut obs = rec(0, 1.0, 1.0, 0.12);
        obs.severity = Severity::Medium;
        obs.last_seen = ts(50);
        obs.first_seen = ts(50);
        let m = merge(&stored, &obs);
        assert_eq!(m.sightings, 2);
        assert_eq!(m.area.unwrap().value, 0.12);
        assert_eq!(m.severity, Severity::Medium);
        assert_eq!(m.last_seen, ts(50));
        assert_eq!(m.first_seen, ts(0));
        let m2 = merge(&m, &stored);
        assert_eq!(m2.area.unwrap().value, 0.12);
    }

    #[test]
    fn geojson_and_table() {
        let r = rec(1, 12.5, 80.25, 0.18);
        let g = to_geojson([&r]);
        assert_eq!(g["features"][0]["geometry"]["coordinates"][0], 80.25);
        assert_eq!(g["features"][0]["properties"]["severity"], "high");
        let t = render_table([&r]);
        assert_eq!(t.lines().count(), 2);
        assert!(t.contains("0.180000"));
    }
}
