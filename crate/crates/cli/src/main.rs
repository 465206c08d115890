//! `pothole`: simulate, train, detect, evaluate, mask-stats, report, compare.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pothole_core::detectors::{
    attach_locations, balanced_event_dataset, compare_detectors, cross_validate, detect_svm_stream,
    g_zero, ground_truth, render_comparison, render_confusion, stdev_z, write_events_csv, z_diff,
    z_thresh, BaselineDefaults, ConfusionMatrix, GpsTrack, Method, Sweep, DEFAULT_REFRACTORY_S,
};
use pothole_core::features::{extract_features, write_feature_csv, EventWindows, DEFAULT_WINDOW_S};
use pothole_core::ingest::{
    parse_log, validate_rate, write_log, RateReport, SampleStream, DEFAULT_RATE, LOG_HEADER,
};
use pothole_core::registry::{
    render_table, to_geojson, Area, AreaUnit, DedupConfig, PotholeRecord, PotholeStore, Upsert,
    DEFAULT_GEOM_TOL, DEFAULT_RADIUS_M,
};
use pothole_core::simulator::{
    default_profile, simulate, RoadProfile, SimConfig, SyntheticTrack, DEFAULT_NOISE_SIGMA,
    DEFAULT_SPEED,
};
use pothole_core::svm::{
    self, LinearSvmModel, TrainConfig, DEFAULT_C, DEFAULT_MAX_EPOCHS, DEFAULT_TOL,
};
use pothole_core::vision::{
    canny, dilate, homography_from_points, log_stretch, mask_stats, pnm, warp_mask, BinaryMask,
    ImagePlane, SeverityThresholds, DEFAULT_CANNY_HIGH,
};

const RATE_TOLERANCE: f64 = 0.1;
const DEFAULT_ORIGIN_LAT: f64 = 12.9716;
const DEFAULT_ORIGIN_LON: f64 = 77.5946;

#[derive(Parser, Debug)]
#[command(
    name = "pothole",
    version,
    about = "Pothole detection from inertial logs and image masks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a labelled synthetic sensor log.
    Simulate(SimulateArgs),
    /// Train a linear SVM on the flagged windows of one or more logs.
    Train(TrainArgs),
    /// Detect pothole events in a log.
    Detect(DetectArgs),
    /// Score a model on the balanced labelled windows of a log.
    Evaluate(EvaluateArgs),
    /// Area, components and severity of a pothole mask.
    MaskStats(Box<MaskStatsArgs>),
    /// Print a pothole store as a table and GeoJSON.
    Report(ReportArgs),
    /// Detection rates of every detector over a threshold sweep.
    Compare(CompareArgs),
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be >= 0, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn fraction(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
        Ok(v) => Err(format!("must lie in [0, 1], got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn open_fraction(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v < 1.0 => Ok(v),
        Ok(v) => Err(format!("must lie in (0, 1), got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn quad(s: &str) -> Result<[(f64, f64); 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != 8 || v.iter().any(|x| !x.is_finite()) {
        return Err(format!(
            "expected 8 comma-separated numbers, got {}",
            v.len()
        ));
    }
    Ok(std::array::from_fn(|i| (v[2 * i], v[2 * i + 1])))
}

fn size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once('x').ok_or("expected WIDTHxHEIGHT")?;
    let w: usize = w.parse().map_err(|e| format!("width: {e}"))?;
    let h: usize = h.parse().map_err(|e| format!("height: {e}"))?;
    if w == 0 || h == 0 {
        return Err("dimensions must be positive".into());
    }
    Ok((w, h))
}

fn timestamp(s: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Number of potholes placed at random.
    #[arg(long, default_value_t = 26)]
    potholes: usize,
    /// Road length in metres.
    #[arg(long, default_value_t = 2000.0, value_parser = positive)]
    length: f64,
    /// Surface roughness, std of the accelerometer noise in m/s².
    #[arg(long, default_value_t = DEFAULT_NOISE_SIGMA, value_parser = non_negative)]
    noise: f64,
    /// Vehicle speed in m/s.
    #[arg(long, default_value_t = DEFAULT_SPEED, value_parser = positive)]
    speed: f64,
    /// Sample rate in Hz.
    #[arg(long, default_value_t = DEFAULT_RATE, value_parser = positive)]
    rate: f64,
    /// Seed for pothole placement and sensor noise.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Road profile JSON to simulate instead of a random one.
    #[arg(long, conflicts_with_all = ["potholes", "length", "noise"])]
    profile: Option<PathBuf>,
    /// Write the simulated road profile as JSON.
    #[arg(long)]
    profile_out: Option<PathBuf>,
    /// Write a straight eastbound GPS track (t,lat,lon) at the sample times.
    #[arg(long)]
    gps_out: Option<PathBuf>,
    /// Latitude of the track start in degrees.
    #[arg(long, default_value_t = DEFAULT_ORIGIN_LAT, allow_negative_numbers = true)]
    origin_lat: f64,
    /// Longitude of the track start in degrees.
    #[arg(long, default_value_t = DEFAULT_ORIGIN_LON, allow_negative_numbers = true)]
    origin_lon: f64,
    /// Output log path [default: stdout].
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Labelled sensor logs.
    #[arg(required = true)]
    logs: Vec<PathBuf>,
    /// Soft-margin penalty C.
    #[arg(long = "C", default_value_t = DEFAULT_C, value_parser = positive, allow_negative_numbers = true)]
    c: f64,
    /// Stopping tolerance on the relative duality gap.
    #[arg(long, default_value_t = DEFAULT_TOL, value_parser = positive, allow_negative_numbers = true)]
    tol: f64,
    /// Maximum number of optimizer epochs.
    #[arg(long, default_value_t = DEFAULT_MAX_EPOCHS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    max_epochs: u64,
    /// Window length in seconds.
    #[arg(long, default_value_t = DEFAULT_WINDOW_S, value_parser = positive, allow_negative_numbers = true)]
    window: f64,
    /// Keep every unflagged window instead of balancing the classes.
    #[arg(long)]
    all_negatives: bool,
    /// Also write the training features as CSV.
    #[arg(long)]
    features_out: Option<PathBuf>,
    /// Model output path.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Svm,
    #[value(name = "z_thresh")]
    ZThresh,
    #[value(name = "z_diff")]
    ZDiff,
    #[value(name = "stdev_z")]
    StdevZ,
    #[value(name = "g_zero")]
    GZero,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Svm => Method::Svm,
            MethodArg::ZThresh => Method::ZThresh,
            MethodArg::ZDiff => Method::ZDiff,
            MethodArg::StdevZ => Method::StdevZ,
            MethodArg::GZero => Method::GZero,
        }
    }
}

#[derive(Args, Debug)]
struct DetectArgs {
    /// Model file; required for the svm method.
    model: Option<PathBuf>,
    /// Sensor log to scan.
    #[arg(long)]
    input: PathBuf,
    /// Detector.
    #[arg(long, value_enum, default_value_t = MethodArg::Svm)]
    method: MethodArg,
    /// SVM window length in seconds (hop is half of it).
    #[arg(long, default_value_t = DEFAULT_WINDOW_S, value_parser = positive, allow_negative_numbers = true)]
    window: f64,
    /// Seconds after an SVM event during which windows are skipped.
    #[arg(long, default_value_t = DEFAULT_REFRACTORY_S, value_parser = non_negative, allow_negative_numbers = true)]
    refractory: f64,
    /// Baseline threshold in m/s² [defaults: z_thresh 4, z_diff 3, stdev_z 1.5, g_zero 2].
    #[arg(long, value_parser = positive, allow_negative_numbers = true)]
    threshold: Option<f64>,
    /// stdev_z trailing window in seconds.
    #[arg(long, default_value_t = BaselineDefaults::STDEV_WINDOW_S, value_parser = positive, allow_negative_numbers = true)]
    stdev_window: f64,
    /// g_zero minimum duration in seconds.
    #[arg(long, default_value_t = BaselineDefaults::G_ZERO_MIN_DUR_S, value_parser = non_negative, allow_negative_numbers = true)]
    min_dur: f64,
    /// GPS track CSV (t,lat,lon) for locating events by nearest timestamp.
    #[arg(long)]
    gps: Option<PathBuf>,
    /// Events CSV output path [default: stdout].
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Model file.
    model: PathBuf,
    /// Labelled sensor log.
    log: PathBuf,
    /// Window length in seconds.
    #[arg(long, default_value_t = DEFAULT_WINDOW_S, value_parser = positive, allow_negative_numbers = true)]
    window: f64,
    /// Instead of scoring the model, cross-validate with this many folds
    /// using the model's C and tolerance.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    folds: Option<u64>,
    /// Write {tp, fp, fn, tn, accuracy} as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MaskStatsArgs {
    /// Mask (P4, or P5 with nonzero = pothole) or grayscale photo with --edges.
    image: PathBuf,
    /// Treat the input as a grayscale photo: Canny edges, then dilation.
    #[arg(long)]
    edges: bool,
    /// Logarithmic contrast stretch before edge detection (low light).
    #[arg(long, requires = "edges")]
    night: bool,
    /// Canny high threshold relative to the strongest gradient.
    #[arg(long, default_value_t = DEFAULT_CANNY_HIGH, value_parser = fraction)]
    canny_high: f64,
    /// Canny low threshold [default: half of the high threshold].
    #[arg(long, value_parser = fraction)]
    canny_low: Option<f64>,
    /// Odd dilation kernel size applied to edges.
    #[arg(long, default_value_t = 5)]
    dilate: usize,
    /// Row index of the gating line.
    #[arg(long)]
    gate_row: Option<usize>,
    /// Rectify with the homography mapping this quad (x1,y1,...,x4,y4)...
    #[arg(long, value_parser = quad, requires = "rectify_dst", allow_hyphen_values = true)]
    rectify_src: Option<[(f64, f64); 4]>,
    /// ...onto this quad.
    #[arg(long, value_parser = quad, requires = "rectify_src", allow_hyphen_values = true)]
    rectify_dst: Option<[(f64, f64); 4]>,
    /// Rectified output size WIDTHxHEIGHT [default: input size].
    #[arg(long, value_parser = size)]
    out_size: Option<(usize, usize)>,
    /// Lower bound of the medium severity band (area fraction).
    #[arg(long, default_value_t = 0.05, value_parser = fraction)]
    medium: f64,
    /// Lower bound of the high severity band (area fraction).
    #[arg(long, default_value_t = 0.15, value_parser = fraction)]
    high: f64,
    /// Write the final mask as PBM.
    #[arg(long)]
    mask_out: Option<PathBuf>,
    /// Register the pothole in this store (needs --lat and --lon).
    #[arg(long, requires_all = ["lat", "lon"])]
    store: Option<PathBuf>,
    /// Latitude of the observation in degrees.
    #[arg(long, allow_negative_numbers = true)]
    lat: Option<f64>,
    /// Longitude of the observation in degrees.
    #[arg(long, allow_negative_numbers = true)]
    lon: Option<f64>,
    /// Observation time, RFC 3339 [default: now].
    #[arg(long, value_parser = timestamp)]
    seen: Option<DateTime<Utc>>,
    /// Image reference stored with the record.
    #[arg(long)]
    image_ref: Option<String>,
    /// Duplicate search radius in metres.
    #[arg(long, default_value_t = DEFAULT_RADIUS_M, value_parser = positive)]
    radius: f64,
    /// Relative geometry difference still counted as the same pothole.
    #[arg(long, default_value_t = DEFAULT_GEOM_TOL, value_parser = open_fraction)]
    geom_tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Table,
    Geojson,
    Both,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Pothole store (JSON lines).
    store: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Both)]
    format: ReportFormat,
    /// Only records near this point, given as LAT,LON.
    #[arg(long, allow_hyphen_values = true)]
    near: Option<String>,
    /// Radius in metres for --near.
    #[arg(long, default_value_t = DEFAULT_RADIUS_M, value_parser = positive)]
    radius: f64,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Labelled sensor log.
    log: PathBuf,
    /// Include the SVM with this model.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Threshold grids, e.g. "z_thresh=2:8:1;z_diff=1,2,3" (m/s²)
    /// [default: z_thresh 2..8, z_diff 1..6, stdev_z 0.5..3 step 0.5, g_zero 1..4].
    #[arg(long)]
    sweep: Option<String>,
    /// SVM window length in seconds.
    #[arg(long, default_value_t = DEFAULT_WINDOW_S, value_parser = positive)]
    window: f64,
    /// SVM refractory period in seconds.
    #[arg(long, default_value_t = DEFAULT_REFRACTORY_S, value_parser = non_negative)]
    refractory: f64,
    /// stdev_z trailing window in seconds.
    #[arg(long, default_value_t = BaselineDefaults::STDEV_WINDOW_S, value_parser = positive)]
    stdev_window: f64,
    /// g_zero minimum duration in seconds.
    #[arg(long, default_value_t = BaselineDefaults::G_ZERO_MIN_DUR_S, value_parser = non_negative)]
    min_dur: f64,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn write_file(path: &Path, data: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, data).with_context(|| format!("writing {}", path.display()))
}

fn emit(path: Option<&Path>, data: &str) -> Result<()> {
    match path {
        Some(p) => write_file(p, data),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(data.as_bytes())
                .context("writing to stdout")?;
            out.flush().context("writing to stdout")
        }
    }
}

fn load_log(path: &Path) -> Result<SampleStream<f64>> {
    let stream =
        parse_log(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))?;
    if let RateReport::Checked(v) = validate_rate(&stream, stream.nominal_rate(), RATE_TOLERANCE)? {
        if let Some(first) = v.first() {
            log::warn!(
                "{}: {} irregular sample gaps (first at row {}, {:.4} s)",
                path.display(),
                v.len(),
                first.index + 1,
                first.gap
            );
        }
    }
    Ok(stream)
}

fn load_model(path: &Path) -> Result<LinearSvmModel<f64>> {
    svm::deserialize(&read_bytes(path)?)
        .with_context(|| format!("loading model {}", path.display()))
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let profile = match &a.profile {
        Some(p) => RoadProfile::from_json(&read_text(p)?)
            .with_context(|| format!("parsing {}", p.display()))?,
        None => {
            let mut p = default_profile(a.potholes, a.length, a.seed)?;
            p.noise_sigma = a.noise;
            p
        }
    };
    let cfg = SimConfig {
        speed: a.speed,
        rate: a.rate,
        seed: a.seed,
        ..SimConfig::default()
    };
    let stream = simulate::<f64>(&profile, &cfg)?;
    if let Some(p) = &a.profile_out {
        write_file(p, profile.to_json()? + "\n")?;
    }
    if let Some(p) = &a.gps_out {
        let track = SyntheticTrack {
            origin_lat: a.origin_lat,
            origin_lon: a.origin_lon,
            speed: a.speed,
        };
        let fixes = stream
            .samples()
            .iter()
            .map(|s| {
                let (lat, lon) = track.fix_at(s.t);
                (s.t, lat, lon)
            })
            .collect();
        write_file(p, GpsTrack::new(fixes)?.to_csv())?;
    }
    emit(
        a.output.as_deref(),
        &format!("{LOG_HEADER}\n{}", write_log(&stream)),
    )
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let mut rows = Vec::new();
    for path in &a.logs {
        let stream = load_log(path)?;
        if !stream.is_labeled() {
            bail!(
                "{} has no flagged samples; training needs labelled logs",
                path.display()
            );
        }
        let ev = EventWindows::extract(&stream, a.window)?;
        let ev = if a.all_negatives { ev } else { ev.balanced() };
        for (w, y) in ev.labeled() {
            rows.push((extract_features(&w)?, y));
        }
    }
    if let Some(p) = &a.features_out {
        write_file(p, write_feature_csv(&rows))?;
    }
    let data = svm::LabeledDataset::new(
        rows.into_iter()
            .map(|(fv, y)| (fv, svm::Class::from_flag(y)))
            .collect(),
    );
    let cfg = TrainConfig {
        c: a.c,
        tol: a.tol,
        max_epochs: a.max_epochs as usize,
    };
    let report = svm::train_detailed(&data, &cfg)?;
    if !report.converged {
        log::warn!(
            "stopped after {} epochs with relative gap {:.3e}",
            report.epochs,
            report.relative_gap
        );
    }
    write_file(&a.output, svm::serialize(&report.model))?;
    eprintln!(
        "trained on {} windows in {} epochs; objective {:.6}",
        data.len(),
        report.epochs,
        report.objective_history.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

fn cmd_detect(a: DetectArgs) -> Result<()> {
    let method = Method::from(a.method);
    let model = match (&a.model, method) {
        (Some(p), _) => Some(load_model(p)?),
        (None, Method::Svm) => bail!("the svm method needs a model file"),
        (None, _) => None,
    };
    let stream = load_log(&a.input)?;
    let thr = |default: f64| a.threshold.unwrap_or(default);
    let mut events = match method {
        Method::Svm => detect_svm_stream(
            model.as_ref().expect("checked above"),
            &stream,
            a.window,
            a.refractory,
        )?,
        Method::ZThresh => z_thresh(&stream, thr(BaselineDefaults::Z_THRESH))?,
        Method::ZDiff => z_diff(&stream, thr(BaselineDefaults::Z_DIFF))?,
        Method::StdevZ => stdev_z(&stream, a.stdev_window, thr(BaselineDefaults::STDEV_Z))?,
        Method::GZero => g_zero(&stream, thr(BaselineDefaults::G_ZERO), a.min_dur)?,
    };
    if let Some(p) = &a.gps {
        let track = GpsTrack::parse_csv(&read_text(p)?)
            .with_context(|| format!("parsing {}", p.display()))?;
        attach_locations(&mut events, &track);
    }
    eprintln!("{} {} events", events.len(), method);
    emit(a.output.as_deref(), &write_events_csv(&events))
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let stream = load_log(&a.log)?;
    let data = balanced_event_dataset(&stream, a.window)?;
    let matrix = match a.folds {
        Some(k) => {
            let cfg = TrainConfig {
                c: model.c,
                tol: model.tol,
                ..TrainConfig::default()
            };
            cross_validate(&data, k as usize, &cfg)?.pooled
        }
        None => {
            let mut m = ConfusionMatrix::default();
            for (fv, c) in &data.rows {
                m.add(*c, model.predict(fv)?.0);
            }
            m
        }
    };
    let mut text = render_confusion(&matrix);
    text.push_str(&format!("{}\n", matrix.to_json()));
    emit(None, &text)?;
    if let Some(p) = &a.json {
        write_file(p, format!("{}\n", matrix.to_json()))?;
    }
    Ok(())
}

fn mask_from_input(a: &MaskStatsArgs) -> Result<BinaryMask> {
    let bytes = read_bytes(&a.image)?;
    let ctx = || format!("decoding {}", a.image.display());
    if !a.edges {
        return pnm::read_mask(&bytes).with_context(ctx);
    }
    let mut img = pnm::read_gray(&bytes).with_context(ctx)?;
    if a.night {
        img = log_stretch(&img);
    }
    let low = a.canny_low.unwrap_or(a.canny_high / 2.0);
    if low > a.canny_high {
        bail!(
            "canny low threshold {low} exceeds high threshold {}",
            a.canny_high
        );
    }
    let edges = canny(&ImagePlane::<f64>::from(&img), low, a.canny_high)?;
    Ok(dilate(&edges, a.dilate)?)
}

fn cmd_mask_stats(a: MaskStatsArgs) -> Result<()> {
    let thresholds = SeverityThresholds {
        medium: a.medium,
        high: a.high,
    };
    let mut mask = mask_from_input(&a)?;
    if let (Some(src), Some(dst)) = (&a.rectify_src, &a.rectify_dst) {
        let h = homography_from_points(src, dst).context("rectification points")?;
        let (w, ht) = a.out_size.unwrap_or((mask.width(), mask.height()));
        mask = warp_mask(&mask, &h, w, ht)?;
    }
    if let Some(p) = &a.mask_out {
        write_file(p, pnm::write_pbm(&mask))?;
    }
    let stats = mask_stats(&mask, a.gate_row, &thresholds)?;
    let mut out = serde_json::to_value(&stats)?;
    if let Some(store_path) = &a.store {
        let (lat, lon) = (
            a.lat.expect("required by clap"),
            a.lon.expect("required by clap"),
        );
        let mut store = PotholeStore::open(store_path)
            .with_context(|| format!("opening store {}", store_path.display()))?;
        let mut obs = PotholeRecord::observation(
            lat,
            lon,
            Some(Area {
                value: stats.area_ratio,
                unit: AreaUnit::FrameFraction,
            }),
            stats.severity,
            a.seen.unwrap_or_else(Utc::now),
        );
        obs.image_ref = a
            .image_ref
            .clone()
            .or_else(|| Some(a.image.display().to_string()));
        let cfg = DedupConfig {
            radius_m: a.radius,
            geom_tol: a.geom_tol,
        };
        let res = store
            .upsert(obs, &cfg)
            .with_context(|| format!("updating store {}", store_path.display()))?;
        out["record"] = match res {
            Upsert::Created(id) => serde_json::json!({ "status": "created", "id": id }),
            Upsert::Merged(id) => serde_json::json!({ "status": "merged", "id": id }),
        };
    }
    emit(None, &format!("{out}\n"))
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    if !a.store.exists() {
        bail!("store {} does not exist", a.store.display());
    }
    let store = PotholeStore::open(&a.store)
        .with_context(|| format!("opening store {}", a.store.display()))?;
    let records: Vec<&PotholeRecord> = match &a.near {
        Some(spec) => {
            let (lat, lon) = spec
                .split_once(',')
                .and_then(|(x, y)| {
                    Some((x.trim().parse::<f64>().ok()?, y.trim().parse::<f64>().ok()?))
                })
                .ok_or_else(|| anyhow!("--near expects LAT,LON, got {spec:?}"))?;
            store
                .query_nearby(lat, lon, a.radius)?
                .into_iter()
                .map(|(_, r)| r)
                .collect()
        }
        None => store.records().collect(),
    };
    let mut text = String::new();
    if matches!(a.format, ReportFormat::Table | ReportFormat::Both) {
        text.push_str(&render_table(records.iter().copied()));
    }
    if matches!(a.format, ReportFormat::Geojson | ReportFormat::Both) {
        text.push_str(&serde_json::to_string_pretty(&to_geojson(
            records.iter().copied(),
        ))?);
        text.push('\n');
    }
    emit(None, &text)
}

fn cmd_compare(a: CompareArgs) -> Result<()> {
    let stream = load_log(&a.log)?;
    let truth = ground_truth(&stream).map_err(|e| {
        anyhow!(
            "{e}: {} has no flagged samples, and comparing detectors needs labelled ground truth",
            a.log.display()
        )
    })?;
    let model = a.model.as_deref().map(load_model).transpose()?;
    let mut sweep = match &a.sweep {
        Some(s) => Sweep::parse(s).context("parsing --sweep")?,
        None => Sweep::default(),
    };
    sweep.svm_window = a.window;
    sweep.refractory = a.refractory;
    sweep.stdev_window = a.stdev_window;
    sweep.g_zero_min_dur = a.min_dur;
    let rows = compare_detectors(&stream, &truth, &sweep, model.as_ref())?;
    emit(None, &render_comparison(&rows))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Train(a) => cmd_train(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::MaskStats(a) => cmd_mask_stats(*a),
        Command::Report(a) => cmd_report(a),
        Command::Compare(a) => cmd_compare(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(2));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
