use std::path::Path;
use std::process::{Command, Output};

use pothole_core::vision::{pnm, BinaryMask, GrayImage};

fn pothole(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pothole"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let o = pothole(dir, args);
    assert_eq!(o.status.code(), Some(0), "{args:?} failed: {}", stderr(&o));
    o
}

fn fixture(dir: &Path) {
    ok(
        dir,
        &[
            "simulate",
            "--potholes",
            "26",
            "--length",
            "2000",
            "--seed",
            "7",
            "-o",
            "road.csv",
        ],
    );
    ok(dir, &["train", "road.csv", "-o", "model.bin"]);
}

#[test]
fn simulate_train_evaluate() {
    let d = tempfile::tempdir().unwrap();
    fixture(d.path());
    assert_eq!(
        std::fs::metadata(d.path().join("model.bin")).unwrap().len(),
        180
    );
    let o = ok(
        d.path(),
        &["evaluate", "model.bin", "road.csv", "--json", "m.json"],
    );
    let text = stdout(&o);
    assert!(
        text.contains("target 0 pothole") && text.contains("output 1 plain"),
        "{text}"
    );
    assert!(text.contains("overall"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.path().join("m.json")).unwrap()).unwrap();
    let total: u64 = ["tp", "fp", "fn", "tn"]
        .iter()
        .map(|k| json[k].as_u64().unwrap())
        .sum();
    assert_eq!(total, 52);
    assert!(json["accuracy"].as_f64().unwrap() >= 0.96);

    let cv = ok(
        d.path(),
        &["evaluate", "model.bin", "road.csv", "--folds", "5"],
    );
    assert!(stdout(&cv).contains("overall"));
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let o = pothole(d.path(), &["detect", "model.bin", "--input", "missing.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("model.bin") || stderr(&o).contains("missing.csv"));

    fixture(d.path());
    let o = pothole(d.path(), &["detect", "model.bin", "--input", "missing.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.csv"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());

    for args in [
        &["train", "--C", "-5", "road.csv", "-o", "x.bin"][..],
        &["train", "--C", "0", "road.csv", "-o", "x.bin"],
        &["frobnicate"],
        &[],
        &[
            "detect",
            "model.bin",
            "--input",
            "road.csv",
            "--method",
            "magic",
        ],
        &["simulate", "--speed", "-1"],
    ] {
        assert_eq!(pothole(d.path(), args).status.code(), Some(2), "{args:?}");
    }

    std::fs::write(d.path().join("bad.bin"), b"not a model").unwrap();
    assert_eq!(
        pothole(d.path(), &["evaluate", "bad.bin", "road.csv"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        pothole(d.path(), &["detect", "--input", "road.csv"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn help_documents_defaults() {
    let d = tempfile::tempdir().unwrap();
    let expect: &[(&str, &[&str])] = &[
        (
            "simulate",
            &[
                "[default: 26]",
                "[default: 2000]",
                "[default: 0.3]",
                "[default: 10]",
                "[default: 50]",
                "[default: 0]",
            ],
        ),
        (
            "train",
            &["[default: 1]", "[default: 0.0001]", "[default: 10000]"],
        ),
        (
            "detect",
            &[
                "[default: svm]",
                "[default: 1]",
                "[default: 0.5]",
                "[default: 0.06]",
                "z_thresh 4",
                "z_diff 3",
                "stdev_z 1.5",
                "g_zero 2",
            ],
        ),
        (
            "mask-stats",
            &[
                "[default: 0.6]",
                "half of the high",
                "[default: 5]",
                "[default: 0.05]",
                "[default: 0.15]",
                "[default: 15]",
                "[default: 0.25]",
            ],
        ),
        ("report", &["[default: both]", "[default: 15]"]),
        (
            "compare",
            &[
                "[default: 1]",
                "[default: 0.5]",
                "[default: 0.06]",
                "z_thresh 2..8",
            ],
        ),
        ("evaluate", &["[default: 1]"]),
    ];
    for (cmd, needles) in expect {
        let o = ok(d.path(), &[cmd, "--help"]);
        let text = stdout(&o);
        for n in *needles {
            assert!(text.contains(n), "{cmd} --help lacks {n:?}:\n{text}");
        }
    }
}

#[test]
fn deterministic_outputs() {
    let d = tempfile::tempdir().unwrap();
    let a = ok(
        d.path(),
        &[
            "simulate",
            "--seed",
            "11",
            "--potholes",
            "5",
            "--length",
            "400",
        ],
    )
    .stdout;
    let b = ok(
        d.path(),
        &[
            "simulate",
            "--seed",
            "11",
            "--potholes",
            "5",
            "--length",
            "400",
        ],
    )
    .stdout;
    assert_eq!(a, b);
    let c = ok(
        d.path(),
        &[
            "simulate",
            "--seed",
            "12",
            "--potholes",
            "5",
            "--length",
            "400",
        ],
    )
    .stdout;
    assert_ne!(a, c);

    fixture(d.path());
    let e1 = ok(d.path(), &["evaluate", "model.bin", "road.csv"]).stdout;
    let e2 = ok(d.path(), &["evaluate", "model.bin", "road.csv"]).stdout;
    assert_eq!(e1, e2);
    let m1 = std::fs::read(d.path().join("model.bin")).unwrap();
    ok(d.path(), &["train", "road.csv", "-o", "model2.bin"]);
    assert_eq!(m1, std::fs::read(d.path().join("model2.bin")).unwrap());
}

#[test]
fn profile_and_gps_round_trip() {
    let d = tempfile::tempdir().unwrap();
    ok(
        d.path(),
        &[
            "simulate",
            "--potholes",
            "3",
            "--length",
            "300",
            "--seed",
            "4",
            "--profile-out",
            "p.json",
            "--gps-out",
            "gps.csv",
            "-o",
            "a.csv",
        ],
    );
    ok(
        d.path(),
        &[
            "simulate",
            "--profile",
            "p.json",
            "--seed",
            "4",
            "-o",
            "b.csv",
        ],
    );
    assert_eq!(
        std::fs::read(d.path().join("a.csv")).unwrap(),
        std::fs::read(d.path().join("b.csv")).unwrap()
    );
    let gps = std::fs::read_to_string(d.path().join("gps.csv")).unwrap();
    assert!(gps.starts_with("t,lat,lon\n"));
    assert_eq!(gps.lines().count(), 1501);
}

#[test]
fn detect_writes_events_with_locations() {
    let d = tempfile::tempdir().unwrap();
    fixture(d.path());
    ok(
        d.path(),
        &[
            "simulate",
            "--potholes",
            "26",
            "--length",
            "2000",
            "--seed",
            "7",
            "--gps-out",
            "gps.csv",
            "-o",
            "road2.csv",
        ],
    );
    let o = ok(
        d.path(),
        &[
            "detect",
            "model.bin",
            "--input",
            "road.csv",
            "--gps",
            "gps.csv",
        ],
    );
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,method,value,lat,lon"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 26);
    assert!(rows
        .iter()
        .all(|r| r[1] == "svm" && !r[3].is_empty() && !r[4].is_empty()));

    for m in ["z_thresh", "z_diff", "stdev_z", "g_zero"] {
        let o = ok(
            d.path(),
            &[
                "detect", "--input", "road.csv", "--method", m, "-o", "ev.csv",
            ],
        );
        assert!(o.stdout.is_empty());
        let csv = std::fs::read_to_string(d.path().join("ev.csv")).unwrap();
        assert!(csv.lines().skip(1).all(|l| l.split(',').nth(1) == Some(m)));
    }
}

#[test]
fn compare_tables() {
    let d = tempfile::tempdir().unwrap();
    fixture(d.path());
    let o = ok(d.path(), &["compare", "road.csv", "--sweep", "z_thresh=4"]);
    assert_eq!(stdout(&o).lines().count(), 2);
    let o = ok(d.path(), &["compare", "road.csv", "--model", "model.bin"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 1 + 7 + 6 + 6 + 4);
    assert!(text.lines().nth(1).unwrap().starts_with("svm"));

    ok(
        d.path(),
        &[
            "simulate",
            "--potholes",
            "0",
            "--length",
            "300",
            "--noise",
            "0",
            "-o",
            "flat.csv",
        ],
    );
    let o = pothole(d.path(), &["compare", "flat.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ground truth"));
    assert_eq!(
        pothole(d.path(), &["compare", "road.csv", "--sweep", "svm=1"])
            .status
            .code(),
        Some(1)
    );
}

fn disk_mask(w: usize, h: usize, r: f64) -> BinaryMask {
    BinaryMask::from_fn(w, h, |x, y| {
        let (dx, dy) = (x as f64 - w as f64 / 2.0, y as f64 - h as f64 / 2.0);
        dx * dx + dy * dy <= r * r
    })
}

#[test]
fn mask_stats_and_registry() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(
        d.path().join("m.pbm"),
        pnm::write_pbm(&disk_mask(100, 80, 20.0)),
    )
    .unwrap();
    let o = ok(d.path(), &["mask-stats", "m.pbm", "--gate-row", "40"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let expected = disk_mask(100, 80, 20.0).count() as f64 / 8000.0;
    assert!((v["area_ratio"].as_f64().unwrap() - expected).abs() < 1e-6);
    assert_eq!(v["components"], 1);
    assert_eq!(v["gated"], true);
    assert_eq!(v["severity"], "high");

    let o = ok(d.path(), &["mask-stats", "m.pbm"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["gated"].is_null());

    let reg = [
        "mask-stats",
        "m.pbm",
        "--store",
        "s.jsonl",
        "--lat",
        "12.97",
        "--lon",
        "77.59",
        "--seen",
        "2026-01-01T00:00:00Z",
    ];
    let v: serde_json::Value = serde_json::from_str(&stdout(&ok(d.path(), &reg))).unwrap();
    assert_eq!(v["record"]["status"], "created");
    let v: serde_json::Value = serde_json::from_str(&stdout(&ok(d.path(), &reg))).unwrap();
    assert_eq!(v["record"]["status"], "merged");

    let o = ok(d.path(), &["report", "s.jsonl", "--format", "geojson"]);
    let g: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(g["features"].as_array().unwrap().len(), 1);
    assert_eq!(g["features"][0]["properties"]["sightings"], 2);
    let table = stdout(&ok(d.path(), &["report", "s.jsonl", "--format", "table"]));
    assert_eq!(table.lines().count(), 2);
    let near = stdout(&ok(
        d.path(),
        &["report", "s.jsonl", "--format", "table", "--near", "0,0"],
    ));
    assert_eq!(near.lines().count(), 1);
    assert_eq!(
        pothole(d.path(), &["report", "none.jsonl"]).status.code(),
        Some(1)
    );
    assert_eq!(
        pothole(d.path(), &["mask-stats", "m.pbm", "--store", "s.jsonl"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn mask_stats_edges_and_rectify() {
    let d = tempfile::tempdir().unwrap();
    let img = GrayImage::from_fn(120, 90, |x, y| {
        let (dx, dy) = (x as f64 - 60.0, y as f64 - 45.0);
        if dx * dx + dy * dy < 400.0 {
            30
        } else {
            200
        }
    });
    std::fs::write(d.path().join("photo.pgm"), pnm::write_pgm(&img)).unwrap();
    let o = ok(
        d.path(),
        &[
            "mask-stats",
            "photo.pgm",
            "--edges",
            "--mask-out",
            "out.pbm",
        ],
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["components"], 1);
    assert!(v["area_ratio"].as_f64().unwrap() > 0.0);
    let mask = pnm::read_mask(&std::fs::read(d.path().join("out.pbm")).unwrap()).unwrap();
    assert_eq!((mask.width(), mask.height()), (120, 90));
    ok(d.path(), &["mask-stats", "photo.pgm", "--edges", "--night"]);
    assert_eq!(
        pothole(d.path(), &["mask-stats", "photo.pgm", "--night"])
            .status
            .code(),
        Some(2)
    );

    std::fs::write(
        d.path().join("m.pbm"),
        pnm::write_pbm(&disk_mask(100, 80, 20.0)),
    )
    .unwrap();
    let quad = "0,0,99,0,99,79,0,79";
    let plain: serde_json::Value =
        serde_json::from_str(&stdout(&ok(d.path(), &["mask-stats", "m.pbm"]))).unwrap();
    let rect: serde_json::Value = serde_json::from_str(&stdout(&ok(
        d.path(),
        &[
            "mask-stats",
            "m.pbm",
            "--rectify-src",
            quad,
            "--rectify-dst",
            quad,
        ],
    )))
    .unwrap();
    assert_eq!(plain["area_ratio"], rect["area_ratio"]);
    let half = "0,0,49,0,49,39,0,39";
    let o = ok(
        d.path(),
        &[
            "mask-stats",
            "m.pbm",
            "--rectify-src",
            quad,
            "--rectify-dst",
            half,
            "--out-size",
            "50x40",
        ],
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(
        (v["area_ratio"].as_f64().unwrap() - plain["area_ratio"].as_f64().unwrap()).abs() < 0.02
    );
    let degenerate = "0,0,1,1,2,2,3,3";
    assert_eq!(
        pothole(
            d.path(),
            &[
                "mask-stats",
                "m.pbm",
                "--rectify-src",
                degenerate,
                "--rectify-dst",
                quad
            ]
        )
        .status
        .code(),
        Some(1)
    );
}
