use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use calflow::flow::FlowSample;
use calflow::io::save_flow_field;
use calflow::{Calibration, FlowField, FlowSequence, Rect};

fn calflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_calflow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = calflow(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Data rows of a CSV on stdout: lines after the first non-comment line.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn synth_blob(dir: &Path, extra: &[&str]) {
    let mut args = vec![
        "synth", "--kind", "blob", "--width", "48", "--height", "48",
        "--center", "20,20", "--sigma", "3", "--out", p(dir),
    ];
    if !extra.contains(&"--frames") {
        args.extend_from_slice(&["--frames", "4"]);
    }
    args.extend_from_slice(extra);
    ok(&args);
}

#[test]
fn even_window_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let movie = tmp.path().join("m");
    synth_blob(&movie, &[]);
    let out = calflow(&["flow", p(&movie), "--window", "8", "--out", p(&tmp.path().join("f.cafl"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("odd"));
    assert!(!tmp.path().join("f.cafl").exists());
}

#[test]
fn window_or_preset_is_required_and_exclusive() {
    let tmp = tempfile::tempdir().unwrap();
    let movie = tmp.path().join("m");
    synth_blob(&movie, &[]);
    let f = tmp.path().join("f.cafl");
    assert!(!calflow(&["flow", p(&movie), "--out", p(&f)]).status.success());
    assert!(!calflow(&["flow", p(&movie), "--window", "9", "--preset", "astrocyte", "--out", p(&f)])
        .status
        .success());
    assert!(!calflow(&["flow", p(&movie), "--preset", "glia", "--out", p(&f)]).status.success());
}

#[test]
fn preset_sets_window_and_reporting_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    let movie = tmp.path().join("m");
    synth_blob(&movie, &[]);
    let f = tmp.path().join("f.cafl");
    let out = calflow(&["flow", p(&movie), "--preset", "astrocyte", "--out", p(&f)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("window=9 threshold=1.4"), "{text}");
    // astrocyte rate matches the 8 Hz sidecar: no warning
    assert!(!String::from_utf8_lossy(&out.stderr).contains("warning"));
    let info = ok(&["info", p(&f), "--threshold", "1.4"]);
    assert!(info.contains("window=9"));
    assert_eq!(rows(&info), rows(&text));

    let out = calflow(&["flow", p(&movie), "--preset", "rmc1", "--out", p(&f)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("16.4 Hz"));
    assert!(ok(&["info", p(&f)]).contains("frame_rate_hz=8 "));
}

#[test]
fn noiseless_blob_has_reliable_vectors_with_expected_velocity() {
    let tmp = tempfile::tempdir().unwrap();
    let movie = tmp.path().join("m");
    synth_blob(&movie, &["--velocity", "0.5,0"]);
    let f = tmp.path().join("f.cafl");
    let csv = tmp.path().join("v.csv");
    let text = ok(&["flow", p(&movie), "--window", "11", "--threshold", "0", "--out", p(&f), "--csv", p(&csv)]);
    assert!(text.contains("# valid_region x0=5 y0=5 width=37 height=37"));
    let counts: Vec<usize> = rows(&text).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(counts.len(), 3);
    assert!(counts.iter().all(|&c| c > 0));

    // vectors near the blob center
    let body = fs::read_to_string(&csv).unwrap();
    let mut us: Vec<f64> = body
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|s| s.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .filter(|r| (r[1] - 20.5).abs() <= 2.0 && (r[2] - 19.5).abs() <= 2.0)
        .map(|r| r[3])
        .collect();
    us.sort_by(f64::total_cmp);
    assert!((us[us.len() / 2] - 0.5).abs() < 0.02, "{:?}", us[us.len() / 2]);
}

#[test]
fn sweep_counts_and_images() {
    let tmp = tempfile::tempdir().unwrap();
    let movie = tmp.path().join("m");
    synth_blob(&movie, &["--frames", "5"]);
    let f = tmp.path().join("f.cafl");
    ok(&["flow", p(&movie), "--window", "7", "--out", p(&f)]);
    let dir = tmp.path().join("sweep");
    let text = ok(&["mask-sweep", p(&f), "--taus", "0,0.1,0.5,1", "--out", p(&dir)]);
    assert_eq!(fs::read_to_string(dir.join("sweep.csv")).unwrap(), text);
    let r = rows(&text);
    assert_eq!(r.len(), 16);
    for pair in 0..4 {
        let counts: Vec<usize> = r
            .iter()
            .filter(|row| row[1] == pair.to_string())
            .map(|row| row[2].parse().unwrap())
            .collect();
        assert!(counts.windows(2).all(|c| c[1] <= c[0]), "{counts:?}");
    }
    for k in [0, 2, 3] {
        let img = dir.join(format!("lambda_min_pair_{k:04}.ppm"));
        assert!(fs::read(&img).unwrap().starts_with(b"P6\n48 48\n255\n"));
        assert!(fs::read_to_string(dir.join(format!("lambda_min_pair_{k:04}.ppm.meta.txt")))
            .unwrap()
            .contains("contour threshold=0.5"));
    }
    assert!(!calflow(&["mask-sweep", p(&f), "--taus", "5,1", "--out", p(&dir)]).status.success());
}

#[test]
fn sweep_on_constant_movie_counts_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let movie = tmp.path().join("m");
    ok(&["synth", "--kind", "constant", "--width", "16", "--height", "16", "--frames", "3", "--out", p(&movie)]);
    let f = tmp.path().join("f.cafl");
    ok(&["flow", p(&movie), "--window", "5", "--out", p(&f)]);
    let text = ok(&["mask-sweep", p(&f), "--taus", "0", "--out", p(&tmp.path().join("s"))]);
    assert!(rows(&text).iter().all(|r| r[2] == "0"));
}

#[test]
fn noise_inflates_background_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let (clean, noisy) = (tmp.path().join("clean"), tmp.path().join("noisy"));
    synth_blob(&clean, &[]);
    synth_blob(&noisy, &["--noise", "2", "--seed", "4"]);
    let count = |movie: &Path| {
        let f = movie.with_extension("cafl");
        ok(&["flow", p(movie), "--window", "5", "--out", p(&f)]);
        // corner far from the blob
        let text = ok(&["stats", p(&f), "--roi", "34,34,10,10", "--threshold", "0.5"]);
        let line = text.lines().find(|l| l.starts_with("# threshold")).unwrap().to_string();
        line.rsplit('=').next().unwrap().parse::<usize>().unwrap()
    };
    let (c, n) = (count(&clean), count(&noisy));
    assert!(n >= c);
    assert!(n > 0);
}

fn uniform_flow(path: &Path, pairs: usize, u: f64, v: f64) {
    let cal = Calibration::new(8.0, 1.3).unwrap();
    let fields = (0..pairs)
        .map(|t| {
            FlowField::from_fn(40, 40, Rect::new(2, 2, 36, 36), t, |_, _| FlowSample {
                u,
                v,
                lambda_min: 3.0,
                lambda_max: 4.0,
            })
            .unwrap()
        })
        .collect();
    save_flow_field(&FlowSequence::new(cal, fields).unwrap(), path).unwrap();
}

#[test]
fn hist_and_stats_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("u.cafl");
    uniform_flow(&f, 2, 0.6, 0.8);
    let text = ok(&["hist", p(&f), "--roi", "0,0,10,10", "--threshold", "1", "--edges", "0,5,10,15,20"]);
    assert!(text.starts_with("# roi x=0 y=0 width=10 height=10 (13 x 13 um)\n"));
    // 8 x 8 valid pixels inside the ROI, two pairs
    assert_eq!(
        rows(&text),
        vec![
            vec!["0", "5", "0"],
            vec!["5", "10", "0"],
            vec!["10", "15", "128"],
            vec!["15", "20", "0"],
        ]
    );
    let stats = ok(&["stats", p(&f), "--roi", "0,0,10,10", "--threshold", "1"]);
    let r = &rows(&stats)[0];
    assert_eq!(r[0], "128");
    // vectors are stored as f32
    assert!((r[1].parse::<f64>().unwrap() - 10.4).abs() < 1e-5);
    assert!(r[2].parse::<f64>().unwrap() < 1e-5);

    // everything masked: header only
    let empty = ok(&["hist", p(&f), "--threshold", "5"]);
    assert!(rows(&empty).is_empty());
    assert_eq!(empty.lines().last().unwrap(), "bin_lo_um_per_s,bin_hi_um_per_s,count");
    let empty = ok(&["stats", p(&f), "--threshold", "5"]);
    assert!(rows(&empty).is_empty());

    let out = tmp.path().join("h.csv");
    ok(&["hist", p(&f), "--bins", "4", "--out", p(&out)]);
    assert_eq!(rows(&fs::read_to_string(&out).unwrap()).len(), 4);
    assert!(!calflow(&["hist", p(&f), "--roi", "35,35,10,10"]).status.success());
    assert!(!calflow(&["hist", p(&f), "--roi", "1,2,3"]).status.success());
}

#[test]
fn estimated_translation_occupies_one_bin() {
    let tmp = tempfile::tempdir().unwrap();
    let movie = tmp.path().join("m");
    synth_blob(&movie, &["--velocity", "0.6,0.8"]);
    let f = tmp.path().join("f.cafl");
    ok(&["flow", p(&movie), "--window", "11", "--out", p(&f)]);
    let text = ok(&["hist", p(&f), "--threshold", "0.1", "--edges", "0,4,8,12,16,20"]);
    let occupied: Vec<_> = rows(&text).into_iter().filter(|r| r[2] != "0").collect();
    assert_eq!(occupied.len(), 1, "{text}");
    assert_eq!(occupied[0][0], "8");
}

#[test]
fn trace_prints_exact_displacement() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("u.cafl");
    uniform_flow(&f, 6, 0.5, 0.0);
    let points = tmp.path().join("pts.csv");
    let text = ok(&["trace", p(&f), "--seeds", "10,10;12,20", "--threshold", "1", "--out", p(&points)]);
    let r = rows(&text);
    assert_eq!(r.len(), 2);
    for row in &r {
        // 0.5 px/frame * 8 Hz * 1.3 um/px = 5.2 um/s for 6 pairs of 0.125 s
        assert!((row[5].parse::<f64>().unwrap() - 3.9).abs() < 1e-9);
        assert_eq!(row[2], "6");
        assert_eq!(row[7], "end-of-movie");
    }
    assert_eq!(fs::read_to_string(points).unwrap().lines().count(), 1 + 2 * 7);
    assert!(!calflow(&["trace", p(&f), "--seeds", "0,0"]).status.success());
}

#[test]
fn composite_of_single_pair_has_one_legend_color() {
    let tmp = tempfile::tempdir().unwrap();
    let movie = tmp.path().join("m");
    synth_blob(&movie, &["--frames", "2"]);
    let f = tmp.path().join("f.cafl");
    ok(&["flow", p(&movie), "--window", "9", "--out", p(&f)]);
    let img = tmp.path().join("c.ppm");
    ok(&["composite", p(&f), "--threshold", "0.1", "--out", p(&img)]);
    let meta = fs::read_to_string(tmp.path().join("c.ppm.meta.txt")).unwrap();
    let entries: Vec<&str> = meta.lines().filter(|l| l.starts_with("pair=")).collect();
    assert_eq!(entries, vec!["pair=0 time_s=0 rgb=0,0,128"]);
    let bytes = fs::read(&img).unwrap();
    let pixels = &bytes[b"P6\n48 48\n255\n".len()..];
    let colors: std::collections::BTreeSet<&[u8]> =
        pixels.chunks(3).filter(|c| c != &[0, 0, 0]).collect();
    assert_eq!(colors.into_iter().collect::<Vec<_>>(), vec![&[0u8, 0, 128][..]]);
}

#[test]
fn divergence_match_finds_wave_origin() {
    let tmp = tempfile::tempdir().unwrap();
    let movie = tmp.path().join("w");
    ok(&["synth", "--kind", "wave", "--frames", "10", "--out", p(&movie)]);
    let f = tmp.path().join("w.cafl");
    ok(&["flow", p(&movie), "--window", "11", "--out", p(&f)]);
    let map = tmp.path().join("m.ppm");
    let text = ok(&["match", p(&f), "--divergence", "9", "--threshold", "0.08", "--pairs", "3", "--out", p(&map)]);
    let line = text.lines().find(|l| l.starts_with("# argmax")).unwrap();
    let get = |key: &str| -> f64 {
        line.split_whitespace()
            .find_map(|kv| kv.strip_prefix(key))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((get("x=") - 31.5).hypot(get("y=") - 31.5) <= 2.0, "{line}");
    assert!(fs::read_to_string(tmp.path().join("m.ppm.meta.txt")).unwrap().contains("scale_min=-1"));
}

#[test]
fn kernel_file_self_match() {
    let tmp = tempfile::tempdir().unwrap();
    let cal = Calibration::new(8.0, 1.3).unwrap();
    let k = FlowField::from_fn(5, 5, Rect::new(0, 0, 5, 5), 0, |x, y| FlowSample {
        u: x as f64 - 2.0,
        v: (y * y) as f64 * 0.1,
        lambda_min: 1.0,
        lambda_max: 1.0,
    })
    .unwrap();
    let kpath = tmp.path().join("k.cafl");
    save_flow_field(&FlowSequence::new(cal, vec![k.clone()]).unwrap(), &kpath).unwrap();
    let field = FlowField::from_fn(15, 15, Rect::new(1, 1, 13, 13), 0, |x, y| {
        let (i, j) = (x as i64 - 5, y as i64 - 6);
        let s = if (0..5).contains(&i) && (0..5).contains(&j) {
            k.sample(i as usize, j as usize)
        } else {
            FlowSample::MISSING
        };
        FlowSample { lambda_min: 2.0, lambda_max: 2.0, ..s }
    })
    .unwrap();
    let fpath = tmp.path().join("f.cafl");
    save_flow_field(&FlowSequence::new(cal, vec![field]).unwrap(), &fpath).unwrap();
    let text = ok(&["match", p(&fpath), "--kernel", p(&kpath), "--threshold", "1"]);
    let r = &rows(&text)[0];
    assert_eq!((r[1].as_str(), r[2].as_str()), ("7", "8"));
    assert!((r[3].parse::<f64>().unwrap() - 1.0).abs() < 1e-9);
    assert!(!calflow(&["match", p(&fpath), "--kernel", p(&kpath), "--divergence", "3"]).status.success());
}

#[test]
fn synth_is_reproducible_and_constant_frames_match() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        ok(&["synth", "--kind", "wave", "--noise", "3", "--seed", "17", "--frames", "3", "--out", p(d)]);
    }
    for name in ["frame_000000.pgm", "frame_000002.pgm", "calibration.txt"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
    }
    let c = tmp.path().join("c");
    let text = ok(&["synth", "--kind", "constant", "--level", "77", "--frames", "3", "--out", p(&c)]);
    assert!(text.contains("no motion"));
    let f0 = fs::read(c.join("frame_000000.pgm")).unwrap();
    assert_eq!(f0, fs::read(c.join("frame_000002.pgm")).unwrap());
    assert!(f0.ends_with(&[77]));

    let text = ok(&["synth", "--kind", "ramp", "--ramp", "2,0,-1", "--frames", "2", "--out", p(&tmp.path().join("r"))]);
    assert_eq!(rows(&text)[0][2..], ["0.500000".to_string(), "0".into(), "true".into()]);
    assert!(!calflow(&["synth", "--kind", "blob", "--frames", "1", "--out", p(&tmp.path().join("x"))]).status.success());
}

#[test]
fn info_and_didt() {
    let tmp = tempfile::tempdir().unwrap();
    let movie = tmp.path().join("m");
    synth_blob(&movie, &[]);
    let text = ok(&["info", p(&movie)]);
    assert!(text.starts_with("# movie 48x48 frames=4\n# frame_rate_hz=8 microns_per_pixel=1.3\n"));
    let img = tmp.path().join("d.ppm");
    ok(&["didt", p(&movie), "--pair", "1", "--out", p(&img)]);
    assert!(fs::read_to_string(tmp.path().join("d.ppm.meta.txt")).unwrap().contains("scale_max="));
    assert!(!calflow(&["didt", p(&movie), "--pair", "3", "--out", p(&img)]).status.success());
    assert!(!calflow(&["info", p(&tmp.path().join("missing.cafl"))]).status.success());
}

#[test]
fn job_count_does_not_change_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let movie = tmp.path().join("m");
    synth_blob(&movie, &["--noise", "1", "--seed", "9"]);
    let mut files = vec![];
    for jobs in ["1", "3"] {
        let f = tmp.path().join(format!("f{jobs}.cafl"));
        ok(&["--jobs", jobs, "flow", p(&movie), "--window", "7", "--out", p(&f)]);
        files.push(fs::read(f).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert!(!calflow(&["--jobs", "0", "info", p(&movie)]).status.success());
}
