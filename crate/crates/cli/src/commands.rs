use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use calflow::analysis::render::{contour_color, render_lambda_min, render_match};
use calflow::analysis::roi::{default_edges, histogram, reliable_speeds, roi_stats, DEFAULT_BIN_COUNT};
use calflow::analysis::{clifford_match, didt_render, temporal_composite, trace_paths, RegionOfInterest, VectorKernel};
use calflow::flow::mask::mask_sweep as sweep;
use calflow::io::{export_csv, load_flow_field, load_movie, save_flow_field, write_movie, write_ppm_with_sidecar};
use calflow::presets::PresetName;
use calflow::synth::{generate, ground_truth_flow, SynthKind, SynthSpec};
use calflow::{compute_flow_field, Calibration, FlowParams, FlowSequence};

use crate::parse::{parse_indices, parse_list, parse_pair, parse_roi, parse_seeds, parse_triple};
use crate::{
    CompositeArgs, DidtArgs, FlowArgs, HistArgs, InfoArgs, Kind, MatchArgs, RoiArgs, StatsArgs,
    SweepArgs, SynthArgs, TraceArgs,
};

fn load_flow(path: &Path) -> Result<FlowSequence> {
    load_flow_field(path).with_context(|| format!("reading flow file {}", path.display()))
}

/// Short decimal form for human-facing header lines.
fn short(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn short6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s.trim_start_matches('-').trim_matches(|c| c == '0' || c == '.').is_empty() {
        "0".into()
    } else {
        s
    }
}

pub fn flow(a: &FlowArgs, out: &mut dyn Write) -> Result<()> {
    let movie = load_movie(&a.movie).with_context(|| format!("loading {}", a.movie.display()))?;
    let cal = movie.calibration();
    let (window, default_tau) = match (&a.preset, a.window) {
        (Some(name), None) => {
            let p = name.parse::<PresetName>()?.preset();
            if (p.frame_rate_hz - cal.frame_rate_hz).abs() > 1e-9 * p.frame_rate_hz {
                eprintln!(
                    "warning: preset {} assumes {} Hz but the movie calibration says {} Hz; keeping the calibration",
                    p.name, p.frame_rate_hz, cal.frame_rate_hz
                );
            }
            (p.window_width, p.eigenvalue_threshold)
        }
        (None, Some(w)) => (w, 0.0),
        (Some(_), Some(_)) => bail!("--window and --preset are mutually exclusive"),
        (None, None) => bail!("either --window or --preset is required"),
    };
    let tau = a.threshold.unwrap_or(default_tau);
    let params = FlowParams::new(window, tau, a.pre_smooth)?;
    let seq = compute_flow_field(&movie, &params)?;
    save_flow_field(&seq, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    if let Some(csv) = &a.csv {
        export_csv(&seq, tau, csv)?;
    }
    let v = seq.valid_region();
    writeln!(
        out,
        "# movie {}x{} frames={} frame_rate_hz={} microns_per_pixel={}",
        movie.width(),
        movie.height(),
        movie.frame_count(),
        cal.frame_rate_hz,
        cal.microns_per_pixel
    )?;
    writeln!(out, "# window={window} threshold={tau} pre_smooth={}", a.pre_smooth)?;
    writeln!(out, "# valid_region x0={} y0={} width={} height={}", v.x0, v.y0, v.width, v.height)?;
    writeln!(out, "pair,reliable")?;
    for (k, f) in seq.fields().iter().enumerate() {
        writeln!(out, "{k},{}", f.reliable_count(tau))?;
    }
    Ok(())
}

pub fn mask_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    let seq = load_flow(&a.flow)?;
    let taus = parse_list(&a.taus)?;
    let rows = sweep(&seq, &taus)?;
    fs::create_dir_all(&a.out)?;
    let mut csv = String::from("threshold,pair,count\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{}\n", r.threshold, r.pair, r.count));
    }
    fs::write(a.out.join("sweep.csv"), &csv)?;
    out.write_all(csv.as_bytes())?;

    let n = seq.pair_count();
    let mut pairs = match &a.pairs {
        Some(text) => parse_indices(text)?,
        None => vec![0, n / 2, n - 1],
    };
    pairs.sort_unstable();
    pairs.dedup();
    for k in pairs {
        let Some(field) = seq.fields().get(k) else {
            bail!("pair {k} out of range for {n} pairs");
        };
        let img = render_lambda_min(field, &taus);
        let max = field.lambda_min().iter().copied().fold(0.0f64, f64::max);
        let mut meta = vec![
            "kind=lambda_min".to_string(),
            "colormap=gray_sqrt".to_string(),
            format!("pair={k}"),
            "scale_min=0".to_string(),
            format!("scale_max={max}"),
        ];
        for (i, t) in taus.iter().enumerate() {
            let c = contour_color(i, taus.len());
            meta.push(format!("contour threshold={t} rgb={},{},{}", c[0], c[1], c[2]));
        }
        write_ppm_with_sidecar(&a.out.join(format!("lambda_min_pair_{k:04}.ppm")), &img, &meta)?;
    }
    Ok(())
}

fn resolve_roi(args: &RoiArgs, seq: &FlowSequence) -> Result<RegionOfInterest> {
    let [x, y, w, h] = match &args.roi {
        Some(text) => parse_roi(text)?,
        None => [0, 0, seq.width(), seq.height()],
    };
    let roi = RegionOfInterest::new(x, y, w, h)?;
    roi.check_within(seq.width(), seq.height())?;
    Ok(roi)
}

fn roi_header(out: &mut dyn Write, roi: &RegionOfInterest, cal: &Calibration, tau: f64, n: usize) -> Result<()> {
    let (wu, hu) = roi.extent_um(cal);
    writeln!(
        out,
        "# roi x={} y={} width={} height={} ({} x {} um)",
        roi.x0,
        roi.y0,
        roi.width,
        roi.height,
        short(wu),
        short(hu)
    )?;
    writeln!(out, "# threshold={tau} reliable_vectors={n}")?;
    Ok(())
}

fn with_output(path: Option<&Path>, out: &mut dyn Write, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut buf = Vec::new();
            body(&mut buf)?;
            fs::write(p, buf).with_context(|| format!("writing {}", p.display()))
        }
        None => body(out),
    }
}

pub fn hist(a: &HistArgs, out: &mut dyn Write) -> Result<()> {
    let seq = load_flow(&a.flow)?;
    let cal = seq.calibration();
    let roi = resolve_roi(&a.roi, &seq)?;
    let speeds = reliable_speeds(&seq, &roi, a.roi.threshold, &cal)?;
    let edges = match &a.edges {
        Some(text) => parse_list(text)?,
        None => default_edges(&speeds, a.bins.unwrap_or(DEFAULT_BIN_COUNT)),
    };
    let h = histogram(&speeds, &edges)?;
    with_output(a.roi.out.as_deref(), out, |w| {
        roi_header(w, &roi, &cal, a.roi.threshold, speeds.len())?;
        writeln!(w, "bin_lo_um_per_s,bin_hi_um_per_s,count")?;
        if h.total > 0 {
            for (i, c) in h.counts.iter().enumerate() {
                writeln!(w, "{},{},{c}", h.bin_edges[i], h.bin_edges[i + 1])?;
            }
        }
        Ok(())
    })
}

pub fn stats(a: &StatsArgs, out: &mut dyn Write) -> Result<()> {
    let seq = load_flow(&a.flow)?;
    let cal = seq.calibration();
    let roi = resolve_roi(&a.roi, &seq)?;
    let s = roi_stats(&seq, &roi, a.roi.threshold, &cal)?;
    with_output(a.roi.out.as_deref(), out, |w| {
        roi_header(w, &roi, &cal, a.roi.threshold, s.count)?;
        writeln!(w, "count,mean_speed_um_per_s,std_speed_um_per_s,mean_direction_deg")?;
        if !s.is_empty() {
            writeln!(w, "{},{},{},{}", s.count, s.mean_speed, s.std_speed, s.mean_direction_deg)?;
        }
        Ok(())
    })
}

pub fn composite(a: &CompositeArgs, out: &mut dyn Write) -> Result<()> {
    let seq = load_flow(&a.flow)?;
    let c = temporal_composite(&seq, a.threshold, a.stride, a.gain)?;
    write_ppm_with_sidecar(&a.out, &c.image, &c.sidecar_lines())?;
    let active = c.earliest.iter().filter(|e| e.is_some()).count();
    writeln!(out, "pixels_with_reliable_vectors={active}")?;
    writeln!(out, "time_max_s={}", c.legend.time_max_s)?;
    Ok(())
}

pub fn trace(a: &TraceArgs, out: &mut dyn Write) -> Result<()> {
    let seq = load_flow(&a.flow)?;
    let cal = seq.calibration();
    let seeds = parse_seeds(&a.seeds)?;
    let traces = trace_paths(&seq, &seeds, a.threshold, &cal)?;
    writeln!(
        out,
        "seed_x,seed_y,steps,dx_um,dy_um,displacement_um,path_length_um,termination"
    )?;
    for t in &traces {
        let (dx, dy) = t.displacement_px();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            t.seed.0,
            t.seed.1,
            t.points.len() - 1,
            dx * cal.microns_per_pixel,
            dy * cal.microns_per_pixel,
            t.displacement_um(&cal),
            t.path_length_um(&cal),
            t.termination.as_str()
        )?;
    }
    if let Some(path) = &a.out {
        let mut csv = String::from("seed,t_s,x,y\n");
        for (i, t) in traces.iter().enumerate() {
            for p in &t.points {
                csv.push_str(&format!("{i},{},{},{}\n", p.t_seconds, p.x, p.y));
            }
        }
        fs::write(path, csv)?;
    }
    Ok(())
}

pub fn matching(a: &MatchArgs, out: &mut dyn Write) -> Result<()> {
    let seq = load_flow(&a.flow)?;
    let kernel = match (&a.kernel, a.divergence, a.curl) {
        (Some(path), None, None) => {
            let k = load_flow(path)?;
            if k.pair_count() != 1 {
                bail!("kernel file must hold a single pair, found {}", k.pair_count());
            }
            VectorKernel::from_flow_field(&k.fields()[0])?
        }
        (None, Some(n), None) => VectorKernel::divergence(n)?,
        (None, None, Some(n)) => VectorKernel::curl(n)?,
        _ => bail!("give exactly one of --kernel, --divergence or --curl"),
    };
    let pairs = match &a.pairs {
        Some(text) => parse_indices(text)?,
        None => (0..seq.pair_count()).collect(),
    };
    let mut rows = vec![];
    let mut first_map = None;
    for &k in &pairs {
        let Some(field) = seq.fields().get(k) else {
            bail!("pair {k} out of range for {} pairs", seq.pair_count());
        };
        let map = clifford_match(field, &kernel, a.threshold)?;
        rows.push((k, map.argmax()));
        first_map.get_or_insert(map);
    }
    let best = rows
        .iter()
        .filter_map(|(k, m)| m.map(|(x, y, v)| (*k, x, y, v)))
        .fold(None, |acc: Option<(usize, usize, usize, f64)>, r| match acc {
            Some(b) if b.3 >= r.3 => Some(b),
            _ => Some(r),
        });
    writeln!(out, "# kernel {}x{} threshold={}", kernel.width(), kernel.height(), a.threshold)?;
    match best {
        Some((k, x, y, v)) => writeln!(out, "# argmax pair={k} x={x} y={y} response={v}")?,
        None => writeln!(out, "# argmax none")?,
    }
    writeln!(out, "pair,x,y,response")?;
    for (k, m) in &rows {
        match m {
            Some((x, y, v)) => writeln!(out, "{k},{x},{y},{v}")?,
            None => writeln!(out, "{k},,,")?,
        }
    }
    if let (Some(path), Some(map)) = (&a.out, first_map) {
        let meta = vec![
            "kind=match".to_string(),
            "colormap=diverging_blue_white_red".to_string(),
            "scale_min=-1".to_string(),
            "scale_max=1".to_string(),
            format!("pair={}", pairs[0]),
            format!("kernel={}x{}", kernel.width(), kernel.height()),
        ];
        write_ppm_with_sidecar(path, &render_match(&map), &meta)?;
    }
    Ok(())
}

fn synth_spec(a: &SynthArgs) -> Result<SynthSpec> {
    let center = match &a.center {
        Some(text) => parse_pair(text)?,
        None => (a.width as f64 / 2.0, a.height as f64 / 2.0),
    };
    let kind = match a.kind {
        Kind::Constant => SynthKind::Constant { level: a.level },
        Kind::Blob => SynthKind::TranslatingBlob {
            center,
            sigma: a.sigma,
            amplitude: a.amplitude,
            velocity: parse_pair(&a.velocity)?,
            background: a.background,
        },
        Kind::Ramp => {
            let (ra, rb, rc) = parse_triple(&a.ramp)?;
            SynthKind::SpaceTimeRamp { a: ra, b: rb, c: rc }
        }
        Kind::Wave => SynthKind::RadialWave {
            origin: center,
            speed: a.speed,
            width: a.annulus,
            amplitude: a.amplitude,
            background: a.background,
        },
    };
    let spec = SynthSpec {
        kind,
        width: a.width,
        height: a.height,
        frame_count: a.frames,
        calibration: Calibration::new(a.fps, a.mpp)?,
        noise_sigma: a.noise,
        seed: a.seed,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn synth(a: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    let spec = synth_spec(a)?;
    let movie = generate(&spec)?;
    let clipped = (0..movie.frame_count())
        .flat_map(|t| movie.frame(t).iter())
        .filter(|&&v| !(0.0..=65535.0).contains(&v.round()))
        .count();
    if clipped > 0 {
        eprintln!("warning: {clipped} samples fall outside [0, 65535] and are clipped on disk");
    }
    write_movie(&movie, &a.out).with_context(|| format!("writing {}", a.out.display()))?;
    writeln!(
        out,
        "# {:?} {}x{} frames={} frame_rate_hz={} microns_per_pixel={} noise={} seed={}",
        a.kind, a.width, a.height, a.frames, a.fps, a.mpp, a.noise, a.seed
    )?;
    if a.kind == Kind::Constant {
        writeln!(out, "# no motion")?;
        return Ok(());
    }
    writeln!(out, "pair,support,mean_u_px_per_frame,mean_v_px_per_frame,ambiguous")?;
    for t in 0..a.frames - 1 {
        let truth = ground_truth_flow(&spec, t)?;
        let n = truth.support_count();
        let (su, sv) = (0..truth.u.len())
            .filter(|&i| truth.support[i])
            .fold((0.0, 0.0), |(x, y), i| (x + truth.u[i], y + truth.v[i]));
        let (mu, mv) = if n > 0 { (su / n as f64, sv / n as f64) } else { (f64::NAN, f64::NAN) };
        writeln!(out, "{t},{n},{},{},{}", short6(mu), short6(mv), truth.ambiguous)?;
    }
    Ok(())
}

pub fn didt(a: &DidtArgs, out: &mut dyn Write) -> Result<()> {
    let movie = load_movie(&a.movie)?;
    let r = didt_render(&movie, a.pair)?;
    write_ppm_with_sidecar(&a.out, &r.image, &r.sidecar_lines())?;
    writeln!(out, "scale_limit_intensity_per_s={}", r.limit)?;
    Ok(())
}

pub fn info(a: &InfoArgs, out: &mut dyn Write) -> Result<()> {
    if a.path.is_dir() {
        let m = load_movie(&a.path)?;
        let cal = m.calibration();
        let (lo, hi) = (0..m.frame_count())
            .flat_map(|t| m.frame(t).iter().copied())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        writeln!(out, "# movie {}x{} frames={}", m.width(), m.height(), m.frame_count())?;
        writeln!(out, "# frame_rate_hz={} microns_per_pixel={}", cal.frame_rate_hz, cal.microns_per_pixel)?;
        writeln!(out, "# intensity_min={lo} intensity_max={hi}")?;
    } else {
        let seq = load_flow(&a.path)?;
        let cal = seq.calibration();
        let v = seq.valid_region();
        writeln!(out, "# flow {}x{} pairs={} window={}", seq.width(), seq.height(), seq.pair_count(), seq.window_width())?;
        writeln!(out, "# valid_region x0={} y0={} width={} height={}", v.x0, v.y0, v.width, v.height)?;
        writeln!(out, "# frame_rate_hz={} microns_per_pixel={}", cal.frame_rate_hz, cal.microns_per_pixel)?;
        writeln!(out, "pair,reliable")?;
        for (k, f) in seq.fields().iter().enumerate() {
            writeln!(out, "{k},{}", f.reliable_count(a.threshold))?;
        }
    }
    Ok(())
}
