//! Movie, flow-field, and image persistence.

pub mod cafl;
pub mod pgm;
pub mod ppm;

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::flow::FlowSequence;
use crate::movie::{Calibration, MovieStack};
use crate::plane::Plane;

pub use cafl::{read_flow_field, write_flow_field};
pub use pgm::{decode_pgm, encode_pgm, PgmImage};
pub use ppm::{sidecar_path, write_ppm_with_sidecar, RgbImage};

pub const CALIBRATION_FILE: &str = "calibration.txt";

/// Parses `key=value` calibration lines. Blank lines and `#` comments are
/// ignored, as are unknown keys.
pub fn parse_calibration(text: &str) -> Result<Calibration> {
    let mut rate = None;
    let mut mpp = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Calibration(format!("expected key=value, got {line:?}")))?;
        let parse = || {
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Calibration(format!("bad number for {}: {value:?}", key.trim())))
        };
        match key.trim() {
            "frame_rate_hz" => rate = Some(parse()?),
            "microns_per_pixel" => mpp = Some(parse()?),
            _ => {}
        }
    }
    let rate = rate.ok_or_else(|| Error::Calibration("missing frame_rate_hz".into()))?;
    let mpp = mpp.ok_or_else(|| Error::Calibration("missing microns_per_pixel".into()))?;
    Calibration::new(rate, mpp)
}

pub fn format_calibration(cal: &Calibration) -> String {
    format!(
        "frame_rate_hz={}\nmicrons_per_pixel={}\n",
        cal.frame_rate_hz, cal.microns_per_pixel
    )
}

fn frame_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix("frame_")?.strip_suffix(".pgm")?;
    if digits.len() == 6 && digits.bytes().all(|b| b.is_ascii_digit()) {
        digits.parse().ok()
    } else {
        None
    }
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:06}.pgm")
}

/// Loads `frame_NNNNNN.pgm` files plus `calibration.txt` from a directory.
pub fn load_movie(dir: impl AsRef<Path>) -> Result<MovieStack> {
    let dir = dir.as_ref();
    let cal_path = dir.join(CALIBRATION_FILE);
    let cal_text = fs::read_to_string(&cal_path).map_err(|e| {
        Error::Calibration(format!("cannot read {}: {e}", cal_path.display()))
    })?;
    let calibration = parse_calibration(&cal_text)?;

    let mut indexed = vec![];
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        if let Some(idx) = entry.file_name().to_str().and_then(frame_index) {
            indexed.push((idx, entry.path()));
        }
    }
    indexed.sort();
    if indexed.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} holds {} frame(s), need at least 2",
            dir.display(),
            indexed.len()
        )));
    }
    let mut frames: Vec<Plane> = Vec::with_capacity(indexed.len());
    for (_, path) in &indexed {
        let img = pgm::read_pgm(BufReader::new(fs::File::open(path)?))
            .map_err(|e| match e {
                Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
                other => other,
            })?;
        frames.push(img.plane);
    }
    let (w, h) = (frames[0].width(), frames[0].height());
    MovieStack::new(w, h, frames, calibration)
}

/// Writes a movie as PGM frames plus calibration sidecar. Samples are
/// rounded and clamped to `[0, maxval]`; 8-bit output is used when every
/// rounded sample fits, 16-bit otherwise.
pub fn write_movie(movie: &MovieStack, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let peak = (0..movie.frame_count())
        .flat_map(|t| movie.frame(t).iter().copied())
        .fold(0.0f64, f64::max)
        .round();
    let maxval: u16 = if peak <= 255.0 { 255 } else { 65535 };
    for (t, frame) in movie.frames().enumerate() {
        fs::write(dir.join(frame_file_name(t)), encode_pgm(&frame, maxval)?)?;
    }
    fs::write(
        dir.join(CALIBRATION_FILE),
        format_calibration(&movie.calibration()),
    )?;
    Ok(())
}

pub const CSV_HEADER: &str = "t_index,x,y,u_px_per_frame,v_px_per_frame,lambda_min,lambda_max";

/// Writes one row per reliable vector, ordered by pair, then row, then column.
pub fn write_csv(mut writer: impl Write, sequence: &FlowSequence, threshold: f64) -> Result<usize> {
    writeln!(writer, "{CSV_HEADER}")?;
    let mut rows = 0;
    for field in sequence.fields() {
        for y in 0..field.height() {
            for x in 0..field.width() {
                if field.is_reliable(x, y, threshold) {
                    let s = field.sample(x, y);
                    writeln!(
                        writer,
                        "{},{},{},{},{},{},{}",
                        field.t_index(),
                        x,
                        y,
                        s.u,
                        s.v,
                        s.lambda_min,
                        s.lambda_max
                    )?;
                    rows += 1;
                }
            }
        }
    }
    writer.flush()?;
    Ok(rows)
}

pub fn export_csv(sequence: &FlowSequence, threshold: f64, path: impl AsRef<Path>) -> Result<usize> {
    write_csv(BufWriter::new(fs::File::create(path)?), sequence, threshold)
}

pub fn save_flow_field(sequence: &FlowSequence, path: impl AsRef<Path>) -> Result<()> {
    write_flow_field(BufWriter::new(fs::File::create(path)?), sequence)
}

pub fn load_flow_field(path: impl AsRef<Path>) -> Result<FlowSequence> {
    read_flow_field(BufReader::new(fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_parsing() {
        let c = parse_calibration("# rig 2\nframe_rate_hz = 8\n\nmicrons_per_pixel=1.3\nbinning=2\n")
            .unwrap();
        assert_eq!((c.frame_rate_hz, c.microns_per_pixel), (8.0, 1.3));
        assert!(matches!(
            parse_calibration("frame_rate_hz=8\n"),
            Err(Error::Calibration(_))
        ));
        assert!(matches!(
            parse_calibration("frame_rate_hz=abc\nmicrons_per_pixel=1\n"),
            Err(Error::Calibration(_))
        ));
        assert!(matches!(
            parse_calibration("frame_rate_hz=-8\nmicrons_per_pixel=1\n"),
            Err(Error::Calibration(_))
        ));
    }

    #[test]
    fn frame_names() {
        assert_eq!(frame_index("frame_000012.pgm"), Some(12));
        assert_eq!(frame_index("frame_12.pgm"), None);
        assert_eq!(frame_index("frame_000012.ppm"), None);
        assert_eq!(frame_file_name(7), "frame_000007.pgm");
    }
}
