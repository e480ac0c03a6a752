//! Binary PGM ("P5") frames, 8 or 16 bits per sample.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::plane::Plane;

/// A decoded PGM image with its declared maximum value.
#[derive(Debug, Clone, PartialEq)]
pub struct PgmImage {
    pub plane: Plane,
    pub maxval: u16,
}

struct Header {
    width: usize,
    height: usize,
    maxval: u16,
    data_offset: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(Error::Format("not a binary PGM (missing P5 magic)".into()));
    }
    let mut pos = 2;
    let mut fields = [0u64; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while let Some(&b) = bytes.get(pos) {
                        pos += 1;
                        if b == b'\n' || b == b'\r' {
                            break;
                        }
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("malformed PGM header".into()));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format("PGM header value out of range".into()))?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::Format("PGM header must end in whitespace".into())),
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(Error::Format("PGM dimensions must be positive".into()));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("PGM maxval {maxval} out of range")));
    }
    Ok(Header {
        width: width as usize,
        height: height as usize,
        maxval: maxval as u16,
        data_offset: pos,
    })
}

/// Decodes a P5 image. 16-bit samples are big-endian.
pub fn decode_pgm(bytes: &[u8]) -> Result<PgmImage> {
    let h = parse_header(bytes)?;
    let n = h.width * h.height;
    let bytes_per_sample = if h.maxval < 256 { 1 } else { 2 };
    let payload = &bytes[h.data_offset..];
    if payload.len() < n * bytes_per_sample {
        return Err(Error::Format(format!(
            "PGM payload has {} bytes, expected {}",
            payload.len(),
            n * bytes_per_sample
        )));
    }
    let samples: Vec<u16> = if bytes_per_sample == 1 {
        payload[..n].iter().map(|&b| b as u16).collect()
    } else {
        payload[..2 * n]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    };
    if let Some(s) = samples.iter().find(|&&s| s > h.maxval) {
        return Err(Error::Format(format!(
            "PGM sample {s} exceeds maxval {}",
            h.maxval
        )));
    }
    let plane = Plane::new(h.width, h.height, samples.into_iter().map(f64::from).collect())?;
    Ok(PgmImage {
        plane,
        maxval: h.maxval,
    })
}

pub fn read_pgm(mut reader: impl Read) -> Result<PgmImage> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    decode_pgm(&bytes)
}

/// Encodes a plane as P5, rounding and clamping samples into `[0, maxval]`.
pub fn encode_pgm(plane: &Plane, maxval: u16) -> Result<Vec<u8>> {
    if maxval == 0 {
        return Err(Error::Parameter("PGM maxval must be positive".into()));
    }
    let mut out = format!("P5\n{} {}\n{}\n", plane.width(), plane.height(), maxval).into_bytes();
    let quantize = |v: f64| v.round().clamp(0.0, maxval as f64) as u16;
    if maxval < 256 {
        out.extend(plane.as_slice().iter().map(|&v| quantize(v) as u8));
    } else {
        for &v in plane.as_slice() {
            out.extend_from_slice(&quantize(v).to_be_bytes());
        }
    }
    Ok(out)
}

pub fn write_pgm(mut writer: impl Write, plane: &Plane, maxval: u16) -> Result<()> {
    writer.write_all(&encode_pgm(plane, maxval)?)?;
    Ok(())
}
