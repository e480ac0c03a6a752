//! Binary PPM ("P6") images and their `.meta.txt` sidecars.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// 8-bit RGB raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, fill: [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&fill);
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = 3 * (y * self.width + x);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Sets a pixel given signed coordinates, ignoring anything off-canvas.
    pub fn put(&mut self, x: i64, y: i64, rgb: [u8; 3]) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.set(x as usize, y as usize, rgb);
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.data
    }

    /// RGBA bytes with opaque alpha, as used by canvas image data.
    pub fn to_rgba(&self) -> Vec<u8> {
        self.data
            .chunks_exact(3)
            .flat_map(|c| [c[0], c[1], c[2], 255])
            .collect()
    }

    /// Draws a one-pixel-wide segment with a DDA walk.
    pub fn draw_line(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, rgb: [u8; 3]) {
        let steps = (x1 - x0).abs().max((y1 - y0).abs()).ceil().max(1.0) as usize;
        for k in 0..=steps {
            let t = k as f64 / steps as f64;
            let x = x0 + (x1 - x0) * t;
            let y = y0 + (y1 - y0) * t;
            self.put(x.round() as i64, y.round() as i64, rgb);
        }
    }

    pub fn encode_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }

    pub fn decode_ppm(bytes: &[u8]) -> Result<Self> {
        let text_end = bytes
            .iter()
            .enumerate()
            .filter(|(_, b)| b.is_ascii_whitespace())
            .nth(3)
            .map(|(i, _)| i)
            .ok_or_else(|| Error::Format("truncated PPM header".into()))?;
        let header = std::str::from_utf8(&bytes[..text_end])
            .map_err(|_| Error::Format("PPM header is not ASCII".into()))?;
        let tokens: Vec<&str> = header.split_ascii_whitespace().collect();
        if tokens.len() != 4 || tokens[0] != "P6" || tokens[3] != "255" {
            return Err(Error::Format("only 8-bit P6 PPM is supported".into()));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Format(format!("bad PPM dimension {s:?}")))
        };
        let (width, height) = (parse(tokens[1])?, parse(tokens[2])?);
        let data = bytes[text_end + 1..].to_vec();
        if data.len() != width * height * 3 {
            return Err(Error::Format("PPM payload size mismatch".into()));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }
}

/// Path of the text sidecar accompanying `image_path`.
pub fn sidecar_path(image_path: &Path) -> PathBuf {
    let mut name = image_path.as_os_str().to_owned();
    name.push(".meta.txt");
    PathBuf::from(name)
}

/// Writes `image` as P6 and `meta` lines to its sidecar.
pub fn write_ppm_with_sidecar(image_path: &Path, image: &RgbImage, meta: &[String]) -> Result<()> {
    fs::write(image_path, image.encode_ppm())?;
    let mut f = fs::File::create(sidecar_path(image_path))?;
    for line in meta {
        writeln!(f, "{line}")?;
    }
    Ok(())
}
