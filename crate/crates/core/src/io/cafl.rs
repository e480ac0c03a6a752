//! "CAFL" flow-field container.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic        4 bytes  "CAFL"
//! version      u32      1
//! width        u32
//! height       u32
//! pair_count   u32
//! valid_origin u32 x, u32 y
//! valid_extent u32 w, u32 h
//! calibration  f64 frame_rate_hz, f64 microns_per_pixel
//! pairs        pair_count x 4 planes (u, v, lambda_min, lambda_max),
//!              each width*height f32 in row-major order
//! ```

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::flow::{FlowField, FlowSequence};
use crate::movie::Calibration;
use crate::plane::Rect;

pub const MAGIC: &[u8; 4] = b"CAFL";
pub const VERSION: u32 = 1;

fn to_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Format(format!("{what} {v} does not fit in u32")))
}

pub fn write_flow_field(mut writer: impl Write, sequence: &FlowSequence) -> Result<()> {
    let valid = sequence.valid_region();
    let cal = sequence.calibration();
    let mut header = Vec::with_capacity(52);
    header.extend_from_slice(MAGIC);
    for v in [
        VERSION,
        to_u32(sequence.width(), "width")?,
        to_u32(sequence.height(), "height")?,
        to_u32(sequence.pair_count(), "pair count")?,
        to_u32(valid.x0, "valid origin")?,
        to_u32(valid.y0, "valid origin")?,
        to_u32(valid.width, "valid extent")?,
        to_u32(valid.height, "valid extent")?,
    ] {
        header.extend_from_slice(&v.to_le_bytes());
    }
    header.extend_from_slice(&cal.frame_rate_hz.to_le_bytes());
    header.extend_from_slice(&cal.microns_per_pixel.to_le_bytes());
    writer.write_all(&header)?;

    let n = sequence.width() * sequence.height();
    let mut buf = Vec::with_capacity(n * 4);
    for field in sequence.fields() {
        for plane in [field.u(), field.v(), field.lambda_min(), field.lambda_max()] {
            buf.clear();
            for &x in plane {
                buf.extend_from_slice(&(x as f32).to_le_bytes());
            }
            writer.write_all(&buf)?;
        }
    }
    writer.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_plane(r: &mut impl Read, n: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; n * 4];
    r.read_exact(&mut bytes)?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect())
}

/// Reads a flow sequence. Truncated payloads surface as I/O errors.
pub fn read_flow_field(mut reader: impl Read) -> Result<FlowSequence> {
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}, expected CAFL")));
    }
    let version = read_u32(&mut reader)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported CAFL version {version}")));
    }
    let width = read_u32(&mut reader)? as usize;
    let height = read_u32(&mut reader)? as usize;
    let pairs = read_u32(&mut reader)? as usize;
    let valid = Rect::new(
        read_u32(&mut reader)? as usize,
        read_u32(&mut reader)? as usize,
        read_u32(&mut reader)? as usize,
        read_u32(&mut reader)? as usize,
    );
    let frame_rate = read_f64(&mut reader)?;
    let mpp = read_f64(&mut reader)?;
    let calibration =
        Calibration::new(frame_rate, mpp).map_err(|e| Error::Format(e.to_string()))?;
    if pairs == 0 {
        return Err(Error::Format("CAFL file declares no frame pairs".into()));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::Format("CAFL dimensions overflow".into()))?;
    let mut fields = Vec::with_capacity(pairs.min(4096));
    for t in 0..pairs {
        let u = read_plane(&mut reader, n)?;
        let v = read_plane(&mut reader, n)?;
        let lmin = read_plane(&mut reader, n)?;
        let lmax = read_plane(&mut reader, n)?;
        fields.push(FlowField::from_planes(width, height, valid, t, u, v, lmin, lmax)?);
    }
    let mut rest = [0u8; 1];
    if reader.read(&mut rest)? != 0 {
        return Err(Error::Format("trailing bytes after CAFL payload".into()));
    }
    FlowSequence::new(calibration, fields)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::FlowSample;
    use proptest::prelude::*;

    fn cal() -> Calibration {
        Calibration::new(8.0, 1.3).unwrap()
    }

    fn sample_sequence(pairs: usize) -> FlowSequence {
        let fields = (0..pairs)
            .map(|t| {
                FlowField::from_fn(8, 8, Rect::new(2, 2, 4, 4), t, |x, y| {
                    if (x + y + t) % 3 == 0 {
                        FlowSample {
                            u: f64::NAN,
                            v: f64::NAN,
                            lambda_min: 0.25,
                            lambda_max: 0.5,
                        }
                    } else {
                        FlowSample {
                            u: x as f64 * 0.125,
                            v: -(y as f64) * 0.5,
                            lambda_min: 1.5 + t as f64,
                            lambda_max: 3.0,
                        }
                    }
                })
                .unwrap()
            })
            .collect();
        FlowSequence::new(cal(), fields).unwrap()
    }

    fn bits(seq: &FlowSequence) -> Vec<u64> {
        seq.fields()
            .iter()
            .flat_map(|f| {
                f.u().iter()
                    .chain(f.v())
                    .chain(f.lambda_min())
                    .chain(f.lambda_max())
                    .map(|x| x.to_bits())
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    #[test]
    fn round_trip_one_pair() {
        let seq = sample_sequence(1);
        let mut bytes = vec![];
        write_flow_field(&mut bytes, &seq).unwrap();
        assert_eq!(bytes.len(), 52 + 4 * 64 * 4);
        assert_eq!(&bytes[..4], b"CAFL");
        let back = read_flow_field(bytes.as_slice()).unwrap();
        assert_eq!(bits(&back), bits(&seq));
        assert_eq!(back.valid_region(), seq.valid_region());
        assert_eq!(back.calibration(), seq.calibration());
    }

    #[test]
    fn bad_magic_is_format_error() {
        let mut bytes = vec![];
        write_flow_field(&mut bytes, &sample_sequence(1)).unwrap();
        bytes[..4].copy_from_slice(b"XXXX");
        assert!(matches!(
            read_flow_field(bytes.as_slice()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn bad_version_is_format_error() {
        let mut bytes = vec![];
        write_flow_field(&mut bytes, &sample_sequence(1)).unwrap();
        bytes[4] = 2;
        assert!(matches!(
            read_flow_field(bytes.as_slice()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn truncated_payload_is_io_error() {
        let mut bytes = vec![];
        write_flow_field(&mut bytes, &sample_sequence(1)).unwrap();
        // declare two pairs, ship one
        bytes[16..20].copy_from_slice(&2u32.to_le_bytes());
        match read_flow_field(bytes.as_slice()) {
            Err(Error::Io(e)) => assert_eq!(e.kind(), std::io::ErrorKind::UnexpectedEof),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            vals in proptest::collection::vec(any::<f32>(), 4 * 6 * 5 * 2),
        ) {
            let n = 6 * 5;
            let fields = (0..2).map(|t| {
                let plane = |k: usize| vals[(t * 4 + k) * n..(t * 4 + k + 1) * n]
                    .iter().map(|&x| x as f64).collect::<Vec<_>>();
                FlowField::from_planes(6, 5, Rect::new(1, 1, 3, 2), t, plane(0), plane(1), plane(2), plane(3)).unwrap()
            }).collect();
            let seq = FlowSequence::new(cal(), fields).unwrap();
            let mut bytes = vec![];
            write_flow_field(&mut bytes, &seq).unwrap();
            let back = read_flow_field(bytes.as_slice()).unwrap();
            prop_assert_eq!(bits(&back), bits(&seq));
            let mut again = vec![];
            write_flow_field(&mut again, &back).unwrap();
            prop_assert_eq!(again, bytes);
        }
    }
}
