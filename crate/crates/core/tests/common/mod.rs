#![allow(dead_code)]

use calflow::flow::FlowSample;
use calflow::synth::{SynthKind, SynthSpec};
use calflow::{Calibration, FlowField, FlowSequence, Rect};

pub fn cal() -> Calibration {
    Calibration::new(8.0, 1.3).unwrap()
}

pub fn blob_spec(velocity: (f64, f64), sigma: f64) -> SynthSpec {
    SynthSpec {
        kind: SynthKind::TranslatingBlob {
            center: (20.0, 20.0),
            sigma,
            amplitude: 100.0,
            velocity,
            background: 10.0,
        },
        width: 48,
        height: 48,
        frame_count: 4,
        calibration: cal(),
        noise_sigma: 0.0,
        seed: 7,
    }
}

pub fn wave_spec(speed: f64) -> SynthSpec {
    SynthSpec {
        kind: SynthKind::RadialWave {
            origin: (32.0, 32.0),
            speed,
            width: 3.0,
            amplitude: 100.0,
            background: 10.0,
        },
        width: 64,
        height: 64,
        frame_count: 16,
        calibration: cal(),
        noise_sigma: 0.0,
        seed: 3,
    }
}

/// A sequence where every valid pixel carries the same reliable vector.
pub fn uniform_sequence(
    width: usize,
    height: usize,
    valid: Rect,
    pairs: usize,
    u: f64,
    v: f64,
) -> FlowSequence {
    let fields = (0..pairs)
        .map(|t| {
            FlowField::from_fn(width, height, valid, t, |_, _| FlowSample {
                u,
                v,
                lambda_min: 5.0,
                lambda_max: 10.0,
            })
            .unwrap()
        })
        .collect();
    FlowSequence::new(cal(), fields).unwrap()
}

/// Masked everywhere: eigenvalues zero, vectors unsolved.
pub fn masked_sequence(width: usize, height: usize, valid: Rect, pairs: usize) -> FlowSequence {
    let fields = (0..pairs)
        .map(|t| FlowField::from_fn(width, height, valid, t, |_, _| FlowSample::MISSING).unwrap())
        .collect();
    FlowSequence::new(cal(), fields).unwrap()
}
