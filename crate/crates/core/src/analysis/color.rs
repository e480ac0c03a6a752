//! Color scales used by the renderers.

/// Jet-style rainbow over `[0, 1]`: dark blue at 0 through cyan, yellow,
/// to dark red at 1. Inputs are clamped.
pub fn rainbow(t: f64) -> [u8; 3] {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let ch = |offset: f64| {
        let v = (1.5 - (4.0 * t - offset).abs()).clamp(0.0, 1.0);
        (v * 255.0).round() as u8
    };
    [ch(3.0), ch(2.0), ch(1.0)]
}

/// Diverging blue-white-red scale over `[-1, 1]`, white at zero.
pub fn diverging(v: f64) -> [u8; 3] {
    let v = if v.is_finite() { v.clamp(-1.0, 1.0) } else { 0.0 };
    let fade = |k: f64| (255.0 * (1.0 - k)).round() as u8;
    if v >= 0.0 {
        [255, fade(v), fade(v)]
    } else {
        [fade(-v), fade(-v), 255]
    }
}

/// Gray level for `value / max` on a square-root scale.
pub fn gray_sqrt(value: f64, max: f64) -> [u8; 3] {
    let g = if max > 0.0 && value > 0.0 {
        ((value / max).sqrt().clamp(0.0, 1.0) * 255.0).round() as u8
    } else {
        0
    };
    [g, g, g]
}
