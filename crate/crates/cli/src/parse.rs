use anyhow::{anyhow, bail, Context, Result};

pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>()
                .with_context(|| format!("`{s}` is not a number"))
                .and_then(|v| {
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(anyhow!("`{s}` is not finite"))
                    }
                })
        })
        .collect()
}

pub fn parse_pair(text: &str) -> Result<(f64, f64)> {
    match parse_list(text)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => bail!("expected two comma-separated numbers, got `{text}`"),
    }
}

pub fn parse_triple(text: &str) -> Result<(f64, f64, f64)> {
    match parse_list(text)?.as_slice() {
        [a, b, c] => Ok((*a, *b, *c)),
        _ => bail!("expected three comma-separated numbers, got `{text}`"),
    }
}

/// `x,y,w,h` in whole pixels.
pub fn parse_roi(text: &str) -> Result<[usize; 4]> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        bail!("ROI must be x,y,w,h, got `{text}`");
    }
    let mut out = [0usize; 4];
    for (o, p) in out.iter_mut().zip(&parts) {
        *o = p
            .parse()
            .with_context(|| format!("ROI component `{p}` is not a non-negative integer"))?;
    }
    Ok(out)
}

/// `x1,y1;x2,y2;...`
pub fn parse_seeds(text: &str) -> Result<Vec<(f64, f64)>> {
    let seeds: Vec<(f64, f64)> = text
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(parse_pair)
        .collect::<Result<_>>()?;
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    Ok(seeds)
}

pub fn parse_indices(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .with_context(|| format!("`{s}` is not a pair index"))
        })
        .collect()
}
