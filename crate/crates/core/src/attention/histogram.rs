use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

/// Equal-width bins over `[low, high]`; the last bin is closed on the right.
/// Values outside the range are ignored.
pub fn histogram(values: &[f64], low: f64, high: f64, bins: usize) -> Vec<Bin> {
    assert!(
        bins > 0 && high > low,
        "histogram needs bins > 0 and high > low"
    );
    let width = (high - low) / bins as f64;
    let mut out: Vec<Bin> = (0..bins)
        .map(|i| Bin {
            low: low + i as f64 * width,
            high: if i + 1 == bins {
                high
            } else {
                low + (i + 1) as f64 * width
            },
            count: 0,
        })
        .collect();
    for &v in values {
        if !(low..=high).contains(&v) {
            continue;
        }
        let idx = (((v - low) / width) as usize).min(bins - 1);
        out[idx].count += 1;
    }
    out
}

/// Range covering all values, padded so a single-valued sample still gets a
/// non-empty interval.
pub fn auto_range(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = lo.abs().max(1.0) * 0.05;
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}
