//! Median, median absolute deviation and the modified z-score.

use serde::Serialize;

use crate::error::{Error, Result};

/// Median by selection; even lengths average the two middle values.
///
/// Returns `None` for an empty slice. The input is reordered.
pub fn median_in_place(values: &mut [f64]) -> Option<f64> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let mid = n / 2;
    let (lower, upper_mid, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper_mid = *upper_mid;
    if n % 2 == 1 {
        return Some(upper_mid);
    }
    let lower_mid = lower.iter().copied().max_by(f64::total_cmp)?;
    Some((lower_mid + upper_mid) / 2.0)
}

pub fn median(values: &[f64]) -> Option<f64> {
    median_in_place(&mut values.to_vec())
}

/// Median of non-negative integer counts, exact for counts below 2^53.
pub fn median_counts(values: &[u64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
    median_in_place(&mut v)
}

/// Median and MAD (median of absolute deviations from the median).
pub fn median_and_mad(values: &[f64]) -> Option<(f64, f64)> {
    let mut buf = values.to_vec();
    let med = median_in_place(&mut buf)?;
    for v in buf.iter_mut() {
        *v = (*v - med).abs();
    }
    let mad = median_in_place(&mut buf)?;
    Some((med, mad))
}

/// A value standardized against a reference group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModifiedZ {
    pub x: f64,
    pub median: f64,
    pub mad: f64,
    pub z: f64,
}

/// `z' = (x - median) / MAD` over `cohort`, with no consistency constant.
pub fn modified_z(x: f64, cohort: &[f64]) -> Result<ModifiedZ> {
    let (median, mad) = median_and_mad(cohort).ok_or(Error::EmptyInput)?;
    if mad == 0.0 {
        return Err(Error::ZeroMad { median });
    }
    Ok(ModifiedZ {
        x,
        median,
        mad,
        z: (x - median) / mad,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[5.0]), Some(5.0));
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.5));
        assert_eq!(median_counts(&[7, 1, 1, 1, 9, 9, 9]), Some(7.0));
    }

    #[test]
    fn z_examples() {
        let z = modified_z(10.0, &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((z.median, z.mad, z.z), (3.0, 1.0, 7.0));
        assert_eq!(modified_z(3.0, &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap().z, 0.0);
        assert!(matches!(
            modified_z(1.0, &[4.0, 4.0, 4.0]),
            Err(Error::ZeroMad { median }) if median == 4.0
        ));
        assert!(matches!(modified_z(1.0, &[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn mad_even_length() {
        // median 2.5, deviations 1.5 0.5 0.5 1.5 -> MAD 1.0
        assert_eq!(median_and_mad(&[1.0, 2.0, 3.0, 4.0]), Some((2.5, 1.0)));
    }
}
