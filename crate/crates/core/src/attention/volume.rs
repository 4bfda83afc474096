//! Relative traffic-volume change around a creation day, and the
//! hoax-versus-cohort difference built on it.

use serde::Serialize;

use crate::attention::robust::median_counts;
use crate::error::{Error, Result};
use crate::logstore::title::CanonicalTitle;

/// Medians of the two windows and their relative difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeChange {
    pub v_before: f64,
    pub v_after: f64,
    /// `(v_before - v_after) / (v_before + v_after)`, `None` when both are 0.
    pub delta_v: Option<f64>,
}

/// Relative volume change between two equally long windows of daily totals.
pub fn delta_v(before: &[u64], after: &[u64]) -> Result<VolumeChange> {
    if before.is_empty() || before.len() != after.len() {
        return Err(Error::WrongWindowLength {
            before: before.len(),
            after: after.len(),
        });
    }
    let v_before = median_counts(before).unwrap_or(0.0);
    let v_after = median_counts(after).unwrap_or(0.0);
    let total = v_before + v_after;
    let delta_v = (total > 0.0).then(|| (v_before - v_after) / total);
    Ok(VolumeChange {
        v_before,
        v_after,
        delta_v,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttentionScore {
    pub title: CanonicalTitle,
    #[serde(flatten)]
    pub change: VolumeChange,
}

impl AttentionScore {
    pub fn new(title: CanonicalTitle, change: VolumeChange) -> Self {
        AttentionScore { title, change }
    }

    pub fn delta_v(&self) -> Option<f64> {
        self.change.delta_v
    }
}

/// A hoax's volume change against the mean of its cohort.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortAttentionResult {
    pub hoax: AttentionScore,
    /// Cohort members with a defined volume change.
    pub cohort: Vec<AttentionScore>,
    pub cohort_mean: f64,
    pub n: usize,
    pub d: f64,
}

/// `D = hoax ΔV/V - mean(cohort ΔV'/V')`, skipping members whose change is
/// undefined.
pub fn cohort_d(hoax: &AttentionScore, cohort: &[AttentionScore]) -> Result<CohortAttentionResult> {
    let hoax_dv = hoax
        .delta_v()
        .ok_or_else(|| Error::UndefinedVolumeChange(hoax.title.to_string()))?;
    let included: Vec<AttentionScore> = cohort
        .iter()
        .filter(|s| s.delta_v().is_some())
        .cloned()
        .collect();
    if included.is_empty() {
        return Err(Error::EmptyCohortScores);
    }
    let n = included.len();
    let sum: f64 = included.iter().filter_map(AttentionScore::delta_v).sum();
    let cohort_mean = sum / n as f64;
    Ok(CohortAttentionResult {
        hoax: hoax.clone(),
        cohort: included,
        cohort_mean,
        n,
        d: hoax_dv - cohort_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(name: &str, dv: Option<f64>) -> AttentionScore {
        AttentionScore::new(
            CanonicalTitle::parse(name).unwrap(),
            VolumeChange {
                v_before: 0.0,
                v_after: 0.0,
                delta_v: dv,
            },
        )
    }

    #[test]
    fn delta_v_examples() {
        let v = delta_v(&[3; 7], &[1; 7]).unwrap();
        assert_eq!((v.v_before, v.v_after, v.delta_v), (3.0, 1.0, Some(0.5)));
        assert_eq!(delta_v(&[4; 7], &[4; 7]).unwrap().delta_v, Some(0.0));
        assert_eq!(delta_v(&[5; 7], &[0; 7]).unwrap().delta_v, Some(1.0));
        assert_eq!(delta_v(&[0; 7], &[5; 7]).unwrap().delta_v, Some(-1.0));
        assert_eq!(delta_v(&[0; 7], &[0; 7]).unwrap().delta_v, None);
        assert!(matches!(
            delta_v(&[1; 7], &[1; 6]),
            Err(Error::WrongWindowLength {
                before: 7,
                after: 6
            })
        ));
        assert!(delta_v(&[], &[]).is_err());
    }

    #[test]
    fn median_not_mean() {
        // One spike day does not move the median.
        let v = delta_v(&[1, 1, 1, 1000, 1, 1, 1], &[1; 7]).unwrap();
        assert_eq!(v.delta_v, Some(0.0));
    }

    #[test]
    fn d_examples() {
        let cohort = [
            score("A", Some(0.1)),
            score("B", Some(0.2)),
            score("C", Some(0.3)),
        ];
        let r = cohort_d(&score("H", Some(0.5)), &cohort).unwrap();
        assert_eq!(r.n, 3);
        assert!((r.d - 0.3).abs() < 1e-15);
        assert_eq!(r.d, 0.5 - r.cohort_mean);

        let r = cohort_d(&score("H", Some(0.2)), &cohort).unwrap();
        assert!(r.d.abs() < 1e-15);

        let with_undefined = [score("A", Some(0.4)), score("B", None)];
        let r = cohort_d(&score("H", Some(0.5)), &with_undefined).unwrap();
        assert_eq!(r.n, 1);
        assert_eq!(r.cohort_mean, 0.4);

        assert!(matches!(
            cohort_d(&score("H", Some(0.5)), &[score("A", None)]),
            Err(Error::EmptyCohortScores)
        ));
        assert!(matches!(
            cohort_d(&score("H", None), &cohort),
            Err(Error::UndefinedVolumeChange(_))
        ));
    }
}
