//! Robust feature scores, relative traffic change, hoax-versus-cohort
//! difference and its bootstrap interval.

pub mod bootstrap;
pub mod histogram;
pub mod robust;
pub mod volume;

pub use bootstrap::{bootstrap_mean_ci, bootstrap_means, BootstrapSummary, DEFAULT_RESAMPLES};
pub use histogram::{auto_range, histogram, Bin};
pub use robust::{median, median_and_mad, modified_z, ModifiedZ};
pub use volume::{cohort_d, delta_v, AttentionScore, CohortAttentionResult, VolumeChange};

use serde::Serialize;

use crate::wikitext::Feature;

/// A hoax's modified z-score for one appearance feature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeatureZScore {
    pub feature: Feature,
    #[serde(flatten)]
    pub score: ModifiedZ,
}
