//! Batch commands: ingest, cohort, features, attention, report and fetch.
//!
//! Every command reads a [`RunConfig`], writes its outputs under
//! `config.out` once all work is done, and returns a small summary. Outputs
//! depend only on the inputs and the seed.

pub mod config;
mod output;
mod report;
mod run;
mod svg;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

pub use config::RunConfig;
pub use report::{cmd_report, ReportSummary};
pub use run::{
    build_cohorts, cmd_attention, cmd_cohort, cmd_features, cmd_fetch, cmd_ingest, load_corpus,
    load_redirects, AttentionSummary, CohortSummary, Corpus, FeatureSummary, IngestSummary,
};

use crate::logstore::CanonicalTitle;

/// Why an article or hoax was left out of a statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    EmptyCohort,
    OutOfCoverage,
    MissingArticle,
    EmptyArticle,
    NoNeighbors,
    UndefinedDeltaV,
    EmptyCohortScores,
    NoCohortFeatures,
}

impl Reason {
    pub fn as_str(self) -> &'static str {
        match self {
            Reason::EmptyCohort => "empty_cohort",
            Reason::OutOfCoverage => "out_of_coverage",
            Reason::MissingArticle => "missing_article",
            Reason::EmptyArticle => "empty_article",
            Reason::NoNeighbors => "no_neighbors",
            Reason::UndefinedDeltaV => "undefined_delta_v",
            Reason::EmptyCohortScores => "empty_cohort_scores",
            Reason::NoCohortFeatures => "no_cohort_features",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Exclusion {
    pub title: CanonicalTitle,
    pub reason: Reason,
    pub detail: String,
}

impl Exclusion {
    fn new(title: &CanonicalTitle, reason: Reason, detail: impl Into<String>) -> Self {
        Exclusion {
            title: title.clone(),
            reason,
            detail: detail.into(),
        }
    }
}

fn count_reasons<'a>(ex: impl IntoIterator<Item = &'a Exclusion>) -> BTreeMap<Reason, usize> {
    let mut m = BTreeMap::new();
    for e in ex {
        *m.entry(e.reason).or_insert(0) += 1;
    }
    m
}
