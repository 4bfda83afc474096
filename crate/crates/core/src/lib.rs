//! Measuring whether attention to a topic precedes the creation of hoax
//! articles.
//!
//! The crate ingests hourly page-request logs ([`logstore`]), extracts
//! appearance features and out-links from wikitext ([`wikitext`]), builds
//! same-day creation cohorts ([`corpus`]) and computes robust scores,
//! relative volume changes and bootstrap intervals ([`attention`]).
//! [`pipeline`] wires these into the batch commands used by the CLI.

pub mod attention;
pub mod corpus;
pub mod error;
pub mod logstore;
pub mod pipeline;
pub mod synth;
pub mod wikitext;

pub use error::{Error, Result};
pub use logstore::CanonicalTitle;
