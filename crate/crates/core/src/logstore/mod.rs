//! Hourly traffic logs to per-title daily series.
//!
//! Pipeline: [`parse_line`] → [`filter_entry`] (project, title cleaning,
//! namespace) → [`RedirectTable::resolve`] → per-day summation in a
//! [`TrafficStore`].

pub mod parse;
pub mod redirect;
pub mod store;
pub mod title;

pub use parse::{filter_entry, parse_line, FilterConfig, FilterOutcome, MalformedLine, RawLogLine};
pub use redirect::{ChainEnd, RedirectTable, MAX_REDIRECT_DEPTH};
pub use store::{
    aggregate_lines, discover_log_files, hour_from_filename, ingest, log_filename, write_log_file,
    Coverage, FileReport, IngestOutcome, IngestTallies, TrafficSeries, TrafficStore, WindowTotals,
};
pub use title::{clean_title, CanonicalTitle, Cleaned};
