//! Hoax list, same-day creation lists, cohort construction and out-link
//! neighborhoods.

pub mod cohort;
pub mod live;
pub mod records;

pub use cohort::{build_cohort, by_creation_day, creation_redirects, neighbor_set, CohortRecord};
pub use live::{fetch_live, FetchConfig, FetchReport};
pub use records::{
    format_timestamp, load_creation_file, load_creations, load_hoaxes, parse_timestamp,
    write_creations, write_hoaxes, ArticleMeta, CreationEntry,
};
