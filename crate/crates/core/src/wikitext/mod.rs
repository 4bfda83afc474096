//! Markup stripping, word counts, link extraction and the appearance
//! features built from them.

pub mod features;
pub mod links;
mod scan;
pub mod strip;

pub use features::{compute_features, count_words, ArticleFeatures, ArticleSource, Feature};
pub use links::{extract_external_links, extract_wikilinks, unique_wikilinks};
pub use strip::strip_markup;
