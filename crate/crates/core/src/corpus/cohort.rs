use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::NaiveDate;
use serde::Serialize;

use crate::corpus::records::{ArticleMeta, CreationEntry};
use crate::error::{Error, Result};
use crate::logstore::redirect::RedirectTable;
use crate::logstore::title::CanonicalTitle;
use crate::wikitext::{unique_wikilinks, ArticleSource};

/// A hoax together with the legitimate articles created on the same UTC day.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CohortRecord {
    pub hoax: ArticleMeta,
    pub creation_date: NaiveDate,
    /// Sorted by title, one entry per canonical page.
    pub members: Vec<ArticleMeta>,
    /// Same-day entries before redirect and hoax removal, hoax itself excluded.
    pub raw_size: usize,
}

/// Builds the cohort of `hoax` from the articles created that day.
///
/// Redirects never become members: their target is either already in the
/// list (created the same day) or was created on another day and is not a
/// cohort member. Known hoaxes and the hoax itself are removed, and entries
/// that resolve to the same page are kept once (earliest creation wins).
pub fn build_cohort(
    hoax: &ArticleMeta,
    same_day: &[ArticleMeta],
    redirects: &RedirectTable,
) -> Result<CohortRecord> {
    let day = hoax.creation_date();
    let hoax_page = redirects.resolve(&hoax.title);
    let mut raw_size = 0;
    let mut members: BTreeMap<&CanonicalTitle, &ArticleMeta> = BTreeMap::new();
    for m in same_day {
        if m.creation_date() != day || m.title == hoax.title {
            continue;
        }
        raw_size += 1;
        if m.is_hoax || m.is_redirect || redirects.is_redirect(&m.title) {
            continue;
        }
        let page = redirects.resolve(&m.title);
        if page == hoax_page {
            continue;
        }
        members
            .entry(page)
            .and_modify(|prev| {
                if (m.created_at, &m.title) < (prev.created_at, &prev.title) {
                    *prev = m;
                }
            })
            .or_insert(m);
    }
    if members.is_empty() {
        return Err(Error::EmptyCohort(hoax.title.to_string()));
    }
    Ok(CohortRecord {
        hoax: hoax.clone(),
        creation_date: day,
        members: members.into_values().cloned().collect(),
        raw_size,
    })
}

/// Groups creation entries by UTC creation date.
pub fn by_creation_day(entries: &[CreationEntry]) -> HashMap<NaiveDate, Vec<ArticleMeta>> {
    let mut out: HashMap<NaiveDate, Vec<ArticleMeta>> = HashMap::new();
    for e in entries {
        out.entry(e.meta.creation_date())
            .or_default()
            .push(e.meta.clone());
    }
    out
}

/// Redirect edges declared in creation lists.
pub fn creation_redirects(entries: &[CreationEntry]) -> Vec<(CanonicalTitle, CanonicalTitle)> {
    entries
        .iter()
        .filter_map(|e| Some((e.meta.title.clone(), e.redirect_target.clone()?)))
        .collect()
}

/// Distinct main-namespace out-links of an article, without known hoaxes
/// and without the article itself.
pub fn neighbor_set(
    article: &ArticleSource,
    hoax_titles: &BTreeSet<CanonicalTitle>,
) -> Result<BTreeSet<CanonicalTitle>> {
    let mut links = unique_wikilinks(&article.markup);
    links.retain(|t| t != &article.title && !hoax_titles.contains(t));
    if links.is_empty() {
        return Err(Error::NoNeighbors(article.title.to_string()));
    }
    Ok(links)
}
