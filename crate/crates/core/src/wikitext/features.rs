use std::fs;
use std::io::ErrorKind;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logstore::title::{title_to_filename, CanonicalTitle};
use crate::wikitext::links::{extract_external_links, extract_wikilinks};
use crate::wikitext::strip::strip_markup;

/// Number of maximal runs of Unicode letters and digits.
pub fn count_words(text: &str) -> usize {
    let mut n = 0;
    let mut in_word = false;
    for c in text.chars() {
        let w = c.is_alphanumeric();
        if w && !in_word {
            n += 1;
        }
        in_word = w;
    }
    n
}

/// An article's markup and its plain text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArticleSource {
    pub title: CanonicalTitle,
    pub markup: String,
    pub plain: String,
    /// True when `plain` came from an extract rather than [`strip_markup`].
    pub plain_supplied: bool,
}

impl ArticleSource {
    pub fn from_markup(title: CanonicalTitle, markup: impl Into<String>) -> Self {
        let markup = markup.into();
        let plain = strip_markup(&markup);
        ArticleSource {
            title,
            markup,
            plain,
            plain_supplied: false,
        }
    }

    pub fn with_plain(
        title: CanonicalTitle,
        markup: impl Into<String>,
        plain: impl Into<String>,
    ) -> Self {
        ArticleSource {
            title,
            markup: markup.into(),
            plain: plain.into(),
            plain_supplied: true,
        }
    }

    /// Reads `<title>.wiki` and, if present, `<title>.txt` from `dir`.
    /// Returns `Ok(None)` when there is no markup file.
    pub fn load(dir: &Path, title: &CanonicalTitle) -> Result<Option<Self>> {
        let stem = title_to_filename(title);
        let wiki = dir.join(format!("{stem}.wiki"));
        let markup = match fs::read_to_string(&wiki) {
            Ok(m) => m,
            Err(e) if e.kind() == ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(&wiki, e)),
        };
        let txt = dir.join(format!("{stem}.txt"));
        match fs::read_to_string(&txt) {
            Ok(plain) => Ok(Some(Self::with_plain(title.clone(), markup, plain))),
            Err(e) if e.kind() == ErrorKind::NotFound => {
                Ok(Some(Self::from_markup(title.clone(), markup)))
            }
            Err(e) => Err(Error::io(&txt, e)),
        }
    }

    /// Writes this article in the fixture layout read by [`ArticleSource::load`].
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let stem = title_to_filename(&self.title);
        let wiki = dir.join(format!("{stem}.wiki"));
        fs::write(&wiki, &self.markup).map_err(|e| Error::io(&wiki, e))?;
        if self.plain_supplied {
            let txt = dir.join(format!("{stem}.txt"));
            fs::write(&txt, &self.plain).map_err(|e| Error::io(&txt, e))?;
        }
        Ok(())
    }
}

/// The four appearance features of an article.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArticleFeatures {
    pub plain_length: u64,
    pub plain_to_markup_ratio: f64,
    /// Wiki-links per 100 markup words.
    pub wikilink_density: f64,
    /// External links per 100 markup words.
    pub extlink_density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    PlainLength,
    Ratio,
    WikilinkDensity,
    ExtlinkDensity,
}

impl Feature {
    pub const ALL: [Feature; 4] = [
        Feature::PlainLength,
        Feature::Ratio,
        Feature::WikilinkDensity,
        Feature::ExtlinkDensity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::PlainLength => "plain_length",
            Feature::Ratio => "ratio",
            Feature::WikilinkDensity => "wikilink_density",
            Feature::ExtlinkDensity => "extlink_density",
        }
    }

    pub fn of(self, f: &ArticleFeatures) -> f64 {
        match self {
            Feature::PlainLength => f.plain_length as f64,
            Feature::Ratio => f.plain_to_markup_ratio,
            Feature::WikilinkDensity => f.wikilink_density,
            Feature::ExtlinkDensity => f.extlink_density,
        }
    }
}

pub fn compute_features(src: &ArticleSource) -> Result<ArticleFeatures> {
    let markup_words = count_words(&src.markup);
    if markup_words == 0 {
        return Err(Error::EmptyArticle(src.title.to_string()));
    }
    let plain_words = count_words(&src.plain);
    let links = extract_wikilinks(&src.markup).len();
    let ext = extract_external_links(&src.markup);
    let mw = markup_words as f64;
    Ok(ArticleFeatures {
        plain_length: plain_words as u64,
        plain_to_markup_ratio: plain_words as f64 / mw,
        wikilink_density: 100.0 * links as f64 / mw,
        extlink_density: 100.0 * ext as f64 / mw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> CanonicalTitle {
        CanonicalTitle::parse(s).unwrap()
    }

    #[test]
    fn word_counts() {
        assert_eq!(count_words(""), 0);
        assert_eq!(count_words("Alpha links to Beta and G."), 6);
        assert_eq!(count_words("'''Alpha''' links to [[Gamma|G]]."), 5);
        assert_eq!(count_words("-- ... !!"), 0);
        assert_eq!(count_words("naïve café 2024"), 3);
    }

    #[test]
    fn worked_example() {
        let src = ArticleSource::from_markup(
            t("Alpha"),
            "'''Alpha''' links to [[Beta]] and [[Gamma|G]].",
        );
        let f = compute_features(&src).unwrap();
        assert_eq!(f.plain_length, 6);
        assert!((f.plain_to_markup_ratio - 6.0 / 7.0).abs() < 1e-12);
        assert!((f.wikilink_density - 200.0 / 7.0).abs() < 1e-12);
        assert_eq!(f.extlink_density, 0.0);
    }

    #[test]
    fn no_markup_means_ratio_one() {
        let f =
            compute_features(&ArticleSource::from_markup(t("P"), "Just some words here")).unwrap();
        assert_eq!(f.plain_to_markup_ratio, 1.0);
        assert_eq!(f.wikilink_density, 0.0);
        assert_eq!(f.extlink_density, 0.0);
    }

    #[test]
    fn empty_article() {
        // The template name still counts as a markup word.
        assert!(compute_features(&ArticleSource::from_markup(t("E"), "{{stub}}")).is_ok());
        assert!(matches!(
            compute_features(&ArticleSource::from_markup(t("E"), "''' ---")),
            Err(Error::EmptyArticle(_))
        ));
    }

    #[test]
    fn supplied_plain_wins() {
        let src = ArticleSource::with_plain(t("X"), "[[A]] [[B]] c d", "only two");
        let f = compute_features(&src).unwrap();
        assert_eq!(f.plain_length, 2);
        assert_eq!(f.plain_to_markup_ratio, 0.5);
    }

    #[test]
    fn fixture_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = ArticleSource::from_markup(t("AC/DC"), "[[Rock]] band");
        a.save(dir.path()).unwrap();
        assert_eq!(
            ArticleSource::load(dir.path(), &t("AC/DC")).unwrap(),
            Some(a)
        );
        let b = ArticleSource::with_plain(t("B"), "[[X]] y", "X y");
        b.save(dir.path()).unwrap();
        assert_eq!(ArticleSource::load(dir.path(), &t("B")).unwrap(), Some(b));
        assert_eq!(
            ArticleSource::load(dir.path(), &t("Missing")).unwrap(),
            None
        );
    }
}
