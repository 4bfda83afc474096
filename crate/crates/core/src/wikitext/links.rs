use std::collections::BTreeSet;

use crate::logstore::title::{in_default_namespace, CanonicalTitle};
use crate::wikitext::scan::{balanced_end, bare_url_at, comment_end, external_link_at, split_link};

/// How a `[[...]]` target is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LinkKind {
    /// Ordinary link to a page in the main namespace.
    Article,
    /// `[[Category:..]]`, `[[File:..]]`, `[[Image:..]]`, `[[Media:..]]`: not
    /// rendered inline.
    Media,
    /// `[[fr:..]]` and friends, not rendered inline.
    Interlanguage,
    /// Rendered inline, but not a main-namespace page.
    OtherNamespace,
}

const INTERWIKI: &[&str] = &[
    "w",
    "wikipedia",
    "wikt",
    "wiktionary",
    "c",
    "commons",
    "m",
    "meta",
    "metawikimedia",
    "mw",
    "mediawikiwiki",
    "s",
    "wikisource",
    "q",
    "wikiquote",
    "n",
    "wikinews",
    "b",
    "wikibooks",
    "v",
    "wikiversity",
    "voy",
    "wikivoyage",
    "species",
    "wikispecies",
    "d",
    "wikidata",
    "f",
    "wikifunctions",
    "phab",
    "foundation",
    "wmf",
    "toollabs",
    "toolforge",
    "outreach",
];

fn is_language_code(p: &str) -> bool {
    let mut parts = p.split('-');
    let head = parts.next().unwrap_or("");
    (2..=3).contains(&head.len())
        && head.bytes().all(|b| b.is_ascii_lowercase())
        && parts.all(|q| !q.is_empty() && q.bytes().all(|b| b.is_ascii_lowercase()))
        || matches!(
            p,
            "simple" | "be-x-old" | "roa-rup" | "zh-min-nan" | "zh-classical"
        )
}

pub(crate) fn classify(target: &str) -> LinkKind {
    let colon_prefixed = target.starts_with(':');
    let t = target.trim_start_matches(':').trim_start();
    let Some((prefix, _)) = t.split_once(':') else {
        return LinkKind::Article;
    };
    let prefix_norm = prefix.trim().replace(' ', "_");
    let lower = prefix_norm.to_ascii_lowercase();
    if matches!(lower.as_str(), "category" | "file" | "image" | "media") {
        return if colon_prefixed {
            LinkKind::OtherNamespace
        } else {
            LinkKind::Media
        };
    }
    if is_language_code(&prefix_norm) || INTERWIKI.contains(&lower.as_str()) {
        return if colon_prefixed {
            LinkKind::OtherNamespace
        } else {
            LinkKind::Interlanguage
        };
    }
    match CanonicalTitle::parse(&format!("{prefix_norm}:x")) {
        Some(probe) if in_default_namespace(&probe) => LinkKind::OtherNamespace,
        _ => LinkKind::Article,
    }
}

/// Calls `f(target, label)` for every `[[...]]` in `markup`, including
/// links nested in file captions. Comments and `<nowiki>` are skipped.
fn for_each_link<'a>(markup: &'a str, f: &mut impl FnMut(&'a str, Option<&'a str>)) {
    let b = markup.as_bytes();
    let mut i = 0;
    while i < b.len() {
        let rest = &markup[i..];
        if rest.starts_with("<!--") {
            i = comment_end(markup, i);
        } else if rest.len() >= 8 && rest[..8].eq_ignore_ascii_case("<nowiki>") {
            i = match rest.to_ascii_lowercase().find("</nowiki>") {
                Some(p) => i + p + 9,
                None => markup.len(),
            };
        } else if rest.starts_with("[[") {
            match balanced_end(markup, i, "[[", "]]") {
                Some(end) => {
                    let inner = &markup[i + 2..end - 2];
                    let (target, label) = split_link(inner);
                    f(target, label);
                    if let Some(label) = label {
                        for_each_link(label, f);
                    }
                    i = end;
                }
                None => i += 2,
            }
        } else {
            i += rest.chars().next().map_or(1, char::len_utf8);
        }
    }
}

/// Main-namespace link targets in document order, duplicates kept.
///
/// Category, file, interlanguage and other-namespace links are left out,
/// as are targets that do not survive title cleaning.
pub fn extract_wikilinks(markup: &str) -> Vec<CanonicalTitle> {
    let mut out = Vec::new();
    for_each_link(markup, &mut |target, _| {
        if classify(target) != LinkKind::Article {
            return;
        }
        if let Some(t) = CanonicalTitle::parse(target.trim_start_matches(':')) {
            out.push(t);
        }
    });
    out
}

/// Deduplicated [`extract_wikilinks`].
pub fn unique_wikilinks(markup: &str) -> BTreeSet<CanonicalTitle> {
    extract_wikilinks(markup).into_iter().collect()
}

/// Number of bracketed `[scheme://...]` links plus bare http(s)/ftp URLs.
pub fn extract_external_links(markup: &str) -> usize {
    let b = markup.as_bytes();
    let mut n = 0;
    let mut i = 0;
    while i < b.len() {
        let rest = &markup[i..];
        if rest.starts_with("<!--") {
            i = comment_end(markup, i);
        } else if rest.len() >= 8 && rest[..8].eq_ignore_ascii_case("<nowiki>") {
            i = match rest.to_ascii_lowercase().find("</nowiki>") {
                Some(p) => i + p + 9,
                None => markup.len(),
            };
        } else if rest.starts_with("[[") {
            i += 2;
        } else if b[i] == b'[' {
            match external_link_at(markup, i) {
                Some((url_end, _)) => {
                    n += 1;
                    // The label may itself contain text, keep scanning it.
                    i = url_end;
                }
                None => i += 1,
            }
        } else if let Some(end) = bare_url_at(markup, i) {
            n += 1;
            i = end;
        } else {
            i += rest.chars().next().map_or(1, char::len_utf8);
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: Vec<CanonicalTitle>) -> Vec<String> {
        v.into_iter().map(CanonicalTitle::into_string).collect()
    }

    #[test]
    fn wikilink_examples() {
        assert_eq!(
            names(extract_wikilinks("[[Beta]] and [[Gamma|G]]")),
            ["Beta", "Gamma"]
        );
        assert!(extract_wikilinks("[[Category:X]]").is_empty());
        assert_eq!(names(extract_wikilinks("[[Beta#Part]]")), ["Beta"]);
    }

    #[test]
    fn exclusions() {
        let m = "[[File:x.jpg|thumb|A [[Nested]] caption]] [[fr:Paris]] [[:Category:Y]] \
                 [[User:Bob]] [[wikt:word]] [[#Section]] [[ ]] [[Re:Zero]] [[simple:Foo]]";
        assert_eq!(names(extract_wikilinks(m)), ["Nested", "Re:Zero"]);
    }

    #[test]
    fn duplicates_and_cleaning() {
        let m = "[[a]] [[A]] [[a b|x]] [[ A_b ]] <!-- [[Hidden]] --> [[Unclosed";
        assert_eq!(names(extract_wikilinks(m)), ["A", "A", "A_b", "A_b"]);
        assert_eq!(unique_wikilinks(m).len(), 2);
    }

    #[test]
    fn links_inside_templates_count() {
        assert_eq!(names(extract_wikilinks("{{Infobox|x=[[Foo]]}}")), ["Foo"]);
    }

    #[test]
    fn external_examples() {
        assert_eq!(extract_external_links("[http://a.com x] text"), 1);
        assert_eq!(extract_external_links("see http://a.com"), 1);
        assert_eq!(extract_external_links("[[Beta]]"), 0);
    }

    #[test]
    fn external_edge_cases() {
        assert_eq!(
            extract_external_links("[https://a.org/x?y=1 label] and https://b.org"),
            2
        );
        assert_eq!(
            extract_external_links("{{cite web|url=http://c.org|title=T}}"),
            1
        );
        assert_eq!(extract_external_links("<!-- http://x.org -->"), 0);
        assert_eq!(extract_external_links("[//proto.rel x]"), 1);
        assert_eq!(extract_external_links("[mailto:x@y.z]"), 0);
        assert_eq!(extract_external_links("http:// nothing"), 0);
        assert_eq!(extract_external_links("[http://unclosed"), 1);
    }
}
