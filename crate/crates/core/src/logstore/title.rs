//! Page title normalization.
//!
//! Every title that enters the pipeline (log lines, redirect tables, link
//! targets, hoax lists) goes through [`clean_title`] so that all sources agree
//! on one join key.

use std::borrow::Borrow;
use std::fmt;

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, CONTROLS};
use serde::{Deserialize, Serialize};

/// Characters that can never appear in a page title.
pub const ILLEGAL_CHARS: [char; 7] = ['<', '>', '[', ']', '{', '}', '|'];

/// A cleaned page identifier.
///
/// Never empty, never starts with `#`, holds no spaces, no control
/// characters and none of [`ILLEGAL_CHARS`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CanonicalTitle(String);

impl CanonicalTitle {
    /// Cleans `raw`; `None` means the title is discarded.
    pub fn parse(raw: &str) -> Option<Self> {
        match clean_title(raw) {
            Cleaned::Title(t) => Some(t),
            Cleaned::Discard => None,
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// Title with underscores shown as spaces, as used by the wiki API.
    pub fn display_form(&self) -> String {
        self.0.replace('_', " ")
    }

    /// Case-insensitive namespace prefix test (`"Talk:"` matches `"talk:Foo"`).
    pub fn has_prefix_ci(&self, prefix: &str) -> bool {
        let s = self.0.as_bytes();
        let p = prefix.as_bytes();
        s.len() >= p.len() && s[..p.len()].eq_ignore_ascii_case(p)
    }
}

impl fmt::Display for CanonicalTitle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for CanonicalTitle {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for CanonicalTitle {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<CanonicalTitle> for String {
    fn from(t: CanonicalTitle) -> String {
        t.0
    }
}

impl TryFrom<String> for CanonicalTitle {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        CanonicalTitle::parse(&s).ok_or_else(|| format!("illegal title {s:?}"))
    }
}

/// Outcome of [`clean_title`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cleaned {
    Title(CanonicalTitle),
    Discard,
}

impl Cleaned {
    pub fn title(self) -> Option<CanonicalTitle> {
        match self {
            Cleaned::Title(t) => Some(t),
            Cleaned::Discard => None,
        }
    }
}

/// Normalizes a raw title.
///
/// Steps, in order: percent-decode, spaces to underscores, trim and collapse
/// underscores, discard on a leading `#`, cut at an interior `#`, discard if
/// anything illegal remains, uppercase the first character.
pub fn clean_title(raw: &str) -> Cleaned {
    let decoded = match percent_decode_str(raw).decode_utf8() {
        Ok(s) => s,
        Err(_) => return Cleaned::Discard,
    };

    let mut s = String::with_capacity(decoded.len());
    for c in decoded.chars() {
        let c = if c == ' ' { '_' } else { c };
        if c == '_' && (s.is_empty() || s.ends_with('_')) {
            continue;
        }
        s.push(c);
    }

    if s.starts_with('#') {
        return Cleaned::Discard;
    }
    if let Some(pos) = s.find('#') {
        s.truncate(pos);
    }
    while s.ends_with('_') {
        s.pop();
    }
    if s.is_empty() {
        return Cleaned::Discard;
    }
    if s.chars()
        .any(|c| ILLEGAL_CHARS.contains(&c) || c.is_control())
    {
        return Cleaned::Discard;
    }
    // A surviving %XX would be decoded again on the next pass.
    if has_percent_escape(&s) {
        return Cleaned::Discard;
    }

    Cleaned::Title(CanonicalTitle(uppercase_first(s)))
}

fn has_percent_escape(s: &str) -> bool {
    s.as_bytes()
        .windows(3)
        .any(|w| w[0] == b'%' && w[1].is_ascii_hexdigit() && w[2].is_ascii_hexdigit())
}

fn uppercase_first(s: String) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(first) if first.is_lowercase() => {
            let mut out: String = first.to_uppercase().collect();
            out.push_str(chars.as_str());
            out
        }
        _ => s,
    }
}

/// Namespace prefixes of the English Wikipedia other than the main one.
pub const DEFAULT_NAMESPACES: &[&str] = &[
    "Media:",
    "Special:",
    "Talk:",
    "User:",
    "User_talk:",
    "Wikipedia:",
    "Wikipedia_talk:",
    "WP:",
    "WT:",
    "Project:",
    "Project_talk:",
    "File:",
    "File_talk:",
    "Image:",
    "Image_talk:",
    "MediaWiki:",
    "MediaWiki_talk:",
    "Template:",
    "Template_talk:",
    "Help:",
    "Help_talk:",
    "Category:",
    "Category_talk:",
    "Portal:",
    "Portal_talk:",
    "Book:",
    "Book_talk:",
    "Draft:",
    "Draft_talk:",
    "Education_Program:",
    "Education_Program_talk:",
    "TimedText:",
    "TimedText_talk:",
    "Module:",
    "Module_talk:",
    "Gadget:",
    "Gadget_talk:",
    "Gadget_definition:",
    "Gadget_definition_talk:",
    "Topic:",
];

/// True when the cleaned title lives outside the main namespace according to
/// [`DEFAULT_NAMESPACES`].
pub fn in_default_namespace(title: &CanonicalTitle) -> bool {
    DEFAULT_NAMESPACES.iter().any(|ns| title.has_prefix_ci(ns))
}

const FILENAME_UNSAFE: &AsciiSet = &CONTROLS
    .add(b'/')
    .add(b'\\')
    .add(b'%')
    .add(b':')
    .add(b'*')
    .add(b'?')
    .add(b'"')
    .add(b'<')
    .add(b'>')
    .add(b'|');

/// Filesystem-safe stem for a title. Decodes back via [`clean_title`].
pub fn title_to_filename(title: &CanonicalTitle) -> String {
    utf8_percent_encode(title.as_str(), FILENAME_UNSAFE).to_string()
}

/// Inverse of [`title_to_filename`].
pub fn title_from_filename(stem: &str) -> Option<CanonicalTitle> {
    CanonicalTitle::parse(stem)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clean(s: &str) -> Option<String> {
        clean_title(s).title().map(CanonicalTitle::into_string)
    }

    #[test]
    fn basic_examples() {
        assert_eq!(clean("Main%20Page").as_deref(), Some("Main_Page"));
        assert_eq!(clean("#History"), None);
        assert_eq!(clean("Foo#Bar").as_deref(), Some("Foo"));
        assert_eq!(clean("barack obama").as_deref(), Some("Barack_obama"));
    }

    #[test]
    fn residual_escape_is_discarded() {
        // "%2541" decodes to "%41", which is itself an escape.
        assert_eq!(clean("A%2541"), None);
        assert_eq!(clean("100%25").as_deref(), Some("100%"));
    }

    #[test]
    fn invalid_utf8_escape_is_discarded() {
        assert_eq!(clean("Caf%E9"), None);
        assert_eq!(clean("Caf%C3%A9").as_deref(), Some("Café"));
    }

    #[test]
    fn underscores_are_trimmed_and_collapsed() {
        assert_eq!(clean("  foo   bar_ ").as_deref(), Some("Foo_bar"));
        assert_eq!(clean("___"), None);
        assert_eq!(clean("Foo_#x").as_deref(), Some("Foo"));
    }

    #[test]
    fn namespace_prefix_is_case_insensitive() {
        let t = CanonicalTitle::parse("talk:Physics").unwrap();
        assert!(t.has_prefix_ci("Talk:"));
        assert!(in_default_namespace(&t));
        assert!(!in_default_namespace(
            &CanonicalTitle::parse("Talkative").unwrap()
        ));
    }

    #[test]
    fn filename_round_trip() {
        for raw in ["AC/DC", "100%", "Foo:Bar", "Ünïcode_title", "a?b*c"] {
            let t = CanonicalTitle::parse(raw).unwrap();
            let f = title_to_filename(&t);
            assert!(!f.contains('/'));
            assert_eq!(title_from_filename(&f), Some(t));
        }
    }
}
