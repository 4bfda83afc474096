use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::logstore::title::{CanonicalTitle, DEFAULT_NAMESPACES};

/// One record of an hourly pagecounts file: `project title count bytes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawLogLine<'a> {
    pub project: &'a str,
    pub title: &'a str,
    pub count: u64,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MalformedLine {
    #[error("expected 4 space-separated fields, found {0}")]
    FieldCount(usize),
    #[error("empty field")]
    EmptyField,
    #[error("non-numeric count or bytes field")]
    NotANumber,
    #[error("line is not valid UTF-8")]
    Utf8,
}

/// Splits a log line on single spaces into exactly four fields.
///
/// A trailing `\n` or `\r\n` is ignored. Titles may be percent-encoded but
/// must be valid UTF-8 as bytes.
pub fn parse_line(line: &[u8]) -> std::result::Result<RawLogLine<'_>, MalformedLine> {
    let line = line.strip_suffix(b"\n").unwrap_or(line);
    let line = line.strip_suffix(b"\r").unwrap_or(line);

    let mut fields: [&[u8]; 4] = [&[]; 4];
    let mut n = 0;
    for f in line.split(|&b| b == b' ') {
        if n < 4 {
            fields[n] = f;
        }
        n += 1;
    }
    if n != 4 {
        return Err(MalformedLine::FieldCount(n));
    }
    if fields.iter().any(|f| f.is_empty()) {
        return Err(MalformedLine::EmptyField);
    }
    let count = parse_u64(fields[2]).ok_or(MalformedLine::NotANumber)?;
    let bytes = parse_u64(fields[3]).ok_or(MalformedLine::NotANumber)?;
    let project = std::str::from_utf8(fields[0]).map_err(|_| MalformedLine::Utf8)?;
    let title = std::str::from_utf8(fields[1]).map_err(|_| MalformedLine::Utf8)?;
    Ok(RawLogLine {
        project,
        title,
        count,
        bytes,
    })
}

fn parse_u64(digits: &[u8]) -> Option<u64> {
    if digits.is_empty() || digits.len() > 20 {
        return None;
    }
    let mut v: u64 = 0;
    for &d in digits {
        if !d.is_ascii_digit() {
            return None;
        }
        v = v.checked_mul(10)?.checked_add(u64::from(d - b'0'))?;
    }
    Some(v)
}

/// Which entries survive the filter stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterConfig {
    pub project: String,
    pub namespaces: Vec<String>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            project: "en".to_string(),
            namespaces: DEFAULT_NAMESPACES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl FilterConfig {
    /// Parses the filter file: the first meaningful line is the project
    /// code, every following one a namespace prefix. Blank lines and lines
    /// starting with `;` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with(';'));
        let project = lines
            .next()
            .ok_or_else(|| Error::Config("filter file names no project code".into()))?
            .to_string();
        if project.contains(' ') {
            return Err(Error::Config(format!("bad project code {project:?}")));
        }
        let namespaces = lines
            .map(|l| {
                let l = l.replace(' ', "_");
                if l.ends_with(':') {
                    l
                } else {
                    format!("{l}:")
                }
            })
            .collect();
        Ok(FilterConfig {
            project,
            namespaces,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn project_matches(&self, project: &str) -> bool {
        project == self.project
    }

    pub fn in_excluded_namespace(&self, title: &CanonicalTitle) -> bool {
        self.namespaces.iter().any(|ns| title.has_prefix_ci(ns))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterOutcome {
    Keep(CanonicalTitle),
    WrongProject,
    BadTitle,
    OtherNamespace,
}

/// Project check, title cleaning, then namespace check.
pub fn filter_entry(line: &RawLogLine<'_>, config: &FilterConfig) -> FilterOutcome {
    if !config.project_matches(line.project) {
        return FilterOutcome::WrongProject;
    }
    let Some(title) = CanonicalTitle::parse(line.title) else {
        return FilterOutcome::BadTitle;
    };
    if config.in_excluded_namespace(&title) {
        return FilterOutcome::OtherNamespace;
    }
    FilterOutcome::Keep(title)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_four_fields() {
        let l = parse_line(b"en Barack_Obama 12 345678").unwrap();
        assert_eq!(
            l,
            RawLogLine {
                project: "en",
                title: "Barack_Obama",
                count: 12,
                bytes: 345678
            }
        );
        assert_eq!(parse_line(b"de Berlin 7 100\r\n").unwrap().project, "de");
    }

    #[test]
    fn rejects_malformed() {
        assert_eq!(parse_line(b"en Foo 3"), Err(MalformedLine::FieldCount(3)));
        assert_eq!(parse_line(b"en Foo x 3"), Err(MalformedLine::NotANumber));
        assert_eq!(parse_line(b"en Foo -3 3"), Err(MalformedLine::NotANumber));
        assert_eq!(
            parse_line(b"en  Foo 3 3"),
            Err(MalformedLine::FieldCount(5))
        );
        assert_eq!(
            parse_line(b"en Foo 3 3 "),
            Err(MalformedLine::FieldCount(5))
        );
        assert_eq!(parse_line(b""), Err(MalformedLine::FieldCount(1)));
        assert_eq!(parse_line(b"en F\xffo 3 3"), Err(MalformedLine::Utf8));
        assert_eq!(
            parse_line(b"en Foo 99999999999999999999999 3"),
            Err(MalformedLine::NotANumber)
        );
    }

    #[test]
    fn filter_examples() {
        let cfg = FilterConfig::default();
        let mk = |p, t| RawLogLine {
            project: p,
            title: t,
            count: 1,
            bytes: 0,
        };
        assert!(matches!(
            filter_entry(&mk("en", "Physics"), &cfg),
            FilterOutcome::Keep(_)
        ));
        assert_eq!(
            filter_entry(&mk("en", "Talk:Physics"), &cfg),
            FilterOutcome::OtherNamespace
        );
        assert_eq!(
            filter_entry(&mk("fr", "Physique"), &cfg),
            FilterOutcome::WrongProject
        );
        assert_eq!(
            filter_entry(&mk("en", "%23Top"), &cfg),
            FilterOutcome::BadTitle
        );
    }

    #[test]
    fn filter_file_format() {
        let cfg = FilterConfig::parse("; comment\nen\nTalk:\nUser talk\n\n").unwrap();
        assert_eq!(cfg.project, "en");
        assert_eq!(cfg.namespaces, vec!["Talk:", "User_talk:"]);
        assert!(FilterConfig::parse("\n;only comments\n").is_err());
    }
}
