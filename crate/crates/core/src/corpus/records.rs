use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use log::warn;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logstore::title::CanonicalTitle;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ArticleMeta {
    pub title: CanonicalTitle,
    /// Timestamp of the first revision.
    pub created_at: DateTime<Utc>,
    pub is_redirect: bool,
    pub is_hoax: bool,
}

impl ArticleMeta {
    pub fn creation_date(&self) -> NaiveDate {
        self.created_at.date_naive()
    }
}

/// One row of a same-day creation list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CreationEntry {
    pub meta: ArticleMeta,
    pub redirect_target: Option<CanonicalTitle>,
}

pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(s.trim())
        .ok()
        .map(|d| d.with_timezone(&Utc))
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" | "" => Some(false),
        _ => None,
    }
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(f))
}

fn check_header(rdr: &mut csv::Reader<fs::File>, path: &Path, expected: &[&str]) -> Result<()> {
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Ok(());
    }
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::malformed(
            path,
            1,
            format!(
                "expected header {}, found {}",
                expected.join(","),
                got.join(",")
            ),
        ));
    }
    Ok(())
}

/// Reads the hoax list, a CSV with header `title,created_at`.
///
/// Any bad row is fatal. Repeated titles are kept once.
pub fn load_hoaxes(path: &Path) -> Result<Vec<ArticleMeta>> {
    let mut rdr = reader(path)?;
    check_header(&mut rdr, path, &["title", "created_at"])?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::malformed(path, line, e.to_string()))?;
        if rec.len() != 2 {
            return Err(Error::malformed(path, line, "expected 2 columns"));
        }
        let title = CanonicalTitle::parse(&rec[0])
            .ok_or_else(|| Error::malformed(path, line, format!("illegal title {:?}", &rec[0])))?;
        let created_at = parse_timestamp(&rec[1])
            .ok_or_else(|| Error::malformed(path, line, format!("bad timestamp {:?}", &rec[1])))?;
        if !seen.insert(title.clone()) {
            warn!("{}:{line}: duplicate hoax {title} ignored", path.display());
            continue;
        }
        out.push(ArticleMeta {
            title,
            created_at,
            is_redirect: false,
            is_hoax: true,
        });
    }
    Ok(out)
}

/// Reads one creation-list CSV (`title,created_at,is_redirect,redirect_target`).
pub fn load_creation_file(path: &Path) -> Result<Vec<CreationEntry>> {
    let mut rdr = reader(path)?;
    check_header(
        &mut rdr,
        path,
        &["title", "created_at", "is_redirect", "redirect_target"],
    )?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::malformed(path, line, e.to_string()))?;
        if rec.len() != 4 {
            return Err(Error::malformed(path, line, "expected 4 columns"));
        }
        let title = CanonicalTitle::parse(&rec[0])
            .ok_or_else(|| Error::malformed(path, line, format!("illegal title {:?}", &rec[0])))?;
        let created_at = parse_timestamp(&rec[1])
            .ok_or_else(|| Error::malformed(path, line, format!("bad timestamp {:?}", &rec[1])))?;
        let is_redirect = parse_bool(&rec[2])
            .ok_or_else(|| Error::malformed(path, line, format!("bad boolean {:?}", &rec[2])))?;
        let redirect_target = if rec[3].is_empty() {
            None
        } else {
            Some(CanonicalTitle::parse(&rec[3]).ok_or_else(|| {
                Error::malformed(path, line, format!("illegal redirect target {:?}", &rec[3]))
            })?)
        };
        out.push(CreationEntry {
            meta: ArticleMeta {
                title,
                created_at,
                is_redirect: is_redirect || redirect_target.is_some(),
                is_hoax: false,
            },
            redirect_target,
        });
    }
    Ok(out)
}

/// Reads a creation-list file, or every `*.csv` in a directory (sorted by
/// name), and flags entries whose title is a known hoax.
pub fn load_creations(path: &Path, hoaxes: &[ArticleMeta]) -> Result<Vec<CreationEntry>> {
    let files: Vec<PathBuf> = if path.is_dir() {
        let mut v: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        v.sort();
        v
    } else {
        vec![path.to_path_buf()]
    };
    let hoax_titles: HashSet<&CanonicalTitle> = hoaxes.iter().map(|h| &h.title).collect();
    let mut out = Vec::new();
    for f in files {
        for mut e in load_creation_file(&f)? {
            e.meta.is_hoax = hoax_titles.contains(&e.meta.title);
            out.push(e);
        }
    }
    Ok(out)
}

/// Writes entries in the creation-list format, sorted by title.
pub fn write_creations(path: &Path, entries: &[CreationEntry]) -> Result<()> {
    let mut sorted: Vec<&CreationEntry> = entries.iter().collect();
    sorted.sort_by(|a, b| a.meta.title.cmp(&b.meta.title));
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["title", "created_at", "is_redirect", "redirect_target"])?;
    for e in sorted {
        w.write_record([
            e.meta.title.as_str(),
            &format_timestamp(&e.meta.created_at),
            if e.meta.is_redirect { "true" } else { "false" },
            e.redirect_target.as_ref().map_or("", |t| t.as_str()),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes a hoax list in the `title,created_at` format.
pub fn write_hoaxes(path: &Path, hoaxes: &[ArticleMeta]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["title", "created_at"])?;
    for h in hoaxes {
        w.write_record([h.title.as_str(), &format_timestamp(&h.created_at)])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn hoaxes_load() {
        let f = file(
            "title,created_at\nFake thing,2008-03-01T10:00:00Z\nOther,2009-01-02T23:59:59+02:00\n",
        );
        let h = load_hoaxes(f.path()).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h[0].title.as_str(), "Fake_thing");
        assert_eq!(format_timestamp(&h[1].created_at), "2009-01-02T21:59:59Z");
        assert!(h.iter().all(|m| m.is_hoax));
    }

    #[test]
    fn empty_hoax_file() {
        assert!(load_hoaxes(file("").path()).unwrap().is_empty());
        assert!(load_hoaxes(file("title,created_at\n").path())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn bad_timestamp_reports_line() {
        let f = file("title,created_at\nA,2008-03-01T10:00:00Z\nB,yesterday\n");
        match load_hoaxes(f.path()) {
            Err(Error::MalformedRecord { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(load_hoaxes(file("name,when\nA,2008-03-01T10:00:00Z\n").path()).is_err());
    }

    #[test]
    fn creations_load_and_round_trip() {
        let f = file(
            "title,created_at,is_redirect,redirect_target\n\
             A,2008-03-01T01:00:00Z,false,\n\
             R,2008-03-01T02:00:00Z,true,A\n\
             H,2008-03-01T03:00:00Z,false,\n",
        );
        let hoax = ArticleMeta {
            title: CanonicalTitle::parse("H").unwrap(),
            created_at: parse_timestamp("2008-03-01T03:00:00Z").unwrap(),
            is_redirect: false,
            is_hoax: true,
        };
        let c = load_creations(f.path(), &[hoax]).unwrap();
        assert_eq!(c.len(), 3);
        assert!(c[1].meta.is_redirect);
        assert_eq!(c[1].redirect_target.as_ref().unwrap().as_str(), "A");
        assert!(c[2].meta.is_hoax);

        let out = tempfile::NamedTempFile::new().unwrap();
        write_creations(out.path(), &c).unwrap();
        let back = load_creation_file(out.path()).unwrap();
        assert_eq!(back.len(), 3);
        let r = back.iter().find(|e| e.meta.title.as_str() == "R").unwrap();
        assert_eq!(r.meta, c[1].meta);
    }
}
