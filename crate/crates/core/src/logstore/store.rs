use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate, NaiveDateTime, NaiveTime};
use flate2::read::MultiGzDecoder;
use log::{debug, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logstore::parse::{filter_entry, parse_line, FilterConfig, FilterOutcome};
use crate::logstore::redirect::RedirectTable;
use crate::logstore::title::CanonicalTitle;

pub const STORE_FORMAT: &str = "hoaxattn-store-1";
pub const SHARD_COUNT: usize = 16;
const MANIFEST: &str = "MANIFEST";

/// Daily view totals for one page. Dates absent from `counts` but inside
/// the store's coverage saw zero requests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrafficSeries {
    pub title: CanonicalTitle,
    pub counts: BTreeMap<NaiveDate, u64>,
}

impl TrafficSeries {
    pub fn on(&self, day: NaiveDate) -> u64 {
        self.counts.get(&day).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Coverage {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl Coverage {
    pub fn contains(&self, day: NaiveDate) -> bool {
        self.start <= day && day <= self.end
    }

    fn union(self, other: Coverage) -> Coverage {
        Coverage {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }

    pub fn days(&self) -> i64 {
        (self.end - self.start).num_days() + 1
    }
}

/// Line accounting for one or more ingested files.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct IngestTallies {
    pub files: u64,
    pub unreadable_files: u64,
    pub lines: u64,
    pub kept: u64,
    pub malformed: u64,
    pub wrong_project: u64,
    pub bad_title: u64,
    pub other_namespace: u64,
    pub kept_views: u64,
}

impl IngestTallies {
    fn add(&mut self, o: &IngestTallies) {
        self.files += o.files;
        self.unreadable_files += o.unreadable_files;
        self.lines += o.lines;
        self.kept += o.kept;
        self.malformed += o.malformed;
        self.wrong_project += o.wrong_project;
        self.bad_title += o.bad_title;
        self.other_namespace += o.other_namespace;
        self.kept_views += o.kept_views;
    }

    fn fields(&self) -> [(&'static str, u64); 9] {
        [
            ("files", self.files),
            ("unreadable_files", self.unreadable_files),
            ("lines", self.lines),
            ("kept", self.kept),
            ("malformed", self.malformed),
            ("wrong_project", self.wrong_project),
            ("bad_title", self.bad_title),
            ("other_namespace", self.other_namespace),
            ("kept_views", self.kept_views),
        ]
    }

    fn set(&mut self, key: &str, v: u64) -> bool {
        let slot = match key {
            "files" => &mut self.files,
            "unreadable_files" => &mut self.unreadable_files,
            "lines" => &mut self.lines,
            "kept" => &mut self.kept,
            "malformed" => &mut self.malformed,
            "wrong_project" => &mut self.wrong_project,
            "bad_title" => &mut self.bad_title,
            "other_namespace" => &mut self.other_namespace,
            "kept_views" => &mut self.kept_views,
            _ => return false,
        };
        *slot = v;
        true
    }
}

/// Per-title daily traffic, immutable once built.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TrafficStore {
    series: BTreeMap<CanonicalTitle, TrafficSeries>,
    coverage: Option<Coverage>,
    tallies: IngestTallies,
}

/// Daily totals of a title set on each side of a reference day.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowTotals {
    pub before: Vec<u64>,
    pub after: Vec<u64>,
}

impl TrafficStore {
    pub fn coverage(&self) -> Option<Coverage> {
        self.coverage
    }

    pub fn tallies(&self) -> &IngestTallies {
        &self.tallies
    }

    pub fn series(&self, title: &CanonicalTitle) -> Option<&TrafficSeries> {
        self.series.get(title)
    }

    pub fn iter(&self) -> impl Iterator<Item = &TrafficSeries> {
        self.series.values()
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn total_views(&self) -> u64 {
        self.series.values().map(TrafficSeries::total).sum()
    }

    /// Summed daily traffic of `titles` over `span` days before and after
    /// `day0`. `day0` itself belongs to neither window.
    pub fn window_totals<'a, I>(
        &self,
        titles: I,
        day0: NaiveDate,
        span: u32,
    ) -> Result<WindowTotals>
    where
        I: IntoIterator<Item = &'a CanonicalTitle>,
    {
        let cov = self.coverage.ok_or(Error::NoCoverage)?;
        let span_days = Duration::days(i64::from(span));
        let first = day0 - span_days;
        let last = day0 + span_days;
        for day in [first, last] {
            if !cov.contains(day) {
                return Err(Error::OutOfCoverage {
                    day,
                    start: cov.start,
                    end: cov.end,
                });
            }
        }
        let span = span as usize;
        let mut before = vec![0u64; span];
        let mut after = vec![0u64; span];
        for title in titles {
            let Some(s) = self.series.get(title) else {
                continue;
            };
            for (day, &n) in s.counts.range(first..=last) {
                let offset = (*day - day0).num_days();
                if offset < 0 {
                    before[(offset + span as i64) as usize] += n;
                } else if offset > 0 {
                    after[(offset - 1) as usize] += n;
                }
            }
        }
        Ok(WindowTotals { before, after })
    }

    fn merge_file(&mut self, day: NaiveDate, counts: HashMap<CanonicalTitle, u64>) {
        for (title, n) in counts {
            let s = self
                .series
                .entry(title)
                .or_insert_with_key(|t| TrafficSeries {
                    title: t.clone(),
                    counts: BTreeMap::new(),
                });
            *s.counts.entry(day).or_insert(0) += n;
        }
    }

    fn extend_coverage(&mut self, day: NaiveDate) {
        let c = Coverage {
            start: day,
            end: day,
        };
        self.coverage = Some(match self.coverage {
            Some(prev) => prev.union(c),
            None => c,
        });
    }

    /// Builds a store directly from daily counts, mostly for tests and
    /// synthetic data.
    pub fn from_daily<I>(coverage: Coverage, rows: I) -> Self
    where
        I: IntoIterator<Item = (CanonicalTitle, NaiveDate, u64)>,
    {
        let mut store = TrafficStore {
            coverage: Some(coverage),
            ..Default::default()
        };
        for (title, day, n) in rows {
            if n == 0 {
                continue;
            }
            let mut m = HashMap::new();
            m.insert(title, n);
            store.merge_file(day, m);
            store.tallies.kept_views += n;
        }
        store
    }

    /// Writes the store as sorted TSV shards plus a manifest. Output is a
    /// pure function of the store contents.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut shards = vec![String::new(); SHARD_COUNT];
        for s in self.series.values() {
            let buf = &mut shards[shard_of(s.title.as_str())];
            for (day, n) in &s.counts {
                let _ = writeln!(buf, "{}\t{}\t{}", s.title, day, n);
            }
        }
        for (i, body) in shards.iter().enumerate() {
            let path = dir.join(shard_name(i));
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }

        let mut m = String::new();
        let _ = writeln!(m, "format\t{STORE_FORMAT}");
        match self.coverage {
            Some(c) => {
                let _ = writeln!(m, "coverage_start\t{}", c.start);
                let _ = writeln!(m, "coverage_end\t{}", c.end);
            }
            None => {
                let _ = writeln!(m, "coverage_start\t-");
                let _ = writeln!(m, "coverage_end\t-");
            }
        }
        let _ = writeln!(m, "shards\t{SHARD_COUNT}");
        let _ = writeln!(m, "titles\t{}", self.series.len());
        for (k, v) in self.tallies.fields() {
            let _ = writeln!(m, "{k}\t{v}");
        }
        let path = dir.join(MANIFEST);
        fs::write(&path, m).map_err(|e| Error::io(&path, e))
    }

    pub fn read_dir(dir: &Path) -> Result<Self> {
        let mpath = dir.join(MANIFEST);
        let text = fs::read_to_string(&mpath).map_err(|e| Error::io(&mpath, e))?;
        let mut store = TrafficStore::default();
        let mut start = None;
        let mut end = None;
        let mut shards = None;
        for (i, line) in text.lines().enumerate() {
            let bad = |why: &str| Error::malformed(&mpath, i + 1, why.to_string());
            let (k, v) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected key<TAB>value"))?;
            match k {
                "format" if v != STORE_FORMAT => return Err(bad("unknown store format")),
                "format" | "titles" => {}
                "coverage_start" | "coverage_end" => {
                    let d = if v == "-" {
                        None
                    } else {
                        Some(v.parse::<NaiveDate>().map_err(|_| bad("bad date"))?)
                    };
                    if k == "coverage_start" {
                        start = d;
                    } else {
                        end = d;
                    }
                }
                "shards" => shards = Some(v.parse::<usize>().map_err(|_| bad("bad shard count"))?),
                _ => {
                    let n = v.parse::<u64>().map_err(|_| bad("bad tally"))?;
                    if !store.tallies.set(k, n) {
                        return Err(bad("unknown manifest key"));
                    }
                }
            }
        }
        store.coverage = match (start, end) {
            (Some(start), Some(end)) if start <= end => Some(Coverage { start, end }),
            (None, None) => None,
            _ => return Err(Error::malformed(&mpath, 0, "inconsistent coverage")),
        };
        let shards = shards.ok_or_else(|| Error::malformed(&mpath, 0, "missing shard count"))?;
        for i in 0..shards {
            let path = dir.join(shard_name(i));
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            for (ln, line) in text.lines().enumerate() {
                let bad = || Error::malformed(&path, ln + 1, "expected title<TAB>date<TAB>count");
                let mut cols = line.split('\t');
                let (Some(t), Some(d), Some(n), None) =
                    (cols.next(), cols.next(), cols.next(), cols.next())
                else {
                    return Err(bad());
                };
                let title = CanonicalTitle::parse(t)
                    .filter(|c| c.as_str() == t)
                    .ok_or_else(bad)?;
                let day = d.parse::<NaiveDate>().map_err(|_| bad())?;
                let n = n.parse::<u64>().map_err(|_| bad())?;
                let s = store
                    .series
                    .entry(title)
                    .or_insert_with_key(|t| TrafficSeries {
                        title: t.clone(),
                        counts: BTreeMap::new(),
                    });
                if s.counts.insert(day, n).is_some() {
                    return Err(Error::malformed(&path, ln + 1, "duplicate title/date row"));
                }
            }
        }
        Ok(store)
    }
}

fn shard_name(i: usize) -> String {
    format!("shard-{i:02}.tsv")
}

fn shard_of(title: &str) -> usize {
    // FNV-1a, stable across platforms and runs.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in title.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x100000001b3);
    }
    (h % SHARD_COUNT as u64) as usize
}

/// Parses the UTC hour from `pagecounts-YYYYMMDD-HHMMSS[.gz]`.
pub fn hour_from_filename(name: &str) -> Option<NaiveDateTime> {
    let rest = name.strip_prefix("pagecounts-")?;
    let stamp = rest.strip_suffix(".gz").unwrap_or(rest);
    let (date, time) = stamp.split_once('-')?;
    if date.len() != 8 || time.len() != 6 || !time.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let day = NaiveDate::parse_from_str(date, "%Y%m%d").ok()?;
    let hour: u32 = time[..2].parse().ok()?;
    let time = NaiveTime::from_hms_opt(hour, 0, 0)?;
    Some(day.and_time(time))
}

/// Hourly log files in `dir`, sorted by name. Other files are ignored.
pub fn discover_log_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let name = entry.file_name();
        match name.to_str().and_then(hour_from_filename) {
            Some(_) if path.is_file() => out.push(path),
            _ => debug!("skipping {}", path.display()),
        }
    }
    out.sort();
    Ok(out)
}

/// Outcome of ingesting a single hourly file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileReport {
    pub file: String,
    pub hour: Option<NaiveDateTime>,
    pub tallies: IngestTallies,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct IngestOutcome {
    pub store: TrafficStore,
    pub files: Vec<FileReport>,
}

struct FileResult {
    report: FileReport,
    counts: HashMap<CanonicalTitle, u64>,
}

fn read_log(path: &Path) -> std::io::Result<Vec<u8>> {
    let file = File::open(path)?;
    let mut buf = Vec::new();
    if path.extension().is_some_and(|e| e == "gz") {
        MultiGzDecoder::new(BufReader::new(file)).read_to_end(&mut buf)?;
    } else {
        BufReader::new(file).read_to_end(&mut buf)?;
    }
    Ok(buf)
}

/// Aggregates the lines of one log into per-title totals.
pub fn aggregate_lines<R: BufRead>(
    mut reader: R,
    table: &RedirectTable,
    config: &FilterConfig,
) -> std::io::Result<(HashMap<CanonicalTitle, u64>, IngestTallies)> {
    let mut counts: HashMap<CanonicalTitle, u64> = HashMap::new();
    let mut t = IngestTallies::default();
    let mut line = Vec::with_capacity(256);
    loop {
        line.clear();
        if reader.read_until(b'\n', &mut line)? == 0 {
            break;
        }
        t.lines += 1;
        let raw = match parse_line(&line) {
            Ok(raw) => raw,
            Err(_) => {
                t.malformed += 1;
                continue;
            }
        };
        match filter_entry(&raw, config) {
            FilterOutcome::Keep(title) => {
                t.kept += 1;
                t.kept_views += raw.count;
                let title = match table.resolve_str(title.as_str()) {
                    Some(target) => target.clone(),
                    None => title,
                };
                *counts.entry(title).or_insert(0) += raw.count;
            }
            FilterOutcome::WrongProject => t.wrong_project += 1,
            FilterOutcome::BadTitle => t.bad_title += 1,
            FilterOutcome::OtherNamespace => t.other_namespace += 1,
        }
    }
    Ok((counts, t))
}

fn ingest_one(path: &Path, table: &RedirectTable, config: &FilterConfig) -> FileResult {
    let file = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let hour = hour_from_filename(&file);
    let failed = |error: String| FileResult {
        report: FileReport {
            file: file.clone(),
            hour,
            tallies: IngestTallies {
                unreadable_files: 1,
                ..Default::default()
            },
            error: Some(error),
        },
        counts: HashMap::new(),
    };
    if hour.is_none() {
        return failed("file name carries no pagecounts-YYYYMMDD-HHMMSS stamp".into());
    }
    let data = match read_log(path) {
        Ok(d) => d,
        Err(e) => return failed(e.to_string()),
    };
    match aggregate_lines(&data[..], table, config) {
        Ok((counts, mut tallies)) => {
            tallies.files = 1;
            FileResult {
                report: FileReport {
                    file,
                    hour,
                    tallies,
                    error: None,
                },
                counts,
            }
        }
        Err(e) => failed(e.to_string()),
    }
}

/// Parses, filters, cleans and redirect-resolves hourly logs into a store.
///
/// Files are processed in parallel and merged by summation, so the result
/// does not depend on the order of `files`. Unreadable files are reported
/// and skipped.
pub fn ingest(files: &[PathBuf], table: &RedirectTable, config: &FilterConfig) -> IngestOutcome {
    let mut results: Vec<FileResult> = files
        .par_iter()
        .map(|p| ingest_one(p, table, config))
        .collect();
    results.sort_by(|a, b| a.report.file.cmp(&b.report.file));

    let mut store = TrafficStore::default();
    let mut reports = Vec::with_capacity(results.len());
    for r in results {
        store.tallies.add(&r.report.tallies);
        if let Some(err) = &r.report.error {
            warn!("{}: {err}", r.report.file);
        } else if let Some(hour) = r.report.hour {
            store.extend_coverage(hour.date());
            store.merge_file(hour.date(), r.counts);
        }
        reports.push(r.report);
    }
    IngestOutcome {
        store,
        files: reports,
    }
}

/// Writes a log file in the hourly format, gzip-compressed when the name
/// ends in `.gz`.
pub fn write_log_file<'a, I>(path: &Path, lines: I) -> Result<()>
where
    I: IntoIterator<Item = &'a str>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w: Box<dyn Write> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(flate2::write::GzEncoder::new(
            file,
            flate2::Compression::fast(),
        ))
    } else {
        Box::new(std::io::BufWriter::new(file))
    };
    for l in lines {
        w.write_all(l.as_bytes()).map_err(|e| Error::io(path, e))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `pagecounts-YYYYMMDD-HH0000` for the given hour.
pub fn log_filename(hour: NaiveDateTime) -> String {
    hour.format("pagecounts-%Y%m%d-%H0000").to_string()
}
