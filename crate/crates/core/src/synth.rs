//! Synthetic worlds with a known attention effect.
//!
//! [`generate`] writes hourly log files, a redirect table, a filter file,
//! a hoax list, a creation list, article fixtures and a run config. Every
//! article links to its own set of neighbor pages. Neighbor traffic is
//! Poisson with a per-page rate; for hoaxes the rate is multiplied by
//! `effect` on the `span` days before creation. With `effect = 1` there is
//! no planted difference between hoaxes and their cohorts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Duration, NaiveDate, NaiveTime, Utc};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::corpus::{write_creations, write_hoaxes, ArticleMeta, CreationEntry};
use crate::error::{Error, Result};
use crate::logstore::{log_filename, write_log_file, CanonicalTitle};
use crate::pipeline::RunConfig;
use crate::wikitext::ArticleSource;

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedSpec {
    pub hoaxes: usize,
    pub cohort_size: usize,
    pub neighbors: usize,
    /// Multiplier on hoax-neighbor traffic in the days before creation.
    pub effect: f64,
    /// Mean daily views of a neighbor page, before the per-page factor.
    pub base_daily: f64,
    pub start: NaiveDate,
    pub days: u32,
    pub span: u32,
    /// Redirect entries added to each cohort's creation day.
    pub redirects_per_cohort: usize,
    /// Extra hoaxes created long before the logs start.
    pub out_of_coverage_hoaxes: usize,
    /// Filtered or malformed lines added to every hourly file.
    pub noise_lines_per_file: usize,
    /// Every `gzip_every`-th hourly file is gzip-compressed (0 = none).
    pub gzip_every: usize,
    pub resamples: usize,
    pub seed: u64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        PlantedSpec {
            hoaxes: 20,
            cohort_size: 50,
            neighbors: 3,
            effect: 3.0,
            base_daily: 40.0,
            start: NaiveDate::from_ymd_opt(2010, 3, 1).expect("valid date"),
            days: 36,
            span: 7,
            redirects_per_cohort: 5,
            out_of_coverage_hoaxes: 0,
            noise_lines_per_file: 3,
            gzip_every: 6,
            resamples: 10_000,
            seed: 1,
        }
    }
}

impl PlantedSpec {
    /// Same world with no planted effect.
    pub fn null(self) -> Self {
        PlantedSpec {
            effect: 1.0,
            ..self
        }
    }
}

/// What was written, for checking pipeline output against.
#[derive(Debug, Clone)]
pub struct PlantedWorld {
    pub root: PathBuf,
    pub config_path: PathBuf,
    pub config: RunConfig,
    /// Hoaxes whose windows lie inside the logs, sorted.
    pub planted_hoaxes: Vec<CanonicalTitle>,
    pub out_of_coverage_hoaxes: Vec<CanonicalTitle>,
    pub log_files: usize,
    pub log_lines: usize,
}

struct Article {
    meta: ArticleMeta,
    neighbors: Vec<CanonicalTitle>,
    /// Aliases that redirect to a neighbor, used in links and logs.
    aliases: Vec<Option<CanonicalTitle>>,
    rates: Vec<f64>,
}

fn t(s: &str) -> CanonicalTitle {
    CanonicalTitle::parse(s).expect("generated titles are valid")
}

const FILLER: &[&str] = &[
    "river", "valley", "history", "council", "railway", "village", "district", "museum",
    "festival", "league", "season", "album", "species", "island", "church", "bridge", "school",
    "market", "novel", "station",
];

fn markup(a: &Article, is_hoax: bool, rng: &mut ChaCha8Rng) -> String {
    let mut m = String::new();
    let name = a.meta.title.display_form();
    if !is_hoax {
        let _ = writeln!(
            m,
            "{{{{Infobox place|name={name}|established={}}}}}",
            rng.random_range(1800..2000)
        );
    }
    let _ = write!(m, "'''{name}''' is a");
    let words = if is_hoax {
        rng.random_range(15..40)
    } else {
        rng.random_range(30..160)
    };
    for (i, n) in a.neighbors.iter().enumerate() {
        for _ in 0..words / a.neighbors.len() {
            m.push(' ');
            m.push_str(FILLER[rng.random_range(0..FILLER.len())]);
        }
        let target = a.aliases[i].as_ref().unwrap_or(n).display_form();
        if i % 2 == 1 {
            let _ = write!(
                m,
                " [[{target}|{}]]",
                FILLER[rng.random_range(0..FILLER.len())]
            );
        } else {
            let _ = write!(m, " [[{target}]]");
        }
    }
    m.push_str(".\n\n== History ==\n");
    if !is_hoax || rng.random_bool(0.3) {
        let _ = writeln!(
            m,
            "Founded long ago.<ref>[http://example.org/{} Source]</ref> See http://example.com/{}.",
            rng.random_range(0..1000),
            rng.random_range(0..1000)
        );
    }
    m.push_str("\n[[Category:Planted articles]]\n");
    m
}

fn noise_line(rng: &mut ChaCha8Rng) -> String {
    match rng.random_range(0..5) {
        0 => format!("de Berlin {} 100", rng.random_range(1..20)),
        1 => format!("en Talk:Planted_discussion {} 0", rng.random_range(1..5)),
        2 => "en truncated_line".to_string(),
        3 => format!("en Bad[title] {} 0", rng.random_range(1..5)),
        _ => format!("en #Anchor_only {} 0", rng.random_range(1..5)),
    }
}

/// How a neighbor view appears in the log: canonical, lowercase first
/// letter, percent-encoded, with a fragment, or via a redirect alias.
fn log_title(
    title: &CanonicalTitle,
    alias: Option<&CanonicalTitle>,
    rng: &mut ChaCha8Rng,
) -> String {
    let s = title.as_str();
    match rng.random_range(0..10) {
        0 => {
            let mut c = s.chars();
            let first = c
                .next()
                .map(|f| f.to_lowercase().collect::<String>())
                .unwrap_or_default();
            first + c.as_str()
        }
        1 => s.replace('_', "%20"),
        2 => format!("{s}#Overview"),
        3 | 4 if alias.is_some() => alias.map(|a| a.to_string()).unwrap_or_default(),
        _ => s.to_string(),
    }
}

/// Splits `n` views over at most four distinct hours.
fn split_hours(n: u64, rng: &mut ChaCha8Rng) -> Vec<(usize, u64)> {
    if n == 0 {
        return Vec::new();
    }
    let parts = rng.random_range(1..=4u64.min(n)) as usize;
    let hours = sample(rng, 24, parts).into_vec();
    let mut cuts: Vec<u64> = (0..parts - 1)
        .map(|_| rng.random_range(1..n.max(2)))
        .collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for (i, h) in hours.into_iter().enumerate() {
        let end = if i + 1 == parts { n } else { cuts[i].max(prev) };
        if end > prev {
            out.push((h, end - prev));
        }
        prev = end;
    }
    out
}

fn make_article(
    spec: &PlantedSpec,
    title: CanonicalTitle,
    created_at: DateTime<Utc>,
    is_hoax: bool,
    tag: &str,
    rng: &mut ChaCha8Rng,
    redirects: &mut Vec<(CanonicalTitle, CanonicalTitle)>,
) -> Article {
    let mut neighbors = Vec::new();
    let mut aliases = Vec::new();
    let mut rates = Vec::new();
    for k in 0..spec.neighbors {
        let n = t(&format!("Topic_{tag}_{k}"));
        let alias = if rng.random_bool(0.25) {
            let a = t(&format!("Topic_{tag}_{k}_alias"));
            redirects.push((a.clone(), n.clone()));
            Some(a)
        } else {
            None
        };
        neighbors.push(n);
        aliases.push(alias);
        rates.push(spec.base_daily * rng.random_range(0.5..2.0));
    }
    Article {
        meta: ArticleMeta {
            title,
            created_at,
            is_redirect: false,
            is_hoax,
        },
        neighbors,
        aliases,
        rates,
    }
}

/// Writes a planted world under `root` and returns where everything is.
pub fn generate(root: &Path, spec: &PlantedSpec) -> Result<PlantedWorld> {
    if spec.days < 2 * spec.span + 2 {
        return Err(Error::Config(format!(
            "{} days cannot hold two {}-day windows",
            spec.days, spec.span
        )));
    }
    if spec.hoaxes == 0 || spec.cohort_size == 0 || spec.neighbors == 0 {
        return Err(Error::Config(
            "hoaxes, cohort_size and neighbors must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let logs = root.join("logs");
    let articles_dir = root.join("articles");
    for d in [&logs, &articles_dir] {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }

    let at = |day: NaiveDate, rng: &mut ChaCha8Rng| {
        day.and_time(
            NaiveTime::from_hms_opt(rng.random_range(0..24), rng.random_range(0..60), 0)
                .expect("valid"),
        )
        .and_utc()
    };
    let span = i64::from(spec.span);
    let first_day0 = span + 1;
    let last_day0 = i64::from(spec.days) - span - 2;
    // Distinct creation days when they fit, so each cohort is its own.
    let slots = (last_day0 - first_day0 + 1) as usize;
    let day0s: Vec<i64> = if spec.hoaxes <= slots {
        sample(&mut rng, slots, spec.hoaxes)
            .into_iter()
            .map(|o| first_day0 + o as i64)
            .collect()
    } else {
        (0..spec.hoaxes)
            .map(|_| rng.random_range(first_day0..=last_day0))
            .collect()
    };

    let mut hoaxes = Vec::new();
    let mut articles: Vec<(Article, Option<usize>)> = Vec::new();
    let mut creations = Vec::new();
    let mut redirects: Vec<(CanonicalTitle, CanonicalTitle)> = Vec::new();
    let mut planted = Vec::new();
    let mut out_of_coverage = Vec::new();

    for i in 0..spec.hoaxes + spec.out_of_coverage_hoaxes {
        let inside = i < spec.hoaxes;
        let day = match day0s.get(i) {
            Some(&d) if inside => spec.start + Duration::days(d),
            _ => spec.start - Duration::days(60 + i as i64),
        };
        let hoax_title = t(&format!("Planted_hoax_{i:02}"));
        let created = at(day, &mut rng);
        let hoax = make_article(
            spec,
            hoax_title.clone(),
            created,
            true,
            &format!("h{i:02}"),
            &mut rng,
            &mut redirects,
        );
        if inside {
            planted.push(hoax_title.clone());
        } else {
            out_of_coverage.push(hoax_title.clone());
        }
        hoaxes.push(hoax.meta.clone());
        creations.push(CreationEntry {
            meta: hoax.meta.clone(),
            redirect_target: None,
        });
        articles.push((hoax, inside.then_some(i)));

        let size = if inside { spec.cohort_size } else { 3 };
        let mut members = Vec::new();
        for j in 0..size {
            let title = t(&format!("Cohort_{i:02}_member_{j:02}"));
            let created = at(day, &mut rng);
            let tag = format!("c{i:02}_{j:02}");
            let a = make_article(spec, title, created, false, &tag, &mut rng, &mut redirects);
            creations.push(CreationEntry {
                meta: a.meta.clone(),
                redirect_target: None,
            });
            members.push(a.meta.title.clone());
            articles.push((a, None));
        }
        for r in 0..spec.redirects_per_cohort {
            let target = members[rng.random_range(0..members.len())].clone();
            creations.push(CreationEntry {
                meta: ArticleMeta {
                    title: t(&format!("Cohort_{i:02}_redirect_{r:02}")),
                    created_at: at(day, &mut rng),
                    is_redirect: true,
                    is_hoax: false,
                },
                redirect_target: Some(target),
            });
        }
    }

    for (a, _) in &articles {
        ArticleSource::from_markup(a.meta.title.clone(), markup(a, a.meta.is_hoax, &mut rng))
            .save(&articles_dir)?;
    }

    // Daily neighbor traffic, split into hourly lines.
    let mut files = 0;
    let mut lines_written = 0;
    for d in 0..spec.days {
        let day = spec.start + Duration::days(i64::from(d));
        let mut hours: Vec<Vec<String>> = vec![Vec::new(); 24];
        for (a, hoax_idx) in &articles {
            let day0 = a.meta.creation_date();
            let offset = (day - day0).num_days();
            let boosted = hoax_idx.is_some() && (-span..0).contains(&offset);
            for (k, n) in a.neighbors.iter().enumerate() {
                let lambda = a.rates[k] * if boosted { spec.effect } else { 1.0 };
                let views = Poisson::new(lambda)
                    .map_err(|e| Error::Config(e.to_string()))?
                    .sample(&mut rng) as u64;
                for (h, c) in split_hours(views, &mut rng) {
                    let raw = log_title(n, a.aliases[k].as_ref(), &mut rng);
                    hours[h].push(format!("en {raw} {c} {}", c * 1000));
                }
            }
        }
        for (h, mut lines) in hours.into_iter().enumerate() {
            for _ in 0..spec.noise_lines_per_file {
                let pos = rng.random_range(0..=lines.len());
                lines.insert(pos, noise_line(&mut rng));
            }
            let hour = day.and_time(NaiveTime::from_hms_opt(h as u32, 0, 0).expect("valid hour"));
            let mut name = log_filename(hour);
            if spec.gzip_every > 0 && (d as usize * 24 + h).is_multiple_of(spec.gzip_every) {
                name.push_str(".gz");
            }
            write_log_file(&logs.join(name), lines.iter().map(String::as_str))?;
            files += 1;
            lines_written += lines.len();
        }
    }

    let redirect_tsv: String = redirects
        .iter()
        .map(|(a, b)| format!("{a}\t{b}\n"))
        .collect();
    let rpath = root.join("redirects.tsv");
    fs::write(&rpath, redirect_tsv).map_err(|e| Error::io(&rpath, e))?;
    let fpath = root.join("filter.txt");
    fs::write(
        &fpath,
        "en\nTalk\nUser\nWikipedia\nFile\nSpecial\nCategory\nTemplate\n",
    )
    .map_err(|e| Error::io(&fpath, e))?;
    write_hoaxes(&root.join("hoaxes.csv"), &hoaxes)?;
    write_creations(&root.join("creations.csv"), &creations)?;

    let mut config = RunConfig {
        logs: Some("logs".into()),
        redirects: Some("redirects.tsv".into()),
        filter: Some("filter.txt".into()),
        hoaxes: Some("hoaxes.csv".into()),
        creations: Some("creations.csv".into()),
        articles: Some("articles".into()),
        out: "out".into(),
        span: spec.span,
        resamples: spec.resamples,
        seed: spec.seed,
        ..Default::default()
    };
    let config_path = root.join("hoaxattn.toml");
    fs::write(&config_path, config.to_toml()).map_err(|e| Error::io(&config_path, e))?;
    config.rebase(root);

    planted.sort();
    out_of_coverage.sort();
    Ok(PlantedWorld {
        root: root.to_path_buf(),
        config_path,
        config,
        planted_hoaxes: planted,
        out_of_coverage_hoaxes: out_of_coverage,
        log_files: files,
        log_lines: lines_written,
    })
}

/// One line of a synthetic hourly log and what ingest should make of it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LineKind {
    /// Kept; views belong to this canonical page after redirects.
    Kept {
        page: CanonicalTitle,
        views: u64,
    },
    Malformed,
    WrongProject,
    BadTitle,
    OtherNamespace,
}

/// A single hourly log with every line category planted in known amounts,
/// plus the redirect pairs it relies on.
#[derive(Debug, Clone)]
pub struct NoisyLog {
    pub lines: Vec<String>,
    pub kinds: Vec<LineKind>,
    pub redirects: Vec<(CanonicalTitle, CanonicalTitle)>,
}

impl NoisyLog {
    pub fn count(&self, pred: impl Fn(&LineKind) -> bool) -> usize {
        self.kinds.iter().filter(|k| pred(k)).count()
    }

    /// Expected per-page totals, derived from the planted categories.
    pub fn expected_totals(&self) -> BTreeMap<CanonicalTitle, u64> {
        let mut m = BTreeMap::new();
        for k in &self.kinds {
            if let LineKind::Kept { page, views } = k {
                *m.entry(page.clone()).or_insert(0) += views;
            }
        }
        m
    }
}

/// Generates `n` log lines over `pages` distinct pages with a mix of
/// malformed, foreign-project, non-main-namespace, illegal-title and
/// redirected entries.
pub fn noisy_log(n: usize, pages: usize, seed: u64) -> NoisyLog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let canon: Vec<CanonicalTitle> = (0..pages).map(|i| t(&format!("Page_{i:05}"))).collect();
    let redirects: Vec<(CanonicalTitle, CanonicalTitle)> = (0..pages / 10)
        .map(|i| (t(&format!("Old_name_{i:05}")), canon[i * 10].clone()))
        .collect();
    let mut lines = Vec::with_capacity(n);
    let mut kinds = Vec::with_capacity(n);
    for _ in 0..n {
        let views = rng.random_range(1..500u64);
        let bytes = views * rng.random_range(100..5000u64);
        let roll = rng.random_range(0..100);
        let (line, kind) = match roll {
            0..=4 => {
                let bad = match rng.random_range(0..4) {
                    0 => format!("en Page_{:05} {views}", rng.random_range(0..pages)),
                    1 => format!("en Page_{:05} many {bytes}", rng.random_range(0..pages)),
                    2 => format!(
                        "en Page_{:05} {views} {bytes} extra",
                        rng.random_range(0..pages)
                    ),
                    _ => String::new(),
                };
                (bad, LineKind::Malformed)
            }
            5..=14 => {
                let proj = ["de", "fr", "en.b", "ja", "commons.m"][rng.random_range(0..5)];
                (
                    format!(
                        "{proj} Page_{:05} {views} {bytes}",
                        rng.random_range(0..pages)
                    ),
                    LineKind::WrongProject,
                )
            }
            15..=21 => {
                let ns = ["Talk", "User", "Wikipedia", "File", "Special", "Category"]
                    [rng.random_range(0..6)];
                (
                    format!(
                        "en {ns}:Page_{:05} {views} {bytes}",
                        rng.random_range(0..pages)
                    ),
                    LineKind::OtherNamespace,
                )
            }
            22..=26 => {
                let c = ['<', '>', '[', ']', '{', '}', '|'][rng.random_range(0..7)];
                let bad = if rng.random_bool(0.2) {
                    format!("#Page_{:05}", rng.random_range(0..pages))
                } else {
                    format!("Page{c}{:05}", rng.random_range(0..pages))
                };
                (format!("en {bad} {views} {bytes}"), LineKind::BadTitle)
            }
            27..=34 if !redirects.is_empty() => {
                let (src, dst) = &redirects[rng.random_range(0..redirects.len())];
                (
                    format!("en {src} {views} {bytes}"),
                    LineKind::Kept {
                        page: dst.clone(),
                        views,
                    },
                )
            }
            _ => {
                let i = rng.random_range(0..pages);
                let raw = match rng.random_range(0..6) {
                    0 => format!("page_{i:05}"),
                    1 => format!("Page%5F{i:05}"),
                    2 => format!("Page_{i:05}#History"),
                    _ => format!("Page_{i:05}"),
                };
                (
                    format!("en {raw} {views} {bytes}"),
                    LineKind::Kept {
                        page: canon[i].clone(),
                        views,
                    },
                )
            }
        };
        lines.push(line);
        kinds.push(kind);
    }
    NoisyLog {
        lines,
        kinds,
        redirects,
    }
}
