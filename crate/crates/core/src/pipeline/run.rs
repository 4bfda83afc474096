use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::attention::{
    auto_range, bootstrap::summarize, bootstrap_means, cohort_d, delta_v, histogram, modified_z,
    AttentionScore, BootstrapSummary, CohortAttentionResult, FeatureZScore,
};
use crate::corpus::{
    build_cohort, by_creation_day, creation_redirects, fetch_live, format_timestamp,
    load_creations, load_hoaxes, neighbor_set, ArticleMeta, CohortRecord, CreationEntry,
    FetchReport,
};
use crate::error::{Error, Result};
use crate::logstore::CanonicalTitle;
use crate::logstore::{
    discover_log_files, ingest, Coverage, FilterConfig, IngestTallies, RedirectTable, TrafficStore,
};
use crate::pipeline::output::{opt_f64, write_csv, write_json};
use crate::pipeline::{count_reasons, Exclusion, Reason, RunConfig};
use crate::wikitext::{compute_features, ArticleFeatures, ArticleSource, Feature};

pub const RESULTS_HEADER: [&str; 5] = ["hoax_title", "delta_v", "cohort_mean", "cohort_n", "D"];
pub const SCORES_HEADER: [&str; 6] = [
    "hoax_title",
    "title",
    "role",
    "v_before",
    "v_after",
    "delta_v",
];
pub const HIST_HEADER: [&str; 3] = ["bin_low", "bin_high", "count"];

/// Redirects from the configured table plus those declared in creation
/// lists. The table file wins on conflicting sources.
pub fn load_redirects(cfg: &RunConfig, creations: &[CreationEntry]) -> Result<RedirectTable> {
    let base = match cfg.optional("redirects")? {
        Some(p) => RedirectTable::load(p)?,
        None => RedirectTable::default(),
    };
    let table = base.extended(creation_redirects(creations));
    if !table.broken_chains().is_empty() {
        warn!(
            "{} redirect chains cut (cycle or depth cap)",
            table.broken_chains().len()
        );
    }
    Ok(table)
}

/// Hoaxes, creation lists and the redirect table.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub hoaxes: Vec<ArticleMeta>,
    pub creations: Vec<CreationEntry>,
    pub redirects: RedirectTable,
}

impl Corpus {
    pub fn hoax_titles(&self) -> BTreeSet<CanonicalTitle> {
        self.hoaxes.iter().map(|h| h.title.clone()).collect()
    }
}

pub fn load_corpus(cfg: &RunConfig) -> Result<Corpus> {
    let mut hoaxes = load_hoaxes(cfg.require("hoaxes")?)?;
    hoaxes.sort_by(|a, b| a.title.cmp(&b.title));
    let creations = load_creations(cfg.require("creations")?, &hoaxes)?;
    let redirects = load_redirects(cfg, &creations)?;
    info!(
        "{} hoaxes, {} creation entries, {} redirects",
        hoaxes.len(),
        creations.len(),
        redirects.len()
    );
    Ok(Corpus {
        hoaxes,
        creations,
        redirects,
    })
}

/// One cohort per hoax, sorted by hoax title. Other known hoaxes created
/// the same day are never cohort members.
pub fn build_cohorts(
    corpus: &Corpus,
) -> Vec<(ArticleMeta, std::result::Result<CohortRecord, Exclusion>)> {
    let days = by_creation_day(&corpus.creations);
    let empty = Vec::new();
    corpus
        .hoaxes
        .iter()
        .map(|h| {
            let same_day = days.get(&h.creation_date()).unwrap_or(&empty);
            let r = build_cohort(h, same_day, &corpus.redirects).map_err(|e| {
                Exclusion::new(
                    &h.title,
                    Reason::EmptyCohort,
                    format!(
                        "{e}; {} entries created on {}",
                        same_day.len(),
                        h.creation_date()
                    ),
                )
            });
            (h.clone(), r)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestSummary {
    pub files: usize,
    pub unreadable_files: usize,
    pub tallies: IngestTallies,
    pub coverage: Option<Coverage>,
    pub titles: usize,
    pub store: PathBuf,
}

fn log_inputs(path: &Path) -> Result<Vec<PathBuf>> {
    let files = if path.is_dir() {
        discover_log_files(path)?
    } else {
        vec![path.to_path_buf()]
    };
    if files.is_empty() {
        return Err(Error::MissingInput(format!(
            "no input files in {}",
            path.display()
        )));
    }
    Ok(files)
}

/// Ingests the hourly logs into `out/store` and writes `ingest_report.csv`.
pub fn cmd_ingest(cfg: &RunConfig) -> Result<IngestSummary> {
    let files = log_inputs(cfg.require("logs")?)?;
    let filter = match cfg.optional("filter")? {
        Some(p) => FilterConfig::load(p)?,
        None => FilterConfig::default(),
    };
    let creations = match cfg.optional("creations")? {
        Some(p) => load_creations(p, &[])?,
        None => Vec::new(),
    };
    let table = load_redirects(cfg, &creations)?;
    info!("ingesting {} files", files.len());
    let outcome = ingest(&files, &table, &filter);

    let store_dir = cfg.store_dir();
    outcome.store.write_dir(&store_dir)?;
    let rows = outcome.files.iter().map(|f| {
        let t = &f.tallies;
        vec![
            f.file.clone(),
            f.hour
                .map(|h| h.format("%Y-%m-%dT%H:00:00Z").to_string())
                .unwrap_or_default(),
            t.lines.to_string(),
            t.kept.to_string(),
            t.malformed.to_string(),
            t.wrong_project.to_string(),
            t.bad_title.to_string(),
            t.other_namespace.to_string(),
            t.kept_views.to_string(),
            f.error.clone().unwrap_or_default(),
        ]
    });
    write_csv(
        &cfg.out.join("ingest_report.csv"),
        &[
            "file",
            "hour",
            "lines",
            "kept",
            "malformed",
            "wrong_project",
            "bad_title",
            "other_namespace",
            "kept_views",
            "error",
        ],
        rows,
    )?;
    let tallies = *outcome.store.tallies();
    Ok(IngestSummary {
        files: files.len(),
        unreadable_files: tallies.unreadable_files as usize,
        tallies,
        coverage: outcome.store.coverage(),
        titles: outcome.store.len(),
        store: store_dir,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CohortSummary {
    pub hoaxes: usize,
    pub cohorts: usize,
    pub excluded: usize,
    pub raw_entries: usize,
    pub members: usize,
}

/// Writes `cohorts.csv`, `cohort_sizes.csv` and `cohort_exclusions.csv`.
pub fn cmd_cohort(cfg: &RunConfig) -> Result<CohortSummary> {
    let corpus = load_corpus(cfg)?;
    info!("known hoaxes are excluded from every cohort");
    let cohorts = build_cohorts(&corpus);
    let mut members = Vec::new();
    let mut sizes = Vec::new();
    let mut excluded = Vec::new();
    let (mut raw_entries, mut member_count) = (0, 0);
    for (hoax, r) in &cohorts {
        match r {
            Ok(c) => {
                raw_entries += c.raw_size;
                member_count += c.members.len();
                sizes.push(vec![
                    hoax.title.to_string(),
                    c.creation_date.to_string(),
                    c.raw_size.to_string(),
                    c.members.len().to_string(),
                ]);
                for m in &c.members {
                    members.push(vec![
                        hoax.title.to_string(),
                        c.creation_date.to_string(),
                        m.title.to_string(),
                        format_timestamp(&m.created_at),
                    ]);
                }
            }
            Err(e) => {
                warn!("{}: {}", e.title, e.detail);
                excluded.push(e.clone());
            }
        }
    }
    write_csv(
        &cfg.out.join("cohorts.csv"),
        &[
            "hoax_title",
            "creation_date",
            "member_title",
            "member_created_at",
        ],
        members,
    )?;
    write_csv(
        &cfg.out.join("cohort_sizes.csv"),
        &["hoax_title", "creation_date", "raw_size", "members"],
        sizes,
    )?;
    write_exclusions(&cfg.out.join("cohort_exclusions.csv"), &excluded)?;
    Ok(CohortSummary {
        hoaxes: cohorts.len(),
        cohorts: cohorts.len() - excluded.len(),
        excluded: excluded.len(),
        raw_entries,
        members: member_count,
    })
}

fn write_exclusions(path: &Path, ex: &[Exclusion]) -> Result<()> {
    write_csv(
        path,
        &["hoax_title", "reason", "detail"],
        ex.iter()
            .map(|e| vec![e.title.to_string(), e.reason.to_string(), e.detail.clone()]),
    )
}

fn load_article(
    dir: &Path,
    title: &CanonicalTitle,
) -> std::result::Result<ArticleSource, Exclusion> {
    match ArticleSource::load(dir, title) {
        Ok(Some(a)) => Ok(a),
        Ok(None) => Err(Exclusion::new(
            title,
            Reason::MissingArticle,
            "no markup fixture",
        )),
        Err(e) => Err(Exclusion::new(title, Reason::MissingArticle, e.to_string())),
    }
}

fn article_features(
    dir: &Path,
    title: &CanonicalTitle,
) -> std::result::Result<ArticleFeatures, Exclusion> {
    let src = load_article(dir, title)?;
    compute_features(&src).map_err(|e| Exclusion::new(title, Reason::EmptyArticle, e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureSummary {
    pub articles: usize,
    pub failed_articles: usize,
    pub hoaxes_scored: usize,
    pub zero_mad_rows: usize,
    pub excluded: usize,
}

/// Writes `features.csv`, `zscores.csv`, `feature_failures.csv` and
/// `feature_exclusions.csv`.
pub fn cmd_features(cfg: &RunConfig) -> Result<FeatureSummary> {
    let corpus = load_corpus(cfg)?;
    let articles = cfg.require("articles")?;
    let cohorts = build_cohorts(&corpus);

    let mut wanted: BTreeSet<&CanonicalTitle> = BTreeSet::new();
    for (h, r) in &cohorts {
        wanted.insert(&h.title);
        if let Ok(c) = r {
            wanted.extend(c.members.iter().map(|m| &m.title));
        }
    }
    let wanted: Vec<&CanonicalTitle> = wanted.into_iter().collect();
    let computed: Vec<std::result::Result<ArticleFeatures, Exclusion>> = wanted
        .par_iter()
        .map(|t| article_features(articles, t))
        .collect();
    let features: BTreeMap<&CanonicalTitle, std::result::Result<ArticleFeatures, Exclusion>> =
        wanted.iter().copied().zip(computed).collect();

    let mut feature_rows = Vec::new();
    let mut failures = Vec::new();
    for (t, r) in &features {
        match r {
            Ok(f) => feature_rows.push(vec![
                t.to_string(),
                f.plain_length.to_string(),
                f.plain_to_markup_ratio.to_string(),
                f.wikilink_density.to_string(),
                f.extlink_density.to_string(),
            ]),
            Err(e) => failures.push(vec![t.to_string(), e.reason.to_string(), e.detail.clone()]),
        }
    }

    let mut z_rows = Vec::new();
    let mut excluded = Vec::new();
    let mut zero_mad_rows = 0;
    let mut hoaxes_scored = 0;
    for (hoax, r) in &cohorts {
        let cohort = match r {
            Ok(c) => c,
            Err(e) => {
                excluded.push(e.clone());
                continue;
            }
        };
        let hf = match &features[&hoax.title] {
            Ok(f) => f,
            Err(e) => {
                excluded.push(e.clone());
                continue;
            }
        };
        let member_features: Vec<&ArticleFeatures> = cohort
            .members
            .iter()
            .filter_map(|m| features[&m.title].as_ref().ok())
            .collect();
        if member_features.is_empty() {
            excluded.push(Exclusion::new(
                &hoax.title,
                Reason::NoCohortFeatures,
                format!("none of {} members has usable markup", cohort.members.len()),
            ));
            continue;
        }
        hoaxes_scored += 1;
        for feature in Feature::ALL {
            let values: Vec<f64> = member_features.iter().map(|f| feature.of(f)).collect();
            let x = feature.of(hf);
            let row = match modified_z(x, &values) {
                Ok(s) => {
                    let z = FeatureZScore { feature, score: s };
                    vec![
                        hoax.title.to_string(),
                        z.feature.name().to_string(),
                        values.len().to_string(),
                        x.to_string(),
                        s.median.to_string(),
                        s.mad.to_string(),
                        s.z.to_string(),
                        "ok".to_string(),
                    ]
                }
                Err(Error::ZeroMad { median }) => {
                    zero_mad_rows += 1;
                    vec![
                        hoax.title.to_string(),
                        feature.name().to_string(),
                        values.len().to_string(),
                        x.to_string(),
                        median.to_string(),
                        "0".to_string(),
                        String::new(),
                        "zero_mad".to_string(),
                    ]
                }
                Err(e) => return Err(e),
            };
            z_rows.push(row);
        }
    }

    write_csv(
        &cfg.out.join("features.csv"),
        &[
            "title",
            "plain_length",
            "ratio",
            "wikilink_density",
            "extlink_density",
        ],
        feature_rows,
    )?;
    write_csv(
        &cfg.out.join("feature_failures.csv"),
        &["title", "reason", "detail"],
        failures.iter().cloned(),
    )?;
    write_csv(
        &cfg.out.join("zscores.csv"),
        &[
            "hoax_title",
            "feature",
            "cohort_n",
            "x",
            "median",
            "mad",
            "z",
            "status",
        ],
        z_rows,
    )?;
    write_exclusions(&cfg.out.join("feature_exclusions.csv"), &excluded)?;
    Ok(FeatureSummary {
        articles: features.len(),
        failed_articles: failures.len(),
        hoaxes_scored,
        zero_mad_rows,
        excluded: excluded.len(),
    })
}

/// Inputs shared by all per-article traffic scores.
struct ScoreContext<'a> {
    store: &'a TrafficStore,
    redirects: &'a RedirectTable,
    hoax_titles: &'a BTreeSet<CanonicalTitle>,
    articles: &'a Path,
    span: u32,
}

impl ScoreContext<'_> {
    /// Redirect-resolved out-link neighbors of an article.
    fn neighbors(
        &self,
        title: &CanonicalTitle,
    ) -> std::result::Result<BTreeSet<CanonicalTitle>, Exclusion> {
        let src = load_article(self.articles, title)?;
        let links = neighbor_set(&src, self.hoax_titles)
            .map_err(|e| Exclusion::new(title, Reason::NoNeighbors, e.to_string()))?;
        let page = self.redirects.resolve(title);
        let resolved: BTreeSet<CanonicalTitle> = links
            .iter()
            .map(|t| self.redirects.resolve(t))
            .filter(|t| *t != page && !self.hoax_titles.contains(*t))
            .cloned()
            .collect();
        if resolved.is_empty() {
            return Err(Exclusion::new(
                title,
                Reason::NoNeighbors,
                "all out-links resolve to the article itself or to hoaxes",
            ));
        }
        Ok(resolved)
    }

    fn in_coverage(
        &self,
        title: &CanonicalTitle,
        day0: NaiveDate,
    ) -> std::result::Result<(), Exclusion> {
        self.store
            .window_totals(std::iter::empty(), day0, self.span)
            .map(|_| ())
            .map_err(|e| Exclusion::new(title, Reason::OutOfCoverage, e.to_string()))
    }

    fn score(
        &self,
        title: &CanonicalTitle,
        day0: NaiveDate,
    ) -> std::result::Result<AttentionScore, Exclusion> {
        let neighbors = self.neighbors(title)?;
        let w = self
            .store
            .window_totals(&neighbors, day0, self.span)
            .map_err(|e| Exclusion::new(title, Reason::OutOfCoverage, e.to_string()))?;
        let change = delta_v(&w.before, &w.after)
            .map_err(|e| Exclusion::new(title, Reason::UndefinedDeltaV, e.to_string()))?;
        if change.delta_v.is_none() {
            return Err(Exclusion::new(
                title,
                Reason::UndefinedDeltaV,
                format!(
                    "no traffic to {} neighbors in either window",
                    neighbors.len()
                ),
            ));
        }
        Ok(AttentionScore::new(title.clone(), change))
    }
}

struct HoaxOutcome {
    result: std::result::Result<CohortAttentionResult, Exclusion>,
    member_drops: Vec<Exclusion>,
}

fn analyze_hoax(
    ctx: &ScoreContext<'_>,
    hoax: &ArticleMeta,
    cohort: &std::result::Result<CohortRecord, Exclusion>,
) -> HoaxOutcome {
    let fail = |e: Exclusion| HoaxOutcome {
        result: Err(e),
        member_drops: Vec::new(),
    };
    let day0 = hoax.creation_date();
    if let Err(e) = ctx.in_coverage(&hoax.title, day0) {
        return fail(e);
    }
    let cohort = match cohort {
        Ok(c) => c,
        Err(e) => return fail(e.clone()),
    };
    let hoax_score = match ctx.score(&hoax.title, day0) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let mut scores = Vec::with_capacity(cohort.members.len());
    let mut member_drops = Vec::new();
    for m in &cohort.members {
        match ctx.score(&m.title, day0) {
            Ok(s) => scores.push(s),
            Err(e) => member_drops.push(e),
        }
    }
    let result = cohort_d(&hoax_score, &scores).map_err(|e| {
        Exclusion::new(
            &hoax.title,
            Reason::EmptyCohortScores,
            format!(
                "{e}; {} of {} members dropped",
                member_drops.len(),
                cohort.members.len()
            ),
        )
    });
    HoaxOutcome {
        result,
        member_drops,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AttentionSummary {
    pub hoaxes: usize,
    pub analyzed: usize,
    pub excluded: usize,
    pub exclusions_by_reason: BTreeMap<Reason, usize>,
    pub positive_d: usize,
    pub positive_d_fraction: Option<f64>,
    pub sample_mean: Option<f64>,
    pub ci: Option<[f64; 2]>,
    pub confidence: f64,
    pub resamples: usize,
    pub seed: u64,
    /// Share of bootstrap resample means above zero.
    pub positive_resample_fraction: Option<f64>,
    pub span: u32,
    pub coverage: Option<Coverage>,
}

impl AttentionSummary {
    pub fn ci_excludes_zero(&self) -> bool {
        self.ci.is_some_and(|[lo, hi]| lo > 0.0 || hi < 0.0)
    }
}

fn hist_rows(values: &[f64], bins: usize) -> Vec<Vec<String>> {
    if values.is_empty() {
        return Vec::new();
    }
    let (lo, hi) = auto_range(values);
    histogram(values, lo, hi, bins)
        .into_iter()
        .map(|b| vec![b.low.to_string(), b.high.to_string(), b.count.to_string()])
        .collect()
}

/// Computes D for every hoax and its bootstrap interval. Writes
/// `results.csv`, `cohort_scores.csv`, `exclusions.csv`,
/// `member_exclusions.csv`, `summary.json`, `hist_d.csv` and
/// `hist_means.csv`.
pub fn cmd_attention(cfg: &RunConfig) -> Result<AttentionSummary> {
    let corpus = load_corpus(cfg)?;
    let articles = cfg.require("articles")?;
    let store_dir = cfg.store_dir();
    if !store_dir.exists() {
        return Err(Error::MissingInput(format!(
            "{} not found (run ingest first)",
            store_dir.display()
        )));
    }
    let store = TrafficStore::read_dir(&store_dir)?;
    let hoax_titles = corpus.hoax_titles();
    let ctx = ScoreContext {
        store: &store,
        redirects: &corpus.redirects,
        hoax_titles: &hoax_titles,
        articles,
        span: cfg.span,
    };
    let cohorts = build_cohorts(&corpus);
    let outcomes: Vec<HoaxOutcome> = cohorts
        .par_iter()
        .map(|(h, c)| analyze_hoax(&ctx, h, c))
        .collect();

    let mut results = Vec::new();
    let mut excluded = Vec::new();
    let mut member_rows = Vec::new();
    for ((hoax, _), o) in cohorts.iter().zip(outcomes) {
        for d in &o.member_drops {
            member_rows.push(vec![
                hoax.title.to_string(),
                d.title.to_string(),
                d.reason.to_string(),
                d.detail.clone(),
            ]);
        }
        match o.result {
            Ok(r) => results.push(r),
            Err(e) => {
                info!("{} excluded: {} ({})", e.title, e.reason, e.detail);
                excluded.push(e);
            }
        }
    }

    let d_values: Vec<f64> = results.iter().map(|r| r.d).collect();
    let (boot, means): (Option<BootstrapSummary>, Vec<f64>) = if d_values.is_empty() {
        warn!("no hoax could be analyzed; bootstrap skipped");
        (None, Vec::new())
    } else {
        let means = bootstrap_means(&d_values, cfg.resamples, cfg.seed)?;
        (Some(summarize(&d_values, means.clone(), cfg.seed)), means)
    };

    let result_rows = results.iter().map(|r| {
        vec![
            r.hoax.title.to_string(),
            opt_f64(r.hoax.delta_v()),
            r.cohort_mean.to_string(),
            r.n.to_string(),
            r.d.to_string(),
        ]
    });
    write_csv(&cfg.out.join("results.csv"), &RESULTS_HEADER, result_rows)?;

    let mut score_rows = Vec::new();
    for r in &results {
        let row = |s: &AttentionScore, role: &str| {
            vec![
                r.hoax.title.to_string(),
                s.title.to_string(),
                role.to_string(),
                s.change.v_before.to_string(),
                s.change.v_after.to_string(),
                opt_f64(s.delta_v()),
            ]
        };
        score_rows.push(row(&r.hoax, "hoax"));
        score_rows.extend(r.cohort.iter().map(|s| row(s, "member")));
    }
    write_csv(
        &cfg.out.join("cohort_scores.csv"),
        &SCORES_HEADER,
        score_rows,
    )?;
    write_exclusions(&cfg.out.join("exclusions.csv"), &excluded)?;
    write_csv(
        &cfg.out.join("member_exclusions.csv"),
        &["hoax_title", "member_title", "reason", "detail"],
        member_rows,
    )?;
    write_csv(
        &cfg.out.join("hist_d.csv"),
        &HIST_HEADER,
        hist_rows(&d_values, cfg.histogram_bins),
    )?;
    write_csv(
        &cfg.out.join("hist_means.csv"),
        &HIST_HEADER,
        hist_rows(&means, cfg.histogram_bins),
    )?;

    let positive_d = d_values.iter().filter(|&&d| d > 0.0).count();
    let summary = AttentionSummary {
        hoaxes: cohorts.len(),
        analyzed: results.len(),
        excluded: excluded.len(),
        exclusions_by_reason: count_reasons(&excluded),
        positive_d,
        positive_d_fraction: (!d_values.is_empty())
            .then(|| positive_d as f64 / d_values.len() as f64),
        sample_mean: boot.as_ref().map(|b| b.sample_mean),
        ci: boot.as_ref().map(|b| [b.ci_low, b.ci_high]),
        confidence: crate::attention::bootstrap::CONFIDENCE,
        resamples: cfg.resamples,
        seed: cfg.seed,
        positive_resample_fraction: boot.as_ref().map(|b| b.positive_fraction),
        span: cfg.span,
        coverage: store.coverage(),
    };
    write_json(&cfg.out.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Fetches markup, extracts and creation times for the hoaxes, their
/// cohorts and any `extra` titles into the articles directory.
pub fn cmd_fetch(cfg: &RunConfig, extra: &[CanonicalTitle]) -> Result<FetchReport> {
    let out = cfg
        .articles
        .as_deref()
        .ok_or_else(|| Error::MissingInput("`articles` is not set in the config".into()))?;
    let mut titles: BTreeSet<CanonicalTitle> = extra.iter().cloned().collect();
    if cfg.hoaxes.is_some() {
        let hoaxes = load_hoaxes(cfg.require("hoaxes")?)?;
        titles.extend(hoaxes.iter().map(|h| h.title.clone()));
        if cfg.creations.is_some() {
            let corpus = load_corpus(cfg)?;
            for (_, c) in build_cohorts(&corpus) {
                if let Ok(c) = c {
                    titles.extend(c.members.into_iter().map(|m| m.title));
                }
            }
        }
    }
    let live = cfg.live.clone().with_env();
    fetch_live(&titles, &live, out)
}
