//! Optional acquisition of article fixtures from a MediaWiki API.
//!
//! Produces exactly the files the offline pipeline reads: `<title>.wiki`,
//! `<title>.txt` and a `created.csv` creation list. The analysis commands
//! never call this.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use log::{debug, info, warn};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::records::{
    load_creation_file, parse_timestamp, write_creations, ArticleMeta, CreationEntry,
};
use crate::error::{Error, Result};
use crate::logstore::title::{title_to_filename, CanonicalTitle};
use crate::wikitext::ArticleSource;

pub const USER_AGENT_ENV: &str = "HOAXATTN_USER_AGENT";
pub const CREATED_FILE: &str = "created.csv";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FetchConfig {
    pub base_url: String,
    pub timeout_secs: u64,
    pub max_concurrency: usize,
    pub user_agent: String,
    /// Minimum spacing between two requests issued by one worker.
    pub min_interval_ms: u64,
}

impl Default for FetchConfig {
    fn default() -> Self {
        FetchConfig {
            base_url: "https://en.wikipedia.org/w/api.php".to_string(),
            timeout_secs: 30,
            max_concurrency: 2,
            user_agent: concat!("hoaxattn/", env!("CARGO_PKG_VERSION")).to_string(),
            min_interval_ms: 200,
        }
    }
}

impl FetchConfig {
    /// Applies the user-agent environment override, if set.
    pub fn with_env(mut self) -> Self {
        if let Ok(ua) = std::env::var(USER_AGENT_ENV) {
            if !ua.trim().is_empty() {
                self.user_agent = ua;
            }
        }
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FetchReport {
    pub fetched: Vec<CanonicalTitle>,
    pub skipped: Vec<CanonicalTitle>,
    pub not_found: Vec<CanonicalTitle>,
    pub http_errors: Vec<(CanonicalTitle, String)>,
}

struct Fetched {
    source: ArticleSource,
    entry: CreationEntry,
}

struct Client {
    agent: ureq::Agent,
    base: String,
    interval: Duration,
    last: Option<Instant>,
}

impl Client {
    fn new(cfg: &FetchConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs.max(1))))
            .user_agent(cfg.user_agent.as_str())
            .http_status_as_error(false)
            .build()
            .into();
        Client {
            agent,
            base: cfg.base_url.clone(),
            interval: Duration::from_millis(cfg.min_interval_ms),
            last: None,
        }
    }

    fn query(&mut self, params: &[(&str, &str)]) -> Result<Value> {
        if let Some(last) = self.last {
            let wait = self.interval.saturating_sub(last.elapsed());
            if !wait.is_zero() {
                thread::sleep(wait);
            }
        }
        self.last = Some(Instant::now());
        let mut req = self.agent.get(&self.base);
        for (k, v) in params {
            req = req.query(*k, *v);
        }
        let mut resp = req.call().map_err(|e| Error::Http(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(Error::Http(format!("status {status}")));
        }
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| Error::Http(e.to_string()))?;
        Ok(serde_json::from_str(&body)?)
    }

    fn first_page(v: &Value, title: &CanonicalTitle) -> Result<Value> {
        if let Some(err) = v.get("error") {
            return Err(Error::Http(format!("api error: {err}")));
        }
        let page = v
            .pointer("/query/pages/0")
            .cloned()
            .ok_or_else(|| Error::Http("response has no query.pages".into()))?;
        if page.get("missing").is_some() || page.get("invalid").is_some() {
            return Err(Error::NotFound(title.to_string()));
        }
        Ok(page)
    }

    fn fetch(&mut self, title: &CanonicalTitle) -> Result<Fetched> {
        let name = title.display_form();
        let latest = self.query(&[
            ("action", "query"),
            ("format", "json"),
            ("formatversion", "2"),
            ("prop", "revisions|extracts|info"),
            ("rvprop", "content"),
            ("rvslots", "main"),
            ("explaintext", "1"),
            ("exsectionformat", "plain"),
            ("titles", &name),
        ])?;
        let page = Self::first_page(&latest, title)?;
        let markup = page
            .pointer("/revisions/0/slots/main/content")
            .or_else(|| page.pointer("/revisions/0/content"))
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Http(format!("no content for {title}")))?
            .to_string();
        let extract = page
            .get("extract")
            .and_then(Value::as_str)
            .map(str::to_string);
        let is_redirect = page
            .get("redirect")
            .and_then(Value::as_bool)
            .unwrap_or(false);

        let first = self.query(&[
            ("action", "query"),
            ("format", "json"),
            ("formatversion", "2"),
            ("prop", "revisions"),
            ("rvprop", "timestamp"),
            ("rvdir", "newer"),
            ("rvlimit", "1"),
            ("titles", &name),
        ])?;
        let page = Self::first_page(&first, title)?;
        let ts = page
            .pointer("/revisions/0/timestamp")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Http(format!("no first revision for {title}")))?;
        let created_at =
            parse_timestamp(ts).ok_or_else(|| Error::Http(format!("bad timestamp {ts:?}")))?;

        let redirect_target = if is_redirect {
            crate::wikitext::extract_wikilinks(&markup)
                .into_iter()
                .next()
        } else {
            None
        };
        let source = match extract {
            Some(plain) => ArticleSource::with_plain(title.clone(), markup, plain),
            None => ArticleSource::from_markup(title.clone(), markup),
        };
        Ok(Fetched {
            source,
            entry: CreationEntry {
                meta: ArticleMeta {
                    title: title.clone(),
                    created_at,
                    is_redirect,
                    is_hoax: false,
                },
                redirect_target,
            },
        })
    }
}

/// Fetches markup, plain extract and creation time for each title into
/// `out_dir`. Titles already present (markup file and creation row) are
/// skipped. Per-title failures are tallied and do not stop the batch.
pub fn fetch_live(
    titles: &BTreeSet<CanonicalTitle>,
    cfg: &FetchConfig,
    out_dir: &Path,
) -> Result<FetchReport> {
    let mut report = FetchReport::default();
    if titles.is_empty() {
        return Ok(report);
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let created_path = out_dir.join(CREATED_FILE);
    let mut created: BTreeMap<CanonicalTitle, CreationEntry> = if created_path.exists() {
        load_creation_file(&created_path)?
            .into_iter()
            .map(|e| (e.meta.title.clone(), e))
            .collect()
    } else {
        BTreeMap::new()
    };

    let mut todo = Vec::new();
    for t in titles {
        let wiki = out_dir.join(format!("{}.wiki", title_to_filename(t)));
        if wiki.exists() && created.contains_key(t) {
            report.skipped.push(t.clone());
        } else {
            todo.push(t.clone());
        }
    }
    info!(
        "fetching {} titles ({} already present)",
        todo.len(),
        report.skipped.len()
    );

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(CanonicalTitle, Result<Fetched>)>> = Mutex::new(Vec::new());
    let workers = cfg.max_concurrency.max(1).min(todo.len().max(1));
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| {
                let mut client = Client::new(cfg);
                loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(title) = todo.get(i) else { break };
                    debug!("fetching {title}");
                    let r = client.fetch(title).and_then(|f| {
                        f.source.save(out_dir)?;
                        Ok(f)
                    });
                    results
                        .lock()
                        .expect("results lock")
                        .push((title.clone(), r));
                }
            });
        }
    });

    let mut results = results.into_inner().expect("results lock");
    results.sort_by(|a, b| a.0.cmp(&b.0));
    for (title, r) in results {
        match r {
            Ok(f) => {
                created.insert(title.clone(), f.entry);
                report.fetched.push(title);
            }
            Err(Error::NotFound(_)) => {
                warn!("{title}: not found");
                report.not_found.push(title);
            }
            Err(e) => {
                warn!("{title}: {e}");
                report.http_errors.push((title, e.to_string()));
            }
        }
    }
    let entries: Vec<CreationEntry> = created.into_values().collect();
    write_creations(&created_path, &entries)?;
    Ok(report)
}
