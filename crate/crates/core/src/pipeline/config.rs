use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attention::DEFAULT_RESAMPLES;
use crate::corpus::FetchConfig;
use crate::error::{Error, Result};

pub const DEFAULT_SPAN: u32 = 7;
pub const DEFAULT_SEED: u64 = 1;

/// Settings shared by all batch commands, read from a TOML file.
///
/// Relative paths are taken relative to the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Directory of hourly log files, or a single log file.
    pub logs: Option<PathBuf>,
    pub redirects: Option<PathBuf>,
    /// Filter file; the built-in English main-namespace filter when absent.
    pub filter: Option<PathBuf>,
    pub hoaxes: Option<PathBuf>,
    /// A creation-list CSV or a directory of them.
    pub creations: Option<PathBuf>,
    pub articles: Option<PathBuf>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_span")]
    pub span: u32,
    #[serde(default = "default_resamples")]
    pub resamples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    #[serde(default)]
    pub live: FetchConfig,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_span() -> u32 {
    DEFAULT_SPAN
}

fn default_resamples() -> usize {
    DEFAULT_RESAMPLES
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_bins() -> usize {
    20
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            logs: None,
            redirects: None,
            filter: None,
            hoaxes: None,
            creations: None,
            articles: None,
            out: default_out(),
            span: DEFAULT_SPAN,
            resamples: DEFAULT_RESAMPLES,
            seed: DEFAULT_SEED,
            histogram_bins: default_bins(),
            live: FetchConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.rebase(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Makes relative paths relative to `base`.
    pub fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.logs,
            &mut self.redirects,
            &mut self.filter,
            &mut self.hoaxes,
            &mut self.creations,
            &mut self.articles,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        fix(&mut self.out);
    }

    pub fn validate(&self) -> Result<()> {
        if self.span == 0 {
            return Err(Error::Config("span must be at least 1".into()));
        }
        if self.resamples == 0 {
            return Err(Error::Config("resamples must be at least 1".into()));
        }
        if self.histogram_bins == 0 {
            return Err(Error::Config("histogram_bins must be at least 1".into()));
        }
        Ok(())
    }

    /// The configured path for `key`, which must exist.
    pub fn require(&self, key: &str) -> Result<&Path> {
        let p = match key {
            "logs" => &self.logs,
            "redirects" => &self.redirects,
            "filter" => &self.filter,
            "hoaxes" => &self.hoaxes,
            "creations" => &self.creations,
            "articles" => &self.articles,
            _ => return Err(Error::Config(format!("unknown input {key}"))),
        };
        let p = p
            .as_deref()
            .ok_or_else(|| Error::MissingInput(format!("`{key}` is not set in the config")))?;
        if !p.exists() {
            return Err(Error::MissingInput(format!(
                "{key}: {} does not exist",
                p.display()
            )));
        }
        Ok(p)
    }

    /// Like [`RunConfig::require`] for inputs that may be left out.
    pub fn optional(&self, key: &str) -> Result<Option<&Path>> {
        let set = match key {
            "redirects" => self.redirects.is_some(),
            "filter" => self.filter.is_some(),
            "creations" => self.creations.is_some(),
            _ => true,
        };
        if set {
            self.require(key).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn store_dir(&self) -> PathBuf {
        self.out.join("store")
    }

    pub fn plots_dir(&self) -> PathBuf {
        self.out.join("plots")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_rebase() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(
            &path,
            "logs = \"logs\"\nhoaxes = \"/abs/h.csv\"\nseed = 9\n",
        )
        .unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.logs.as_deref(), Some(dir.path().join("logs").as_path()));
        assert_eq!(cfg.hoaxes.as_deref(), Some(Path::new("/abs/h.csv")));
        assert_eq!(cfg.out, dir.path().join("out"));
        assert_eq!((cfg.span, cfg.resamples, cfg.seed), (7, 10_000, 9));
    }

    #[test]
    fn rejects_bad_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "span = 0\n").unwrap();
        assert!(matches!(RunConfig::load(&path), Err(Error::Config(_))));
        fs::write(&path, "unknown_key = 1\n").unwrap();
        assert!(matches!(RunConfig::load(&path), Err(Error::Config(_))));
    }

    #[test]
    fn missing_inputs() {
        let cfg = RunConfig::default();
        assert!(matches!(cfg.require("logs"), Err(Error::MissingInput(_))));
        assert!(cfg.optional("redirects").unwrap().is_none());
        let cfg = RunConfig {
            redirects: Some("/no/such/file".into()),
            ..Default::default()
        };
        assert!(matches!(
            cfg.optional("redirects"),
            Err(Error::MissingInput(_))
        ));
    }
}
