//! Python bindings: `import hoaxattn`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use chrono::NaiveDate;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use hoaxattn::attention::{self, AttentionScore};
use hoaxattn::logstore::{self, title::Cleaned};
use hoaxattn::pipeline::{self, RunConfig};
use hoaxattn::synth::{self, PlantedSpec};
use hoaxattn::wikitext::{self, ArticleSource};
use hoaxattn::CanonicalTitle;

create_exception!(hoaxattn, HoaxattnError, PyException);

fn err(e: hoaxattn::Error) -> PyErr {
    match e {
        hoaxattn::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => HoaxattnError::new_err(e.to_string()),
    }
}

fn title(raw: &str) -> PyResult<CanonicalTitle> {
    CanonicalTitle::parse(raw)
        .ok_or_else(|| PyValueError::new_err(format!("illegal title {raw:?}")))
}

fn date(s: &str) -> PyResult<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|e| PyValueError::new_err(format!("bad date {s:?}: {e}")))
}

/// Serializes through JSON so results arrive as plain dicts and lists.
fn to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| HoaxattnError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Canonical form of a raw log title, or `None` when it is discarded.
#[pyfunction]
fn clean_title(raw: &str) -> Option<String> {
    match logstore::clean_title(raw) {
        Cleaned::Title(t) => Some(t.into_string()),
        Cleaned::Discard => None,
    }
}

/// `(project, title, count, bytes)` of one log line; `ValueError` if malformed.
#[pyfunction]
fn parse_line(line: &Bound<'_, PyAny>) -> PyResult<(String, String, u64, u64)> {
    let owned;
    let bytes: &[u8] = if let Ok(b) = line.cast::<PyBytes>() {
        owned = b.as_bytes().to_vec();
        &owned
    } else {
        owned = line.extract::<String>()?.into_bytes();
        &owned
    };
    let r = logstore::parse_line(bytes).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok((r.project.to_string(), r.title.to_string(), r.count, r.bytes))
}

#[pyfunction]
fn strip_markup(markup: &str) -> String {
    wikitext::strip_markup(markup)
}

#[pyfunction]
fn count_words(text: &str) -> usize {
    wikitext::count_words(text)
}

/// Canonical targets of the main-namespace wiki-links, in order.
#[pyfunction]
fn extract_wikilinks(markup: &str) -> Vec<String> {
    wikitext::extract_wikilinks(markup)
        .into_iter()
        .map(CanonicalTitle::into_string)
        .collect()
}

#[pyfunction]
fn extract_external_links(markup: &str) -> usize {
    wikitext::extract_external_links(markup)
}

/// The four appearance features of an article. Plain text is derived from
/// the markup unless given.
#[pyfunction]
#[pyo3(signature = (markup, plain = None, title = "Article"))]
fn compute_features(
    py: Python<'_>,
    markup: &str,
    plain: Option<&str>,
    title: &str,
) -> PyResult<Py<PyAny>> {
    let t = self::title(title)?;
    let src = match plain {
        Some(p) => ArticleSource::with_plain(t, markup, p),
        None => ArticleSource::from_markup(t, markup),
    };
    to_py(py, &wikitext::compute_features(&src).map_err(err)?)
}

#[pyfunction]
fn median(values: Vec<f64>) -> Option<f64> {
    attention::median(&values)
}

/// `{x, median, mad, z}` of `x` against `cohort`.
#[pyfunction]
fn modified_z(py: Python<'_>, x: f64, cohort: Vec<f64>) -> PyResult<Py<PyAny>> {
    to_py(py, &attention::modified_z(x, &cohort).map_err(err)?)
}

/// `{v_before, v_after, delta_v}` for two equally long windows of daily totals.
#[pyfunction]
fn delta_v(py: Python<'_>, before: Vec<u64>, after: Vec<u64>) -> PyResult<Py<PyAny>> {
    to_py(py, &attention::delta_v(&before, &after).map_err(err)?)
}

/// `(D, cohort_mean, n)` from a hoax volume change and its cohort's, where
/// `None` entries are undefined changes and are skipped.
#[pyfunction]
fn cohort_d(hoax: Option<f64>, cohort: Vec<Option<f64>>) -> PyResult<(f64, f64, usize)> {
    let score = |name: String, dv: Option<f64>| {
        AttentionScore::new(
            CanonicalTitle::parse(&name).expect("generated title"),
            attention::VolumeChange {
                v_before: 0.0,
                v_after: 0.0,
                delta_v: dv,
            },
        )
    };
    let h = score("Hoax".into(), hoax);
    let c: Vec<AttentionScore> = cohort
        .into_iter()
        .enumerate()
        .map(|(i, dv)| score(format!("Member_{i}"), dv))
        .collect();
    let r = attention::cohort_d(&h, &c).map_err(err)?;
    Ok((r.d, r.cohort_mean, r.n))
}

/// Percentile bootstrap of the mean; returns the summary as a dict.
#[pyfunction]
#[pyo3(signature = (values, resamples = attention::DEFAULT_RESAMPLES, seed = 1))]
fn bootstrap_mean_ci(
    py: Python<'_>,
    values: Vec<f64>,
    resamples: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    to_py(
        py,
        &attention::bootstrap_mean_ci(&values, resamples, seed).map_err(err)?,
    )
}

/// Redirect table with chains resolved to their final target.
#[pyclass(frozen, module = "hoaxattn")]
struct RedirectTable(logstore::RedirectTable);

#[pymethods]
impl RedirectTable {
    /// Builds a table from `(source, target)` pairs of canonical titles.
    #[new]
    fn new(pairs: Vec<(String, String)>) -> PyResult<Self> {
        let pairs = pairs
            .iter()
            .map(|(s, t)| Ok((title(s)?, title(t)?)))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(RedirectTable(logstore::RedirectTable::from_pairs(pairs)))
    }

    /// Reads a tab-separated `source<TAB>target` file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        logstore::RedirectTable::load(&path)
            .map(RedirectTable)
            .map_err(err)
    }

    fn resolve(&self, title: &str) -> PyResult<String> {
        let t = self::title(title)?;
        Ok(self.0.resolve(&t).to_string())
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Daily per-title traffic written by the ingest stage.
#[pyclass(frozen, module = "hoaxattn")]
struct TrafficStore(logstore::TrafficStore);

#[pymethods]
impl TrafficStore {
    #[staticmethod]
    fn load(dir: PathBuf) -> PyResult<Self> {
        logstore::TrafficStore::read_dir(&dir)
            .map(TrafficStore)
            .map_err(err)
    }

    /// First and last covered day as ISO strings, or `None` when empty.
    fn coverage(&self) -> Option<(String, String)> {
        self.0
            .coverage()
            .map(|c| (c.start.to_string(), c.end.to_string()))
    }

    /// Daily counts of one title keyed by ISO date.
    fn series(&self, title: &str) -> PyResult<BTreeMap<String, u64>> {
        let t = self::title(title)?;
        Ok(self
            .0
            .series(&t)
            .map(|s| s.counts.iter().map(|(d, n)| (d.to_string(), *n)).collect())
            .unwrap_or_default())
    }

    /// Summed daily totals of `titles` for `span` days before and after
    /// `day0`, which is excluded from both.
    #[pyo3(signature = (titles, day0, span = 7))]
    fn window_totals(
        &self,
        titles: Vec<String>,
        day0: &str,
        span: u32,
    ) -> PyResult<(Vec<u64>, Vec<u64>)> {
        let titles = titles
            .iter()
            .map(|t| title(t))
            .collect::<PyResult<Vec<_>>>()?;
        let w = self
            .0
            .window_totals(&titles, date(day0)?, span)
            .map_err(err)?;
        Ok((w.before, w.after))
    }

    fn titles(&self) -> Vec<String> {
        self.0.iter().map(|s| s.title.to_string()).collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Runs one pipeline stage (`ingest`, `cohort`, `features`, `attention`,
/// `report`) against a config file and returns its summary.
#[pyfunction]
#[pyo3(signature = (stage, config, seed = None, out = None))]
fn run_stage(
    py: Python<'_>,
    stage: &str,
    config: PathBuf,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> PyResult<Py<PyAny>> {
    let mut cfg = RunConfig::load(&config).map_err(err)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.out = o;
    }
    match stage {
        "ingest" => to_py(py, &pipeline::cmd_ingest(&cfg).map_err(err)?),
        "cohort" => to_py(py, &pipeline::cmd_cohort(&cfg).map_err(err)?),
        "features" => to_py(py, &pipeline::cmd_features(&cfg).map_err(err)?),
        "attention" => to_py(py, &pipeline::cmd_attention(&cfg).map_err(err)?),
        "report" => to_py(py, &pipeline::cmd_report(&cfg).map_err(err)?),
        other => Err(PyValueError::new_err(format!("unknown stage {other:?}"))),
    }
}

/// Writes a synthetic data set with a planted attention effect and returns
/// the path of its config file.
#[pyfunction]
#[pyo3(signature = (dir, hoaxes = 20, cohort_size = 50, effect = 3.0, out_of_coverage = 0, seed = 1))]
fn generate_planted(
    dir: PathBuf,
    hoaxes: usize,
    cohort_size: usize,
    effect: f64,
    out_of_coverage: usize,
    seed: u64,
) -> PyResult<PathBuf> {
    let spec = PlantedSpec {
        hoaxes,
        cohort_size,
        effect,
        out_of_coverage_hoaxes: out_of_coverage,
        seed,
        ..Default::default()
    };
    synth::generate(&dir, &spec)
        .map(|w| w.config_path)
        .map_err(err)
}

#[pymodule]
#[pyo3(name = "hoaxattn")]
pub fn hoaxattn_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HoaxattnError", m.py().get_type::<HoaxattnError>())?;
    m.add_function(wrap_pyfunction!(clean_title, m)?)?;
    m.add_function(wrap_pyfunction!(parse_line, m)?)?;
    m.add_function(wrap_pyfunction!(strip_markup, m)?)?;
    m.add_function(wrap_pyfunction!(count_words, m)?)?;
    m.add_function(wrap_pyfunction!(extract_wikilinks, m)?)?;
    m.add_function(wrap_pyfunction!(extract_external_links, m)?)?;
    m.add_function(wrap_pyfunction!(compute_features, m)?)?;
    m.add_function(wrap_pyfunction!(median, m)?)?;
    m.add_function(wrap_pyfunction!(modified_z, m)?)?;
    m.add_function(wrap_pyfunction!(delta_v, m)?)?;
    m.add_function(wrap_pyfunction!(cohort_d, m)?)?;
    m.add_function(wrap_pyfunction!(bootstrap_mean_ci, m)?)?;
    m.add_function(wrap_pyfunction!(run_stage, m)?)?;
    m.add_function(wrap_pyfunction!(generate_planted, m)?)?;
    m.add_class::<RedirectTable>()?;
    m.add_class::<TrafficStore>()?;
    Ok(())
}
