use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::attention::{auto_range, histogram, Bin};
use crate::error::{Error, Result};
use crate::logstore::title::{title_to_filename, CanonicalTitle};
use crate::pipeline::output::read_csv;
use crate::pipeline::run::{HIST_HEADER, RESULTS_HEADER, SCORES_HEADER};
use crate::pipeline::svg::{Band, Marker, Panel, Svg};
use crate::pipeline::RunConfig;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportSummary {
    pub hoax_plots: usize,
    pub summary_plot: PathBuf,
}

struct ResultRow {
    title: CanonicalTitle,
    delta_v: f64,
    cohort_mean: f64,
    n: usize,
    d: f64,
}

fn num<T: std::str::FromStr>(path: &Path, row: usize, field: &str) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::malformed(path, row + 2, format!("bad number {field:?}")))
}

fn title(path: &Path, row: usize, field: &str) -> Result<CanonicalTitle> {
    CanonicalTitle::parse(field)
        .ok_or_else(|| Error::malformed(path, row + 2, format!("bad title {field:?}")))
}

fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    let rows = read_csv(path, &RESULTS_HEADER)?;
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(ResultRow {
                title: title(path, i, &r[0])?,
                delta_v: num(path, i, &r[1])?,
                cohort_mean: num(path, i, &r[2])?,
                n: num(path, i, &r[3])?,
                d: num(path, i, &r[4])?,
            })
        })
        .collect()
}

/// Member ΔV/V values per hoax.
fn read_member_scores(path: &Path) -> Result<BTreeMap<CanonicalTitle, Vec<f64>>> {
    let rows = read_csv(path, &SCORES_HEADER)?;
    let mut out: BTreeMap<CanonicalTitle, Vec<f64>> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        if &r[2] != "member" || r[5].is_empty() {
            continue;
        }
        out.entry(title(path, i, &r[0])?)
            .or_default()
            .push(num(path, i, &r[5])?);
    }
    Ok(out)
}

fn read_bins(path: &Path) -> Result<Vec<Bin>> {
    let rows = read_csv(path, &HIST_HEADER)?;
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(Bin {
                low: num(path, i, &r[0])?,
                high: num(path, i, &r[1])?,
                count: num(path, i, &r[2])?,
            })
        })
        .collect()
}

fn read_summary(path: &Path) -> Result<(f64, f64, f64, usize)> {
    if !path.exists() {
        return Err(Error::MissingInput(format!("{} not found", path.display())));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let v: Value = serde_json::from_str(&text)?;
    let f = |p: &str| v.pointer(p).and_then(Value::as_f64);
    match (
        f("/sampleMean"),
        f("/ci/0"),
        f("/ci/1"),
        v.get("resamples").and_then(Value::as_u64),
    ) {
        (Some(m), Some(lo), Some(hi), Some(r)) => Ok((m, lo, hi, r as usize)),
        _ => Err(Error::malformed(
            path,
            1,
            "summary has no sample mean or interval",
        )),
    }
}

fn hoax_plot(r: &ResultRow, members: &[f64], bins: usize) -> String {
    let hist = histogram(members, -1.0, 1.0, bins);
    let mut svg = Svg::new(640, 400);
    svg.panel(&Panel {
        left: 70.0,
        top: 50.0,
        width: 530.0,
        height: 270.0,
        x_range: (-1.0, 1.0),
        title: format!("{} (D = {:.4}, n = {})", r.title.display_form(), r.d, r.n),
        x_label: "cohort ΔV/V",
        bins: &hist,
        markers: vec![
            Marker {
                x: r.delta_v,
                color: "#d62728",
                dashed: true,
                label: format!("hoax ΔV/V = {:.4}", r.delta_v),
            },
            Marker {
                x: r.cohort_mean,
                color: "#1f77b4",
                dashed: false,
                label: format!("cohort mean = {:.4}", r.cohort_mean),
            },
        ],
        band: None,
    });
    svg.finish()
}

fn summary_plot(
    results: &[ResultRow],
    means: &[Bin],
    stats: (f64, f64, f64, usize),
    bins: usize,
) -> String {
    let (mean, lo, hi, resamples) = stats;
    let d: Vec<f64> = results.iter().map(|r| r.d).collect();
    let (dlo, dhi) = auto_range(&d);
    let (dlo, dhi) = (dlo.min(lo).min(0.0), dhi.max(hi).max(0.0));
    let d_bins = histogram(&d, dlo, dhi, bins);
    let band = || Band {
        low: lo,
        high: hi,
        label: format!("95% CI [{lo:.4}, {hi:.4}]"),
    };
    let mean_marker = || Marker {
        x: mean,
        color: "black",
        dashed: true,
        label: format!("mean D = {mean:.4}"),
    };
    let zero = || Marker {
        x: 0.0,
        color: "#7f7f7f",
        dashed: false,
        label: "zero".to_string(),
    };

    let mut svg = Svg::new(1100, 420);
    svg.panel(&Panel {
        left: 70.0,
        top: 50.0,
        width: 430.0,
        height: 280.0,
        x_range: (dlo, dhi),
        title: format!("D over {} hoaxes", results.len()),
        x_label: "D",
        bins: &d_bins,
        markers: vec![mean_marker(), zero()],
        band: Some(band()),
    });
    let (mlo, mhi) = match (means.first(), means.last()) {
        (Some(a), Some(b)) => (a.low.min(lo), b.high.max(hi)),
        _ => (lo - 0.05, hi + 0.05),
    };
    svg.panel(&Panel {
        left: 620.0,
        top: 50.0,
        width: 430.0,
        height: 280.0,
        x_range: (mlo, mhi),
        title: format!("Means of {resamples} bootstrap resamples"),
        x_label: "mean D",
        bins: means,
        markers: vec![mean_marker()],
        band: Some(band()),
    });
    svg.finish()
}

/// Renders one SVG per analyzed hoax plus `summary.svg` into `out/plots`.
pub fn cmd_report(cfg: &RunConfig) -> Result<ReportSummary> {
    let results_path = cfg.out.join("results.csv");
    let results = read_results(&results_path)?;
    if results.is_empty() {
        return Err(Error::MissingInput(format!(
            "{} has no result rows",
            results_path.display()
        )));
    }
    let members = read_member_scores(&cfg.out.join("cohort_scores.csv"))?;
    let means = read_bins(&cfg.out.join("hist_means.csv"))?;
    let stats = read_summary(&cfg.out.join("summary.json"))?;

    let dir = cfg.plots_dir();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
        let p = entry.map_err(|e| Error::io(&dir, e))?.path();
        let stale = p
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with("hoax-") && n.ends_with(".svg"));
        if stale {
            fs::remove_file(&p).map_err(|e| Error::io(&p, e))?;
        }
    }
    let empty = Vec::new();
    for r in &results {
        let m = members.get(&r.title).unwrap_or(&empty);
        let path = dir.join(format!("hoax-{}.svg", title_to_filename(&r.title)));
        fs::write(&path, hoax_plot(r, m, cfg.histogram_bins)).map_err(|e| Error::io(&path, e))?;
    }
    let summary_plot_path = dir.join("summary.svg");
    fs::write(
        &summary_plot_path,
        summary_plot(&results, &means, stats, cfg.histogram_bins),
    )
    .map_err(|e| Error::io(&summary_plot_path, e))?;
    Ok(ReportSummary {
        hoax_plots: results.len(),
        summary_plot: summary_plot_path,
    })
}
