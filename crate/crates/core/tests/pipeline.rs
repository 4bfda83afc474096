use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use hoaxattn::pipeline::{
    cmd_attention, cmd_cohort, cmd_features, cmd_ingest, cmd_report, RunConfig,
};
use hoaxattn::synth::{self, PlantedSpec};
use hoaxattn::wikitext::ArticleSource;
use hoaxattn::{CanonicalTitle, Error};

fn rows(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            header
                .iter()
                .zip(rec.iter())
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}

fn run_all(cfg: &RunConfig) {
    cmd_ingest(cfg).unwrap();
    cmd_cohort(cfg).unwrap();
    cmd_features(cfg).unwrap();
    cmd_attention(cfg).unwrap();
    cmd_report(cfg).unwrap();
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn small_spec() -> PlantedSpec {
    PlantedSpec {
        hoaxes: 5,
        cohort_size: 12,
        out_of_coverage_hoaxes: 2,
        resamples: 2_000,
        ..Default::default()
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let w = synth::generate(tmp.path(), &small_spec()).unwrap();
    let mut a = w.config.clone();
    a.out = tmp.path().join("run_a");
    let mut b = w.config.clone();
    b.out = tmp.path().join("run_b");
    run_all(&a);
    run_all(&b);
    let fa = files_under(&a.out);
    assert_eq!(fa, files_under(&b.out));
    assert!(fa.iter().any(|p| p.starts_with("store")));
    for f in &fa {
        assert_eq!(
            fs::read(a.out.join(f)).unwrap(),
            fs::read(b.out.join(f)).unwrap(),
            "{}",
            f.display()
        );
    }
}

#[test]
fn seed_changes_only_the_interval() {
    let tmp = tempfile::tempdir().unwrap();
    let w = synth::generate(tmp.path(), &small_spec()).unwrap();
    let mut cfg = w.config.clone();
    cmd_ingest(&cfg).unwrap();
    let s1 = cmd_attention(&cfg).unwrap();
    let r1 = fs::read(cfg.out.join("results.csv")).unwrap();
    cfg.seed = 99;
    let s2 = cmd_attention(&cfg).unwrap();
    assert_eq!(r1, fs::read(cfg.out.join("results.csv")).unwrap());
    assert_eq!(s1.sample_mean, s2.sample_mean);
    assert_ne!(s1.ci, s2.ci);
}

#[test]
fn every_hoax_is_analyzed_or_excluded_once() {
    let tmp = tempfile::tempdir().unwrap();
    let w = synth::generate(tmp.path(), &small_spec()).unwrap();
    cmd_ingest(&w.config).unwrap();
    let s = cmd_attention(&w.config).unwrap();
    let analyzed: Vec<String> = rows(&w.config.out.join("results.csv"))
        .into_iter()
        .map(|r| r["hoax_title"].clone())
        .collect();
    let excluded = rows(&w.config.out.join("exclusions.csv"));
    let mut all: Vec<String> = analyzed.clone();
    all.extend(excluded.iter().map(|r| r["hoax_title"].clone()));
    all.sort();
    let mut want: Vec<String> = w
        .planted_hoaxes
        .iter()
        .chain(&w.out_of_coverage_hoaxes)
        .map(|t| t.to_string())
        .collect();
    want.sort();
    assert_eq!(all, want);
    assert_eq!(s.analyzed + s.excluded, s.hoaxes);
    assert!(excluded.iter().all(|r| r["reason"] == "out_of_coverage"));
    assert_eq!(excluded.len(), 2);
}

#[test]
fn report_writes_one_plot_per_hoax_and_a_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let w = synth::generate(tmp.path(), &small_spec()).unwrap();
    run_all(&w.config);
    let plots = w.config.plots_dir();
    let mut names: Vec<String> = fs::read_dir(&plots)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(names.len(), 6, "{names:?}");
    assert!(names.contains(&"summary.svg".to_string()));
    for t in &w.planted_hoaxes {
        assert!(names.contains(&format!("hoax-{t}.svg")), "{t}");
    }
    let svg = fs::read_to_string(plots.join("summary.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn report_without_attention_output_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        out: tmp.path().join("out"),
        ..Default::default()
    };
    match cmd_report(&cfg) {
        Err(Error::MissingInput(m)) => assert!(m.contains("results.csv"), "{m}"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn ingest_without_logs_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::create_dir(tmp.path().join("logs")).unwrap();
    let cfg = RunConfig {
        logs: Some(tmp.path().join("logs")),
        out: tmp.path().join("out"),
        ..Default::default()
    };
    let e = cmd_ingest(&cfg).unwrap_err();
    assert!(e.is_input_error(), "{e}");
}

/// One hoax with three same-day members and one hoax alone on its day
/// without an article file.
fn feature_world(dir: &Path) -> RunConfig {
    fs::write(
        dir.join("hoaxes.csv"),
        "title,created_at\nHoax_one,2010-03-10T12:00:00Z\nLonely_hoax,2010-03-12T08:00:00Z\n",
    )
    .unwrap();
    fs::write(
        dir.join("creations.csv"),
        "title,created_at,is_redirect,redirect_target\n\
         Hoax_one,2010-03-10T12:00:00Z,false,\n\
         Member_a,2010-03-10T01:00:00Z,false,\n\
         Member_b,2010-03-10T02:00:00Z,false,\n\
         Member_c,2010-03-10T03:00:00Z,false,\n\
         Other_day,2010-03-11T03:00:00Z,false,\n",
    )
    .unwrap();
    let articles = dir.join("articles");
    fs::create_dir(&articles).unwrap();
    let pages = [
        (
            "Hoax_one",
            "A short [[Claim]] about [[Nothing]] at all really.",
        ),
        ("Member_a", "One two three [[Four]]."),
        ("Member_b", "One two three four five [[Six]] [[Seven]]."),
        (
            "Member_c",
            "One two three four five six seven eight [[Nine]].",
        ),
    ];
    for (t, markup) in pages {
        ArticleSource::from_markup(CanonicalTitle::parse(t).unwrap(), markup)
            .save(&articles)
            .unwrap();
    }
    RunConfig {
        hoaxes: Some(dir.join("hoaxes.csv")),
        creations: Some(dir.join("creations.csv")),
        articles: Some(articles),
        out: dir.join("out"),
        ..Default::default()
    }
}

#[test]
fn features_and_z_scores_for_a_small_cohort() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = feature_world(tmp.path());
    let s = cmd_features(&cfg).unwrap();
    assert_eq!((s.articles, s.failed_articles, s.hoaxes_scored), (5, 1, 1));

    let features = rows(&cfg.out.join("features.csv"));
    let titles: Vec<&str> = features.iter().map(|r| r["title"].as_str()).collect();
    assert_eq!(titles, ["Hoax_one", "Member_a", "Member_b", "Member_c"]);
    let failures = rows(&cfg.out.join("feature_failures.csv"));
    assert_eq!(failures.len(), 1);
    assert_eq!(failures[0]["title"], "Lonely_hoax");
    assert_eq!(failures[0]["reason"], "missing_article");

    let z = rows(&cfg.out.join("zscores.csv"));
    assert_eq!(z.len(), 4);
    let by_feature: BTreeMap<&str, &BTreeMap<String, String>> =
        z.iter().map(|r| (r["feature"].as_str(), r)).collect();
    // Plain lengths 4, 7, 9 against the hoax's 8: median 7, MAD 2.
    let pl = by_feature["plain_length"];
    assert_eq!(
        (
            pl["x"].as_str(),
            pl["median"].as_str(),
            pl["mad"].as_str(),
            pl["z"].as_str()
        ),
        ("8", "7", "2", "0.5")
    );
    assert_eq!(pl["status"], "ok");
    let ext = by_feature["extlink_density"];
    assert_eq!(
        (ext["status"].as_str(), ext["z"].as_str()),
        ("zero_mad", "")
    );
    // Every member's plain text has as many words as its markup.
    assert_eq!(by_feature["ratio"]["status"], "zero_mad");
    assert_eq!(s.zero_mad_rows, 2);

    let ex = rows(&cfg.out.join("feature_exclusions.csv"));
    assert_eq!(ex.len(), 1);
    assert_eq!(
        (ex[0]["hoax_title"].as_str(), ex[0]["reason"].as_str()),
        ("Lonely_hoax", "empty_cohort")
    );
}

#[test]
fn empty_cohort_is_excluded_with_reason() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = feature_world(tmp.path());
    let s = cmd_cohort(&cfg).unwrap();
    assert_eq!((s.hoaxes, s.cohorts, s.excluded, s.members), (2, 1, 1, 3));
    let ex = rows(&cfg.out.join("cohort_exclusions.csv"));
    assert_eq!(ex[0]["reason"], "empty_cohort");
    let members: Vec<String> = rows(&cfg.out.join("cohorts.csv"))
        .into_iter()
        .map(|r| r["member_title"].clone())
        .collect();
    assert_eq!(members, ["Member_a", "Member_b", "Member_c"]);
}
