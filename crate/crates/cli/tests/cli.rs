use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hoaxattn(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hoaxattn"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth(dir: &Path, extra: &[&str]) {
    let mut args = vec!["synth", "data", "--hoaxes", "4", "--cohort-size", "8"];
    args.extend_from_slice(extra);
    let o = hoaxattn(&args, dir);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn run_on_planted_data() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), &[]);
    let o = hoaxattn(&["--config", "data/hoaxattn.toml", "run"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("attention: 4 of 4 hoaxes analyzed"), "{text}");
    assert!(text.contains("report: 4 hoax plots"), "{text}");
    let out = tmp.path().join("data/out");
    for f in [
        "results.csv",
        "summary.json",
        "plots/summary.svg",
        "ingest_report.csv",
    ] {
        assert!(out.join(f).exists(), "{f} missing");
    }
}

#[test]
fn stages_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), &["--out-of-coverage", "1"]);
    let cfg = "data/hoaxattn.toml";
    for (out, seed) in [("a", "5"), ("b", "5")] {
        for stage in ["ingest", "cohort", "features", "attention", "report"] {
            let o = hoaxattn(
                &["--config", cfg, "--out", out, "--seed", seed, stage],
                tmp.path(),
            );
            assert!(o.status.success(), "{stage}: {}", stderr(&o));
        }
    }
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for f in [
        "results.csv",
        "exclusions.csv",
        "cohort_scores.csv",
        "zscores.csv",
        "hist_means.csv",
        "plots/summary.svg",
        "summary.json",
    ] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let ex = fs::read_to_string(a.join("exclusions.csv")).unwrap();
    assert!(ex.contains("out_of_coverage"), "{ex}");
}

#[test]
fn missing_config_is_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = hoaxattn(&["--config", "nope.toml", "ingest"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope.toml"));
}

#[test]
fn empty_log_directory_is_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::create_dir(tmp.path().join("logs")).unwrap();
    fs::write(tmp.path().join("run.toml"), "logs = \"logs\"\n").unwrap();
    let o = hoaxattn(&["--config", "run.toml", "ingest"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no input files"), "{}", stderr(&o));
}

#[test]
fn report_without_results_names_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("run.toml"), "").unwrap();
    let o = hoaxattn(&["--config", "run.toml", "report"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("results.csv"), "{}", stderr(&o));
}

#[test]
fn bad_arguments_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(hoaxattn(&["frobnicate"], tmp.path()).status.code(), Some(1));
    assert_eq!(hoaxattn(&["--help"], tmp.path()).status.code(), Some(0));
}
