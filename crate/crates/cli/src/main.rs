use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use log::LevelFilter;

use hoaxattn::pipeline::{self, RunConfig};
use hoaxattn::synth::{self, PlantedSpec};
use hoaxattn::CanonicalTitle;

/// Does attention to a topic precede the creation of hoax articles?
///
/// Batch pipeline over hourly page-request logs, article markup and
/// creation lists. All commands read the same TOML config.
#[derive(Debug, Parser)]
#[command(name = "hoaxattn", version)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, default_value = "hoaxattn.toml")]
    config: PathBuf,

    /// Override the bootstrap seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// More logging (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse, filter and aggregate hourly logs into the traffic store.
    Ingest,
    /// Build same-day cohorts for every hoax.
    Cohort,
    /// Appearance features and modified z-scores against each cohort.
    Features,
    /// Relative traffic change, per-hoax D and its bootstrap interval.
    Attention,
    /// Render per-hoax and summary SVG figures from attention results.
    Report,
    /// Ingest, cohort, features, attention and report in sequence.
    Run,
    /// Download article fixtures from a MediaWiki API.
    Fetch {
        /// Additional titles to fetch.
        titles: Vec<String>,
    },
    /// Write a synthetic data set with a planted effect.
    Synth {
        /// Output directory for the generated inputs and config.
        dir: PathBuf,
        #[arg(long, default_value_t = 20)]
        hoaxes: usize,
        #[arg(long, default_value_t = 50)]
        cohort_size: usize,
        /// Traffic multiplier before hoax creation (1 = no effect).
        #[arg(long, default_value_t = 3.0)]
        effect: f64,
        /// Extra hoaxes whose windows fall outside the logs.
        #[arg(long, default_value_t = 0)]
        out_of_coverage: usize,
    },
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&cli.config)
        .with_context(|| format!("loading config {}", cli.config.display()))?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

fn ingest(cfg: &RunConfig) -> Result<()> {
    let s = pipeline::cmd_ingest(cfg)?;
    let t = &s.tallies;
    println!(
        "ingest: {} files ({} unreadable), {} lines, {} kept, {} malformed, {} other project, {} bad title, {} other namespace",
        s.files, s.unreadable_files, t.lines, t.kept, t.malformed, t.wrong_project, t.bad_title, t.other_namespace
    );
    match s.coverage {
        Some(c) => println!(
            "store: {} titles, coverage {} to {}",
            s.titles, c.start, c.end
        ),
        None => println!("store: empty, no coverage"),
    }
    Ok(())
}

fn cohort(cfg: &RunConfig) -> Result<()> {
    let s = pipeline::cmd_cohort(cfg)?;
    println!(
        "cohort: {} hoaxes, {} cohorts, {} excluded; {} same-day entries reduced to {} members",
        s.hoaxes, s.cohorts, s.excluded, s.raw_entries, s.members
    );
    Ok(())
}

fn features(cfg: &RunConfig) -> Result<()> {
    let s = pipeline::cmd_features(cfg)?;
    println!(
        "features: {} articles ({} failed), {} hoaxes scored, {} zero-MAD rows, {} excluded",
        s.articles, s.failed_articles, s.hoaxes_scored, s.zero_mad_rows, s.excluded
    );
    Ok(())
}

fn attention(cfg: &RunConfig) -> Result<()> {
    let s = pipeline::cmd_attention(cfg)?;
    println!(
        "attention: {} of {} hoaxes analyzed, {} excluded",
        s.analyzed, s.hoaxes, s.excluded
    );
    for (reason, n) in &s.exclusions_by_reason {
        println!("  excluded {reason}: {n}");
    }
    match (s.sample_mean, s.ci) {
        (Some(m), Some([lo, hi])) => println!(
            "mean D = {m:.4}, 95% CI [{lo:.4}, {hi:.4}], D > 0 for {} of {} ({} resamples, seed {})",
            s.positive_d, s.analyzed, s.resamples, s.seed
        ),
        _ => println!("no D values; bootstrap skipped"),
    }
    Ok(())
}

fn report(cfg: &RunConfig) -> Result<()> {
    let s = pipeline::cmd_report(cfg)?;
    println!(
        "report: {} hoax plots, summary at {}",
        s.hoax_plots,
        s.summary_plot.display()
    );
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Synth {
            dir,
            hoaxes,
            cohort_size,
            effect,
            out_of_coverage,
        } => {
            let spec = PlantedSpec {
                hoaxes: *hoaxes,
                cohort_size: *cohort_size,
                effect: *effect,
                out_of_coverage_hoaxes: *out_of_coverage,
                seed: cli.seed.unwrap_or(PlantedSpec::default().seed),
                ..Default::default()
            };
            let w = synth::generate(dir, &spec)?;
            println!(
                "synth: {} hourly files, {} lines, config at {}",
                w.log_files,
                w.log_lines,
                w.config_path.display()
            );
            Ok(())
        }
        Command::Ingest => ingest(&load_config(cli)?),
        Command::Cohort => cohort(&load_config(cli)?),
        Command::Features => features(&load_config(cli)?),
        Command::Attention => attention(&load_config(cli)?),
        Command::Report => report(&load_config(cli)?),
        Command::Run => {
            let cfg = load_config(cli)?;
            ingest(&cfg)?;
            cohort(&cfg)?;
            features(&cfg)?;
            attention(&cfg)?;
            report(&cfg)
        }
        Command::Fetch { titles } => {
            let cfg = load_config(cli)?;
            let extra = titles
                .iter()
                .map(|t| {
                    CanonicalTitle::parse(t)
                        .ok_or_else(|| hoaxattn::Error::Config(format!("illegal title {t:?}")))
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let r = pipeline::cmd_fetch(&cfg, &extra)?;
            println!(
                "fetch: {} fetched, {} skipped, {} not found, {} failed",
                r.fetched.len(),
                r.skipped.len(),
                r.not_found.len(),
                r.http_errors.len()
            );
            Ok(())
        }
    }
}

/// 1 for bad inputs or configuration, 2 for anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<hoaxattn::Error>() {
        Some(e) if e.is_input_error() => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
