//! Command-line front end: Monte Carlo scenarios, likelihood landscapes, the
//! standard-error study and the speller simulator, all writing CSV (or JSON)
//! tables.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ctxmix_core::estim::FitConfig;
use ctxmix_core::scenario::{
    landscape, mip_experiment, run_scenario, tables, LandscapeConfig, MipConfig, ScenarioId,
    ScenarioSpec,
};
use ctxmix_core::speller::{
    run_speller_study, speller_csv, DriftPreset, SimConfig, SpellerAlgorithm, StreamConfig,
};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "ctxmix",
    about = "Context-aware maximum-likelihood estimation for finite mixture models",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo estimation scenario and write result tables.
    Scenario(ScenarioArgs),
    /// Trace log-likelihoods and first-iteration bounds over one free mean.
    Landscape(LandscapeArgs),
    /// Standard errors and convergence rates against contextual negentropy.
    Mip(MipArgs),
    /// Simulate online context-aware learning in the binary speller.
    Speller(SpellerArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario id: a|b|c|d|e|f|mixed|wrong|biased.
    #[arg(long)]
    id: String,
    /// Number of estimation problems.
    #[arg(long, default_value_t = 1000)]
    problems: usize,
    /// Comma-separated negentropy levels in [0, 1).
    #[arg(long)]
    ne_grid: Option<String>,
    /// Fraction of misleading labels (wrong scenario).
    #[arg(long, default_value_t = 0.2)]
    wrong_frac: f64,
    /// Actual first mixing weight (biased scenario).
    #[arg(long, default_value_t = 0.2)]
    pi1: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output path; aggregate and significance tables land next to it with
    /// .agg.csv and .sig.csv suffixes.
    #[arg(long)]
    out: PathBuf,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct LandscapeArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pi1: f64,
    #[arg(long, default_value_t = 0.0)]
    mu1_true: f64,
    #[arg(long, default_value_t = 1.0)]
    mu2: f64,
    #[arg(long, default_value_t = 0.5)]
    s1: f64,
    #[arg(long, default_value_t = 3.0)]
    s2: f64,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 2.0)]
    mu1_init: f64,
    /// Negentropy levels for the context-aware curves.
    #[arg(long, default_value = "0.7")]
    ne_set: String,
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    grid_start: f64,
    #[arg(long, default_value_t = 4.0)]
    grid_end: f64,
    #[arg(long, default_value_t = 400)]
    grid_points: usize,
    #[arg(long, default_value_t = 17)]
    seed: u64,
}

#[derive(Args)]
struct MipArgs {
    #[arg(long, default_value_t = 100)]
    reps: usize,
    /// Samples per repetition.
    #[arg(long, default_value_t = 10000)]
    n: usize,
    #[arg(long)]
    ne_grid: Option<String>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SpellerArgs {
    /// Comma-separated words to type.
    #[arg(long, default_value = "nothing,portion")]
    words: String,
    /// Comma-separated learners: S, CA, CAE.
    #[arg(long, default_value = "S,CA,CAE")]
    algorithms: String,
    /// Drift preset: none|shift|crossing.
    #[arg(long, default_value = "crossing")]
    drift: String,
    #[arg(long, default_value_t = 12)]
    subjects: usize,
    #[arg(long, default_value_t = 2026)]
    seed: u64,
    /// EM iterations per incoming sample.
    #[arg(long, default_value_t = 3)]
    online_iters: usize,
    /// Ring-buffer capacity.
    #[arg(long, default_value_t = 240)]
    buffer: usize,
    /// Net decisions needed to issue a command.
    #[arg(long, default_value_t = 8)]
    threshold: i64,
    /// Stream length per class.
    #[arg(long, default_value_t = 6000)]
    stream_len: usize,
    #[arg(long)]
    out: PathBuf,
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().context("bad negentropy value"))
        .collect()
}

fn write(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

/// results.csv -> results.agg.csv / results.sig.csv
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Scenario(a) => {
            let mut spec = ScenarioSpec::new(ScenarioId::parse(&a.id)?, a.problems, a.seed);
            if let Some(grid) = &a.ne_grid {
                spec.ne_grid = parse_grid(grid)?;
            }
            spec.wrong_frac = a.wrong_frac;
            spec.pi1 = a.pi1;
            let report = run_scenario(&spec, &FitConfig::default())?;
            match a.format.as_str() {
                "csv" => {
                    write(&a.out, &tables::rows_csv(&report))?;
                    write(&sibling(&a.out, "agg"), &tables::aggregates_csv(&report))?;
                    write(&sibling(&a.out, "sig"), &tables::significance_csv(&report))?;
                }
                "json" => write(&a.out, &tables::report_json(&report))?,
                other => bail!("unknown format {other:?} (use csv or json)"),
            }
            eprintln!(
                "scenario {}: {} rows, {} generation failures, {} retries",
                spec.id.name(),
                report.rows.len(),
                report.generation_failures,
                report.generation_retries
            );
        }
        Command::Landscape(a) => {
            let cfg = LandscapeConfig {
                pi1: a.pi1,
                mu1_true: a.mu1_true,
                mu2: a.mu2,
                s1: a.s1,
                s2: a.s2,
                n: a.n,
                mu1_init: a.mu1_init,
                ne_set: parse_grid(&a.ne_set)?,
                grid_start: a.grid_start,
                grid_end: a.grid_end,
                grid_points: a.grid_points,
                seed: a.seed,
            };
            let points = landscape(&cfg)?;
            write(&a.out, &tables::landscape_csv(&points))?;
            eprintln!("landscape: {} points", points.len());
        }
        Command::Mip(a) => {
            let mut cfg = MipConfig {
                reps: a.reps,
                n: a.n,
                seed: a.seed,
                ..MipConfig::default()
            };
            if let Some(grid) = &a.ne_grid {
                cfg.ne_grid = parse_grid(grid)?;
            }
            let agg = mip_experiment(&cfg)?;
            write(&a.out, &tables::mip_csv(&agg))?;
            eprintln!("mip: {} cells", agg.len());
        }
        Command::Speller(a) => {
            let words: Vec<String> = a.words.split(',').map(|w| w.trim().to_string()).collect();
            let algorithms: Vec<SpellerAlgorithm> = a
                .algorithms
                .split(',')
                .map(|s| {
                    SpellerAlgorithm::parse(s.trim())
                        .with_context(|| format!("unknown algorithm {s:?}"))
                })
                .collect::<Result<_>>()?;
            let drift = DriftPreset::parse(&a.drift)
                .with_context(|| format!("unknown drift preset {:?}", a.drift))?;
            let stream_cfg = StreamConfig {
                drift,
                len_per_class: a.stream_len,
                ..StreamConfig::default()
            };
            let mut sim_cfg = SimConfig::default();
            sim_cfg.online.online_iters = a.online_iters;
            sim_cfg.online.capacity = a.buffer;
            sim_cfg.command_threshold = a.threshold;
            let rows =
                run_speller_study(a.subjects, &words, &algorithms, &stream_cfg, &sim_cfg, a.seed)?;
            write(&a.out, &speller_csv(&rows))?;
            eprintln!("speller: {} trace points", rows.len());
        }
    }
    Ok(())
}
