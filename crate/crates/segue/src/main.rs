//! `segue` — batch playlist-continuation pipeline CLI.
//!
//! Every subcommand takes `--config <run.toml>` and operates on the
//! artifacts under the configured output directory. The typical sequence
//! is `ingest → split → build-index → optimize → evaluate → submit`.

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use segue::harness::pipeline::{
    run_build_index, run_evaluate, run_ingest, run_optimize, run_recommend, run_split, run_submit,
    RunPaths,
};
use segue::harness::RunConfig;

#[derive(Parser)]
#[command(name = "segue", version, about = "Batch automatic-playlist-continuation engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration file (TOML).
    #[arg(short, long)]
    config: PathBuf,
    /// Shrink N, TPE budget, and split quotas for quick desk-scale runs.
    #[arg(long)]
    desk_scale: bool,
    /// Override the recommendation list length (model.n).
    #[arg(long)]
    n: Option<usize>,
    /// Override the TPE trial budget (tpe.budget).
    #[arg(long)]
    budget: Option<usize>,
    /// Override the per-category split quota (splits.quota_per_category).
    #[arg(long)]
    quota: Option<usize>,
    /// Override the run directory (output.dir).
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse the JSON slices and write the interned corpus artifact.
    Ingest(Common),
    /// Carve the optimization and validation splits from the corpus.
    Split(Common),
    /// Build the four co-occurrence indices over the training range.
    BuildIndex(Common),
    /// Tune composition weights with TPE on the optimization split.
    Optimize(Common),
    /// Score a weight profile on the validation split.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Weight profile to evaluate (defaults to the run's weights.json).
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Recommend continuations for a challenge file, as JSON lines.
    Recommend {
        #[command(flatten)]
        common: Common,
        /// Challenge file: playlists with seed tracks and no holdout.
        #[arg(long)]
        challenge: PathBuf,
        /// Weight profile (defaults to the run's weights.json).
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Output path (defaults to recommendations.jsonl in the run dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a challenge submission CSV.
    Submit {
        #[command(flatten)]
        common: Common,
        /// Challenge file: playlists with seed tracks and no holdout.
        #[arg(long)]
        challenge: PathBuf,
        /// Weight profile (defaults to the run's weights.json).
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Output path (defaults to submission.csv in the run dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn effective_config(common: &Common) -> anyhow::Result<(RunConfig, RunPaths)> {
    let mut config = RunConfig::load(&common.config)?;
    if common.desk_scale {
        config.apply_desk_scale();
    }
    if let Some(n) = common.n {
        config.model.n = n;
    }
    if let Some(budget) = common.budget {
        config.tpe.budget = budget;
    }
    if let Some(quota) = common.quota {
        config.splits.quota_per_category = quota;
    }
    if let Some(dir) = &common.output_dir {
        config.output.dir = dir.clone();
    }
    config
        .validate()
        .map_err(|message| anyhow::anyhow!("{}: invalid config: {message}", common.config.display()))?;
    let paths = RunPaths::new(&config.output.dir);
    Ok((config, paths))
}

fn init_workers() -> anyhow::Result<()> {
    if let Ok(value) = std::env::var("SEGUE_WORKERS") {
        let workers: usize = value
            .parse()
            .with_context(|| format!("SEGUE_WORKERS={value:?} is not a number"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .context("worker pool already initialized")?;
    }
    Ok(())
}

fn warn_unknown_seeds(count: usize) {
    match count {
        0 => {}
        1 => eprintln!("warning: dropped 1 unknown seed URI not present in the corpus"),
        n => eprintln!("warning: dropped {n} unknown seed URIs not present in the corpus"),
    }
}

fn main() -> anyhow::Result<()> {
    init_workers()?;
    let cli = Cli::parse();
    match &cli.command {
        Command::Ingest(common) => {
            let (config, paths) = effective_config(common)?;
            let summary = run_ingest(&config, &paths)?;
            println!(
                "ingested {} playlists: {} tracks, {} artists, {} albums, {} title words",
                summary.playlists, summary.tracks, summary.artists, summary.albums, summary.words
            );
            println!("corpus artifact: {}", paths.corpus().display());
        }
        Command::Split(common) => {
            let (config, paths) = effective_config(common)?;
            let (opt, val) = run_split(&config, &paths)?;
            println!("opt split: {opt} playlists ({})", paths.split(segue::harness::pipeline::SplitKind::Opt).display());
            println!("val split: {val} playlists ({})", paths.split(segue::harness::pipeline::SplitKind::Val).display());
        }
        Command::BuildIndex(common) => {
            let (config, paths) = effective_config(common)?;
            for line in run_build_index(&config, &paths)? {
                println!("{line}");
            }
            println!("indices written to {}", paths.index_dir().display());
        }
        Command::Optimize(common) => {
            let (config, paths) = effective_config(common)?;
            let outcome = run_optimize(&config, &paths)?;
            for (label, best, trials) in &outcome.runs {
                println!("{label}: best mean NDCG {:.4} over {trials} trials", -best);
            }
            print!("{}", outcome.table);
            println!("weights: {}", paths.weights().display());
        }
        Command::Evaluate { common, weights } => {
            let (config, paths) = effective_config(common)?;
            let report = run_evaluate(&config, &paths, weights.as_deref())?;
            print!("{}", report.table_text());
            println!("report: {}", paths.report_txt().display());
        }
        Command::Recommend {
            common,
            challenge,
            weights,
            out,
        } => {
            let (config, paths) = effective_config(common)?;
            let outcome = run_recommend(&config, &paths, challenge, weights.as_deref(), out.as_deref())?;
            warn_unknown_seeds(outcome.unknown_seed_uris);
            println!(
                "recommended for {} playlists → {}",
                outcome.playlists,
                outcome.out_path.display()
            );
        }
        Command::Submit {
            common,
            challenge,
            weights,
            out,
        } => {
            let (config, paths) = effective_config(common)?;
            let outcome = run_submit(&config, &paths, challenge, weights.as_deref(), out.as_deref())?;
            warn_unknown_seeds(outcome.unknown_seed_uris);
            println!(
                "submission for {} playlists → {}",
                outcome.playlists,
                outcome.out_path.display()
            );
        }
    }
    Ok(())
}
