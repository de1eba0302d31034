use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sarcasm_ctx::pipeline::{self, PipelineConfig};
use sarcasm_ctx::synth::{mixed_signal_corpus, planted_signal_corpus, riloff_fixture, UserCorpusConfig};
use sarcasm_ctx::{Error, Result};

#[derive(Parser)]
#[command(name = "sarcasm", version, about = "Contextual sarcasm detection pipeline")]
struct Cli {
    /// TOML config file; relative paths inside resolve against its directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override any config key, e.g. `--set train.epochs=5`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate the dataset and histories.
    Ingest,
    /// Assign users to buckets and write the split manifest.
    Split,
    /// Fit a user-embedding method and embed every labeled tweet's author.
    Embed {
        #[arg(long)]
        method: Option<String>,
    },
    /// Train a classifier and append its test score to results.csv.
    TrainEval {
        #[arg(long)]
        model: Option<String>,
    },
    /// Label/tag disagreement table and tag-relabeled dataset.
    Analyze,
    /// Print results.csv as a model-by-dataset table.
    Table,
    /// Write a synthetic corpus and its histories.
    Generate {
        #[arg(long, value_enum)]
        kind: CorpusKind,
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value_t = 60)]
        users: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusKind {
    Riloff,
    Planted,
    Mixed,
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut overrides = cli.overrides.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("seed={seed}"));
    }
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path, &overrides)?,
        None => PipelineConfig::from_toml("", &overrides, None)?,
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    if let Command::Generate { kind, dir, users } = &cli.command {
        let seed = cli.seed.unwrap_or(0);
        let corpus = match kind {
            CorpusKind::Riloff => riloff_fixture()?,
            CorpusKind::Planted => planted_signal_corpus(&UserCorpusConfig {
                users: *users,
                seed,
                ..Default::default()
            })?,
            CorpusKind::Mixed => mixed_signal_corpus(&UserCorpusConfig {
                users: *users,
                seed,
                ..Default::default()
            })?,
        };
        std::fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
        let (d, h) = corpus.write(dir)?;
        println!("{}\n{}", d.display(), h.display());
        return Ok(());
    }
    let mut cfg = load_config(&cli)?;
    match cli.command {
        Command::Ingest => {
            let r = pipeline::cmd_ingest(&cfg)?;
            println!(
                "{}: {} tweets, {} sarcastic, {} non-sarcastic, {} users",
                r.dataset, r.counts.total, r.counts.sarcastic, r.counts.non_sarcastic, r.users
            );
        }
        Command::Split => {
            let r = pipeline::cmd_split(&cfg)?;
            println!(
                "train {} / valid {} / test {}",
                r.train.total, r.valid.total, r.test.total
            );
        }
        Command::Embed { method } => {
            if let Some(m) = method {
                cfg.embed.method = m;
            }
            let r = pipeline::cmd_embed(&cfg, cfg.method()?)?;
            println!(
                "{}: {} embeddings of dim {} ({} flagged) -> {}",
                r.method,
                r.embedded,
                r.dims,
                r.flagged,
                r.store.display()
            );
        }
        Command::TrainEval { model } => {
            if let Some(m) = model {
                cfg.train.model = m;
            }
            let r = pipeline::cmd_train_eval(&cfg, cfg.model()?)?;
            println!(
                "{} on {}: F1 {:.4} (tp {} fp {} fn {} tn {}), epoch {} selected",
                r.result.model,
                r.result.dataset,
                r.result.f1,
                r.result.counts.tp,
                r.result.counts.fp,
                r.result.counts.fn_,
                r.result.counts.tn,
                r.selected_epoch
            );
        }
        Command::Analyze => {
            let r = pipeline::cmd_analyze(&cfg)?;
            println!("{}\nrelabeled sarcastic: {}", r.table, r.relabeled_sarcastic);
        }
        Command::Table => print!("{}", pipeline::cmd_table(&cfg)?),
        Command::Generate { .. } => unreachable!("handled above"),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
