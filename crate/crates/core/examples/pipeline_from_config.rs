//! Every pipeline stage driven by a TOML config, as the CLI runs them.
//!
//! cargo run --example pipeline_from_config -- [config.toml] [section.key=value ...]
//!
//! Without a config file a planted corpus is generated and a small config
//! written next to it.

use std::path::PathBuf;

use sarcasm_ctx::pipeline::{cmd_analyze, cmd_embed, cmd_ingest, cmd_split, cmd_table, cmd_train_eval, PipelineConfig};
use sarcasm_ctx::synth::{planted_signal_corpus, UserCorpusConfig};

const SMALL: &str = r#"
seed = 1
out_dir = "out"

[data]
dataset = "data/planted_s1.jsonl"
histories = "data/planted_s1.histories.jsonl"

[embed]
method = "cascade"
d_e = 16
paragraph_dim = 32
paragraph_epochs = 10
personality_hidden = 32
personality_epochs = 5

[train]
model = "ex-cascade"
epochs = 20
learning_rate = 0.01
"#;

fn main() -> sarcasm_ctx::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1).peekable();
    let _keep;
    let path = match args.peek().filter(|a| !a.contains('=')) {
        Some(_) => PathBuf::from(args.next().expect("peeked")),
        None => {
            let dir = tempfile::tempdir().expect("temp dir");
            planted_signal_corpus(&UserCorpusConfig {
                seed: 1,
                ..Default::default()
            })?
            .write(dir.path().join("data"))?;
            let p = dir.path().join("run.toml");
            std::fs::write(&p, SMALL).expect("writing config");
            _keep = dir;
            p
        }
    };
    let overrides: Vec<String> = args.collect();
    let cfg = PipelineConfig::load(&path, &overrides)?;
    println!("config {} (sha256 {})", path.display(), &cfg.hash()[..12]);

    let ingest = cmd_ingest(&cfg)?;
    println!("ingest: {} tweets from {} users", ingest.counts.total, ingest.users);
    let split = cmd_split(&cfg)?;
    println!(
        "split: {} / {} / {}",
        split.train.total, split.valid.total, split.test.total
    );
    let embed = cmd_embed(&cfg, cfg.method()?)?;
    println!(
        "embed: {} vectors of dim {}, {} flagged",
        embed.embedded, embed.dims, embed.flagged
    );
    let run = cmd_train_eval(&cfg, cfg.model()?)?;
    println!("train-eval: {} F1 {:.3}", run.result.model, run.result.f1);
    let analysis = cmd_analyze(&cfg)?;
    println!("analyze: {} disagreements", analysis.table.disagreements());
    print!("{}", cmd_table(&cfg)?);
    Ok(())
}
