//! Exclusive models on a corpus where only the author's history carries the
//! label: sarcasm-prone users sprinkle a marker word through their timeline.
//!
//! cargo run --example planted_signal -- [seed] [section.key=value ...]

use std::time::Instant;

use sarcasm_ctx::embed::Method;
use sarcasm_ctx::models::ModelKind;
use sarcasm_ctx::pipeline::{cmd_embed, cmd_split, cmd_train_eval, PipelineConfig};
use sarcasm_ctx::synth::{planted_signal_corpus, UserCorpusConfig};

fn main() -> sarcasm_ctx::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seed: u64 = args.first().and_then(|s| s.parse().ok()).unwrap_or(0);
    let dir = tempfile::tempdir().expect("temp dir");
    let corpus = planted_signal_corpus(&UserCorpusConfig {
        seed,
        ..Default::default()
    })?;
    let (dataset, histories) = corpus.write(dir.path())?;

    let overrides: Vec<String> = args.iter().skip(1).cloned().collect();
    let mut cfg = PipelineConfig::from_toml("", &overrides, None)?;
    cfg.seed = seed;
    cfg.data.dataset = dataset;
    cfg.data.histories = Some(histories);
    cfg.out_dir = dir.path().join("out");
    let split = cmd_split(&cfg)?;
    println!(
        "split: {} / {} / {}",
        split.train.total, split.valid.total, split.test.total
    );

    for method in [Method::Ed, Method::WCascade] {
        let t = Instant::now();
        let e = cmd_embed(&cfg, method)?;
        let embed_secs = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let r = cmd_train_eval(&cfg, ModelKind::Exclusive(method))?;
        println!(
            "{:<14} F1 {:.3}  ({} embeddings, {} flagged; embed {:.1}s, train {:.1}s)",
            r.result.model,
            r.result.f1,
            e.embedded,
            e.flagged,
            embed_secs,
            t.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
