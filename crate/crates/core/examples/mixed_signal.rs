//! Text-only, history-only and combined classifiers on a corpus where half
//! the labels follow a cue word in the tweet and half follow the author.
//!
//! cargo run --example mixed_signal -- [seed] [section.key=value ...]

use std::time::Instant;

use sarcasm_ctx::embed::Method;
use sarcasm_ctx::models::ModelKind;
use sarcasm_ctx::pipeline::{cmd_embed, cmd_split, cmd_train_eval, PipelineConfig};
use sarcasm_ctx::synth::{mixed_signal_corpus, UserCorpusConfig};

fn main() -> sarcasm_ctx::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seed: u64 = args.first().and_then(|s| s.parse().ok()).unwrap_or(0);
    let dir = tempfile::tempdir().expect("temp dir");
    let corpus = mixed_signal_corpus(&UserCorpusConfig {
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
    cmd_split(&cfg)?;
    cmd_embed(&cfg, Method::Ed)?;

    for kind in [
        ModelKind::Siarn,
        ModelKind::Exclusive(Method::Ed),
        ModelKind::Inclusive(Method::Ed),
    ] {
        let t = Instant::now();
        let r = cmd_train_eval(&cfg, kind)?;
        println!(
            "{:<8} F1 {:.3}  (epoch {} selected, {:.1}s)",
            r.result.model,
            r.result.f1,
            r.selected_epoch,
            t.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
