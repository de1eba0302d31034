//! Train the intra-attention text model on tweets with label cue words and
//! print its per-word attention weights.
//!
//! cargo run --example siarn_attention -- [epochs]

use sarcasm_ctx::corpus::Label;
use sarcasm_ctx::models::{train, Instance, ModelKind, TrainConfig};
use sarcasm_ctx::preprocess::{build_vocab, encode, load_word_vectors, tokenize, WordVectorSource};
use sarcasm_ctx::synth::cue_dataset;

fn main() -> sarcasm_ctx::Result<()> {
    let epochs: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(30);
    let dataset = cue_dataset(64, 0)?;
    let tokens: Vec<Vec<String>> = dataset.tweets().iter().map(|t| tokenize(&t.text)).collect();
    let vocab = build_vocab(tokens.iter().map(Vec::as_slice));
    let words = load_word_vectors(WordVectorSource::Random, &vocab, 50, 0)?;
    let data: Vec<(Instance, Label)> = dataset
        .tweets()
        .iter()
        .zip(&tokens)
        .map(|(t, toks)| {
            let inst = Instance {
                tweet_id: t.id.clone(),
                indices: encode(toks, &vocab),
                embedding: None,
            };
            (inst, t.label.expect("labeled"))
        })
        .collect();

    let cfg = TrainConfig {
        epochs,
        learning_rate: 0.005,
        siarn_hidden: 32,
        ..TrainConfig::default()
    };
    let trained = train(ModelKind::Siarn, &data, &[], Some(&words), 0, &cfg)?;
    let last = trained.metrics.last().expect("at least one epoch");
    println!(
        "epoch {}: loss {:.4}, train F1 {:.3}",
        last.epoch, last.train_loss, last.train_f1
    );

    for (inst, toks) in data.iter().map(|(i, _)| i).zip(&tokens).take(4) {
        let att = trained.classifier.siarn_attention(&inst.indices)?;
        let p = trained.classifier.probabilities(inst)?;
        let shown: Vec<String> = toks.iter().zip(&att).map(|(w, a)| format!("{w}:{a:.2}")).collect();
        println!("p(sarcastic) {:.2}  {}", p[1], shown.join(" "));
    }
    Ok(())
}
