//! Autoencoder and synthetic-summary objectives for the BiLSTM encoder, and
//! the fixed-size state each one produces.
//!
//! cargo run --example seq2seq_encoder -- [epochs]

use sarcasm_ctx::embed::seq2seq::{train_autoencoder, train_summarizer, Seq2SeqConfig};
use sarcasm_ctx::synth::{summary_pairs, toy_sentences};

fn main() -> sarcasm_ctx::Result<()> {
    let epochs: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(40);
    let corpus = toy_sentences(50, 30, 3);
    let cfg = Seq2SeqConfig {
        embed_dim: 32,
        hidden: 32,
        d_e: 16,
        epochs,
        learning_rate: 0.01,
        batch_size: 8,
        seed: 1,
    };
    let identity: Vec<_> = corpus.iter().map(|s| (s.clone(), s.clone())).collect();
    let ae = train_autoencoder(&corpus, &cfg)?;
    println!(
        "autoencoder: loss {:.3} -> {:.3}, reconstruction accuracy {:.3}",
        ae.epoch_losses[0],
        ae.epoch_losses[epochs - 1],
        ae.token_accuracy(&identity)
    );

    let pairs = summary_pairs(&corpus);
    let sm = train_summarizer(&pairs, &cfg)?;
    println!(
        "summarizer:  loss {:.3} -> {:.3}, summary accuracy {:.3}",
        sm.epoch_losses[0],
        sm.epoch_losses[epochs - 1],
        sm.token_accuracy(&pairs)
    );

    let state = ae.encode_state(&corpus[0]).expect("known tokens");
    println!(
        "state of {:?}: {} values, first {:.3?}",
        corpus[0],
        state.len(),
        &state[..4]
    );
    Ok(())
}
