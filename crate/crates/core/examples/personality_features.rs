//! Trait classifier over word vectors; its hidden layer is the personality
//! view of a document.
//!
//! cargo run --example personality_features

use sarcasm_ctx::embed::cascade::proxy_trait_corpus;
use sarcasm_ctx::embed::personality::{train_personality_net, PersonalityConfig};
use sarcasm_ctx::synth::toy_sentences;

fn main() -> sarcasm_ctx::Result<()> {
    let docs = toy_sentences(200, 40, 1);
    let examples = proxy_trait_corpus(&docs);
    let (train, held) = examples.split_at(160);
    let model = train_personality_net(
        train,
        &PersonalityConfig {
            hidden: 32,
            epochs: 40,
            ..PersonalityConfig::default()
        },
    )?;
    println!("feature dim {}", model.dim());
    println!(
        "trait accuracy: train {:.3}, held out {:.3}",
        model.accuracy(train),
        model.accuracy(held)
    );
    let p = model.predict(&docs[0]);
    println!("{:?} -> trait probabilities {:.2?}", docs[0], p);
    Ok(())
}
