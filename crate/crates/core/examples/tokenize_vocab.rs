//! Tokenize tweets, strip sarcasm tags, build a vocabulary and encode.
//!
//! cargo run --example tokenize_vocab -- "some tweet text" ...

use sarcasm_ctx::corpus::TagSet;
use sarcasm_ctx::preprocess::{build_vocab, decode, encode, strip_sarcasm_tags, tokenize, word_count};

fn main() {
    let mut texts: Vec<String> = std::env::args().skip(1).collect();
    if texts.is_empty() {
        texts = vec![
            "Love waiting 2 hours for the bus!! #sarcasm".into(),
            "@bob check https://t.co/x I love the bus, don't you? #not".into(),
            "waiting for the bus again #Sarcastic".into(),
        ];
    }
    let tags = TagSet::sarcasm();
    let tokens: Vec<Vec<String>> = texts.iter().map(|t| strip_sarcasm_tags(&tokenize(t), &tags)).collect();
    for t in &tokens {
        println!("{} words: {:?}", word_count(t), t);
    }
    let vocab = build_vocab(tokens.iter().map(Vec::as_slice));
    println!("vocabulary ({}): {:?}", vocab.len(), vocab.tokens());
    let ids = encode(&tokens[0], &vocab);
    println!("{ids:?} -> {:?}", decode(&ids, &vocab));
}
