//! PV-DBOW on two topics; inferred vectors of unseen documents land nearer
//! their own topic.
//!
//! cargo run --example paragraph_vectors

use sarcasm_ctx::embed::paragraph::{cosine, train_paragraph_vectors, ParagraphConfig};

fn doc(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

fn main() -> sarcasm_ctx::Result<()> {
    let sport = [
        "goal match team score",
        "team wins match",
        "score a late goal",
        "the team lost the match",
    ];
    let food = [
        "pasta sauce dinner",
        "cook pasta for dinner",
        "sauce needs salt",
        "dinner was pasta again",
    ];
    let docs: Vec<Vec<String>> = sport.iter().chain(&food).map(|s| doc(s)).collect();
    let cfg = ParagraphConfig {
        dim: 16,
        epochs: 200,
        ..ParagraphConfig::default()
    };
    let model = train_paragraph_vectors(&docs, &cfg)?;
    println!(
        "vocabulary {} words, {} documents",
        model.vocabulary_size(),
        model.document_count()
    );

    for probe in ["late match goal", "salt in the sauce"] {
        let v = model.infer_document(&doc(probe));
        let to_sport: f64 = (0..4).map(|i| cosine(&v, model.document_vector(i))).sum::<f64>() / 4.0;
        let to_food: f64 = (4..8).map(|i| cosine(&v, model.document_vector(i))).sum::<f64>() / 4.0;
        println!("{probe:<20} sport {to_sport:+.3}  food {to_food:+.3}");
    }
    Ok(())
}
