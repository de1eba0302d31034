//! User-disjoint buckets balanced by tweet count and sarcasm rate, and the
//! train/valid/test split they induce.
//!
//! cargo run --example stratified_split -- [seed]

use sarcasm_ctx::split::{make_splits, stratify_by_user, SplitSpec};
use sarcasm_ctx::synth::riloff_fixture;

fn main() -> sarcasm_ctx::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let dataset = riloff_fixture()?.dataset;
    let assignment = stratify_by_user(&dataset, 10, seed)?;
    for (b, (tweets, sarcastic)) in assignment.bucket_counts(&dataset).into_iter().enumerate() {
        println!("bucket {b}: {tweets:>3} tweets, {sarcastic:>2} sarcastic");
    }

    let big = assignment.bucket_of_user("big").expect("assigned");
    let mid = assignment.bucket_of_user("mid").expect("assigned");
    let splits = make_splits(&dataset, &assignment, &SplitSpec::with_holdout(10, big, mid))?;
    let (tr, va, te) = splits.sizes();
    println!("holding out buckets {big} and {mid}: train {tr} / valid {va} / test {te}");
    Ok(())
}
