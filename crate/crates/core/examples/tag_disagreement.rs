//! How often manual labels disagree with sarcasm hashtags, and the
//! hashtag-relabeled copy of the dataset.
//!
//! cargo run --example tag_disagreement

use sarcasm_ctx::corpus::{disagreement_table, relabel_distant, TagSet};
use sarcasm_ctx::synth::riloff_fixture;

fn main() -> sarcasm_ctx::Result<()> {
    let dataset = riloff_fixture()?.dataset;
    let tags = TagSet::sarcasm();
    let table = disagreement_table(&dataset, &tags);
    println!("{table}");
    println!("{} of {} tweets disagree", table.disagreements(), table.total());
    let relabeled = relabel_distant(&dataset, &tags);
    println!(
        "sarcastic: {} by hand, {} by tag",
        dataset.sarcastic_count(),
        relabeled.sarcastic_count()
    );
    Ok(())
}
