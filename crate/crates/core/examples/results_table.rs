//! Collect per-run F1 rows and lay them out as a model-by-dataset table.
//!
//! cargo run --example results_table

use sarcasm_ctx::corpus::Label;
use sarcasm_ctx::eval::{results_table, Confusion, RunResult};

fn run(dataset: &str, model: &str, correct: usize, of: usize) -> RunResult {
    let pairs = (0..of).map(|i| {
        let gold = Label::from_bool(i % 2 == 0);
        let pred = if i < correct {
            gold
        } else {
            Label::from_bool(i % 2 == 1)
        };
        (pred, gold)
    });
    RunResult::new(dataset, model, Confusion::from_pairs(pairs))
}

fn main() {
    let rows = vec![
        run("main", "SIARN", 80, 100),
        run("main", "EX-CASCADE", 70, 100),
        run("main", "IN-CASCADE", 85, 100),
        run("balanced", "SIARN", 60, 80),
        run("balanced", "IN-CASCADE", 66, 80),
    ];
    let table = results_table(&rows);
    print!("{}", table.to_text());
    println!();
    print!("{}", table.to_csv());
}
