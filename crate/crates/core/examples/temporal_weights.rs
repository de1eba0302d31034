//! Recency weights over a timeline and the weighted, normalized aggregate.
//!
//! cargo run --example temporal_weights -- [history length]

use sarcasm_ctx::embed::{temporal_weights, weighted_aggregate};

fn main() -> sarcasm_ctx::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(23);
    let w = temporal_weights(n)?;
    println!("n = {n}, oldest first:");
    println!("{w:?}");

    // Old tweets point one way and recent ones the other; recency wins.
    let vectors: Vec<Vec<f64>> = (0..n)
        .map(|i| if i < n / 2 { vec![1.0, 0.0] } else { vec![0.0, 1.0] })
        .collect();
    let weights: Vec<f64> = w.iter().map(|&x| f64::from(x)).collect();
    let (agg, zero) = weighted_aggregate(&vectors, &weights)?;
    println!("aggregate {:.3?} (zero norm: {zero})", agg);
    Ok(())
}
