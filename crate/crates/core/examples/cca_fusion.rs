//! Two views that share a latent factor. CCA recovers the shared direction
//! as its leading canonical pair; the rest is noise.
//!
//! cargo run --example cca_fusion -- [n]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sarcasm_ctx::embed::fusion::fit_fusion;
use sarcasm_ctx::synth::gaussian;

fn main() -> sarcasm_ctx::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(400);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut v = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    for _ in 0..n {
        let z = gaussian(&mut rng);
        v.push(vec![
            z + 0.1 * gaussian(&mut rng),
            gaussian(&mut rng),
            gaussian(&mut rng),
            gaussian(&mut rng),
        ]);
        p.push(vec![
            gaussian(&mut rng),
            -2.0 * z + 0.1 * gaussian(&mut rng),
            gaussian(&mut rng),
        ]);
    }
    let fusion = fit_fusion(&v, &p, 2, 1e-3)?;
    println!("canonical correlations {:.3?}", fusion.correlations);
    let e = fusion.fuse(&v[0], &p[0])?;
    println!("fused first pair {:.3?}", e);
    Ok(())
}
