//! Sensor network localization: distances to nearby sensors in, positions
//! out, with anchors used only for the final rigid alignment.
//!
//! Run with: `cargo run --release --example snl_pipeline`

use facered::completion_edm::{snl_generate, snl_localize};
use std::time::Instant;

fn main() {
    // Noiseless instances localize to machine precision.
    for (n, range) in [(100usize, 0.4), (300, 0.3)] {
        let inst = snl_generate(n, 4, range, 2, 1, 0.0).unwrap();
        let start = Instant::now();
        let result = snl_localize(&inst, 1e-7).unwrap();
        println!(
            "n={n:4} range {range}: {} edges, {} cliques, face dim {}, RMSD {:.2e}, {:?}",
            inst.edm.edges().len(),
            result.cliques_used,
            result.face_dim,
            result.rmsd.unwrap(),
            start.elapsed()
        );
    }

    // One percent multiplicative distance noise: the averaged exposing
    // vectors keep the error around the noise floor.
    for seed in 1..=3u64 {
        let inst = snl_generate(300, 4, 0.3, 2, seed, 0.01).unwrap();
        let result = snl_localize(&inst, 0.5).unwrap();
        println!(
            "noisy seed {seed}: RMSD {:.4}, worst edge residual {:.3e}",
            result.rmsd.unwrap(),
            result.max_edge_residual
        );
    }

    // Localization is impossible across disconnected components; the
    // pipeline reports the oversized face instead of guessing.
    let sparse = snl_generate(20, 2, 0.05, 2, 7, 0.0).unwrap();
    match snl_localize(&sparse, 1e-7) {
        Err(e) => println!("range 0.05 on 20 nodes: {e}"),
        Ok(result) => println!("unexpectedly localized with face dim {}", result.face_dim),
    }
}
