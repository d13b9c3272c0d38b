//! A small hyperparameter grid over a planted corpus, written as grid CSV.

use querytax::search::{enumerate_grid, format_grid_csv, rank_top, GridSpec, SweepContext, SweepOptions};
use querytax::synth::{planted_intents, PlantedSpec};

fn main() -> querytax::Result<()> {
    let planted = planted_intents(&PlantedSpec {
        n_intents: 8,
        per_intent: 120,
        n_noise: 40,
        dim: 64,
        separation: 12.0,
        seed: 7,
    });
    let spec = GridSpec {
        dims: vec![5, 10],
        neighbors: vec![10, 25],
        min_cluster_sizes: vec![25, 50],
        min_samples_fractions: vec![0.2, 1.0],
        seed: 42,
    };
    let configs = enumerate_grid(&spec)?;
    let ctx = SweepContext::for_grid(&planted.embeddings, &spec, SweepOptions::default())?;
    let results = ctx.run_grid(&configs, &[spec.seed]);
    print!("{}", format_grid_csv(&results));

    println!("\ntop 3 with at least 5 clusters:");
    for r in rank_top(&results, 3, 5) {
        println!(
            "  #{:<2} dbcv {:.3} noise {:.3} clusters {}",
            r.config_id,
            r.dbcv.unwrap(),
            r.noise_fraction.unwrap(),
            r.n_clusters.unwrap()
        );
    }
    Ok(())
}
