//! Re-run the best grid cells over several seeds, pick the most stable
//! configuration and a representative seed for it.

use querytax::search::{
    enumerate_grid, format_consistency_csv, rank_top, select_config, select_seed, ConsistencyReport, GridSpec,
    SweepContext, SweepOptions, CONSISTENCY_SEEDS,
};
use querytax::synth::{planted_intents, PlantedSpec};

fn main() -> querytax::Result<()> {
    let planted = planted_intents(&PlantedSpec {
        n_intents: 8,
        per_intent: 100,
        n_noise: 40,
        dim: 64,
        separation: 12.0,
        seed: 11,
    });
    let spec = GridSpec {
        dims: vec![5],
        neighbors: vec![10, 25],
        min_cluster_sizes: vec![25, 50],
        min_samples_fractions: vec![0.2, 0.5],
        seed: 42,
    };
    let ctx = SweepContext::for_grid(&planted.embeddings, &spec, SweepOptions::default())?;
    let grid = ctx.run_grid(&enumerate_grid(&spec)?, &[spec.seed]);
    let top: Vec<_> = rank_top(&grid, 3, 5).iter().map(|r| r.config()).collect();

    let runs = ctx.run_grid(&top, &CONSISTENCY_SEEDS);
    let reports = top
        .iter()
        .map(|c| ConsistencyReport::from_results(c, &runs))
        .collect::<querytax::Result<Vec<_>>>()?;
    print!("{}", format_consistency_csv(&reports));

    let selection = select_config(&reports, 0.05)?;
    println!("\nselected #{} ({})", selection.config_id, selection.rule);
    let report = reports.iter().find(|r| r.config.config_id == selection.config_id).unwrap();
    let seed = select_seed(&report.seed_dbcv)?;
    println!(
        "seed {} (median DBCV {:.3}, excluded as maxima: {:?})",
        seed.seed, seed.median_dbcv, seed.excluded
    );
    Ok(())
}
