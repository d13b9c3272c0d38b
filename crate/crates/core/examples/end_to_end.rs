//! The whole clustering path on the 5,000-query planted corpus: grid,
//! consistency check, selection, final clustering and taxonomy. Takes a few
//! minutes on one core.

use querytax::cluster::hdbscan;
use querytax::interpret::{build_taxonomy, MergeMap};
use querytax::reduce::{reduce, ReducerConfig};
use querytax::search::{
    enumerate_grid, rank_top, select_config, select_seed, ConsistencyReport, GridSpec, SweepContext, SweepOptions,
    CONSISTENCY_SEEDS,
};
use querytax::synth::{planted_intents, PlantedSpec};
use querytax::validate::adjusted_rand_index;

fn main() -> querytax::Result<()> {
    let planted = planted_intents(&PlantedSpec::default());
    let emb = &planted.embeddings;
    let spec = GridSpec {
        dims: vec![5, 10],
        neighbors: vec![10, 25],
        min_cluster_sizes: vec![50, 100],
        min_samples_fractions: vec![0.2, 0.5],
        seed: 42,
    };
    let ctx = SweepContext::for_grid(emb, &spec, SweepOptions::default())?;
    let grid = ctx.run_grid(&enumerate_grid(&spec)?, &[spec.seed]);
    let top: Vec<_> = rank_top(&grid, 3, 10).iter().map(|r| r.config()).collect();
    println!("top cells: {:?}", top.iter().map(|c| c.config_id).collect::<Vec<_>>());

    let runs = ctx.run_grid(&top, &CONSISTENCY_SEEDS);
    let reports = top
        .iter()
        .map(|c| ConsistencyReport::from_results(c, &runs))
        .collect::<querytax::Result<Vec<_>>>()?;
    let chosen = select_config(&reports, 0.05)?;
    let report = reports.iter().find(|r| r.config.config_id == chosen.config_id).unwrap();
    let seed = select_seed(&report.seed_dbcv)?.seed;
    let c = report.config;
    println!("config #{} {:?}, seed {seed}", c.config_id, c);

    let reduced = reduce(emb, &ReducerConfig::new(c.umap_dims, c.umap_neighbors, seed))?;
    let labels = hdbscan(reduced.matrix.view(), &c.cluster_params())?.labels.labels;
    println!("ARI vs planted intents: {:.3}", adjusted_rand_index(&labels, &planted.truth)?);

    let taxonomy = build_taxonomy(&planted.queries, emb, &labels, &MergeMap::identity(labels.clone(), "all"))?;
    for cat in taxonomy.themes.iter().flat_map(|t| &t.children).take(5) {
        println!("{:<12} {:>4}  {}", cat.name, cat.size, cat.representative_query);
    }
    println!("noise: {} of {}", taxonomy.noise, taxonomy.total);
    Ok(())
}
