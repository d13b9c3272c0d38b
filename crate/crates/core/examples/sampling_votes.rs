//! Diverse sampling for annotation and weak labels from labeller votes.

use std::fmt::Write as _;

use querytax::sampling::{aggregate_votes, kmeanspp_select, parse_votes, snap_to_nearest};
use querytax::synth::{planted_intents, PlantedSpec};

fn main() -> querytax::Result<()> {
    let planted = planted_intents(&PlantedSpec {
        n_intents: 5,
        per_intent: 40,
        n_noise: 10,
        dim: 16,
        separation: 12.0,
        seed: 4,
    });
    let points = planted.embeddings.matrix();

    let picked = kmeanspp_select(points, 10, 42)?;
    let intents: std::collections::BTreeSet<i32> = picked.iter().map(|&r| planted.truth[r]).collect();
    println!("k-means++ picked rows {picked:?}, covering intents {intents:?}");

    // Centroids from elsewhere (here: two existing rows, slightly moved).
    let mut centroids = points.select(ndarray::Axis(0), &[3, 77]);
    centroids.mapv_inplace(|v| v + 0.01);
    let snapped = snap_to_nearest(centroids.view(), points)?;
    println!("snapped centroids to rows {:?}", snapped.indices);

    // Three labellers; row 7 has an abstention.
    let mut votes = String::from("id\tv1\tv2\tv3\n");
    for (i, q) in planted.queries.iter().take(20).enumerate() {
        let geo = planted.truth[i] % 2 == 0;
        let cell = |k: usize| match (i, k) {
            (7, 1) => "abstain".to_string(),
            _ => (geo ^ (k == i % 3)).to_string(),
        };
        let _ = writeln!(votes, "{}\t{}\t{}\t{}", q.id, cell(0), cell(1), cell(2));
    }
    let summary = aggregate_votes(&parse_votes(&votes)?, None)?;
    println!(
        "{} weak labels, {} abstained, positive-vote histogram {:?}",
        summary.labels.len(),
        summary.abstained,
        summary.histogram
    );
    Ok(())
}
