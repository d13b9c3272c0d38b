//! Summarise clusters for review, then merge them into a two-level
//! taxonomy and export it as JSON.

use querytax::cluster::{hdbscan, ClusterParams};
use querytax::interpret::{
    build_taxonomy, export_markdown, export_taxonomy_json, parse_merge_map, summarize, theme_shares, SummaryOptions,
};
use querytax::reduce::{reduce, ReducerConfig};
use querytax::synth::{planted_intents, PlantedSpec};

fn main() -> querytax::Result<()> {
    let planted = planted_intents(&PlantedSpec {
        n_intents: 4,
        per_intent: 80,
        n_noise: 20,
        dim: 32,
        separation: 12.0,
        seed: 5,
    });
    let reduced = reduce(&planted.embeddings, &ReducerConfig::new(5, 15, 42))?;
    let labels = hdbscan(reduced.matrix.view(), &ClusterParams::from_fraction(30, 0.5))?.labels.labels;

    let options = SummaryOptions {
        n_terms: 5,
        n_samples: 3,
        seed: 42,
    };
    let summaries = summarize(&planted.queries, &planted.embeddings, &labels, &options)?;
    print!("{}", export_markdown(&summaries));

    // The mapping an analyst would write after reading the review.
    let mut map_text = String::from("cluster_id\tcategory\ttheme\n");
    for s in summaries.iter().filter(|s| s.cluster_id >= 0) {
        let theme = if s.cluster_id % 2 == 0 { "places" } else { "things" };
        let category = s.top_terms.first().map_or("misc", |t| t.term.as_str());
        map_text.push_str(&format!("{}\t{}\t{}\n", s.cluster_id, category, theme));
    }
    let taxonomy = build_taxonomy(&planted.queries, &planted.embeddings, &labels, &parse_merge_map(&map_text)?)?;
    println!("\n{}", export_taxonomy_json(&taxonomy));
    let shares = theme_shares(&taxonomy, labels.len())?;
    for t in &shares.themes {
        println!("{:<8} {:>5.1}%", t.theme, t.percent);
    }
    println!("{:<8} {:>5.1}%", "noise", shares.noise_percent);
    Ok(())
}
