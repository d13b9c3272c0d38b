//! Leading-word frequencies per class, a quick look at how geospatial
//! queries are phrased.

use std::collections::HashMap;

use querytax::corpus::{first_word_stats, Label};
use querytax::synth::{planted_intents, PlantedSpec};

fn main() {
    let planted = planted_intents(&PlantedSpec {
        n_intents: 6,
        per_intent: 50,
        n_noise: 10,
        dim: 4,
        separation: 12.0,
        seed: 3,
    });
    let labels: HashMap<u64, Label> = planted
        .queries
        .iter()
        .zip(&planted.truth)
        .filter(|(_, &t)| t >= 0)
        .map(|(q, &t)| (q.id, Label::from_positive(t % 2 == 0)))
        .collect();
    let stats = first_word_stats(&planted.queries, &labels);
    for table in &stats.tables {
        println!("{} ({} queries)", table.label.as_str(), table.total);
        for row in table.rows.iter().take(5) {
            println!("  {:<10} {:>4} {:>5.1}%", row.word, row.count, row.percent);
        }
    }
    println!("unlabelled: {}", stats.unlabelled);
}
