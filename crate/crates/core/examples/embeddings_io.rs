//! Write and read a `.qemb` embedding file, then align it with a query
//! file that covers only part of it.

use querytax::corpus::{self, qemb, tsv};
use querytax::synth::{planted_intents, PlantedSpec};

fn main() -> querytax::Result<()> {
    let planted = planted_intents(&PlantedSpec {
        n_intents: 3,
        per_intent: 20,
        n_noise: 0,
        dim: 8,
        separation: 12.0,
        seed: 1,
    });
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("corpus.qemb");
    qemb::write(&path, &planted.embeddings)?;
    let back = qemb::read(&path)?;
    println!("{} rows x {} dims, {} bytes", back.len(), back.dim(), std::fs::metadata(&path)?.len());
    assert_eq!(qemb::encode(&back), qemb::encode(&planted.embeddings));

    // Queries are TSV; drop a few so alignment has something to do.
    let text = tsv::format_queries(&planted.queries[5..]);
    let queries = tsv::parse_queries(&text)?;
    let aligned = corpus::align(&queries, &back, None)?;
    println!("aligned {} queries, dropped {}", aligned.len(), aligned.dropped);
    println!("first: {:?}", aligned.queries[0].text);
    Ok(())
}
