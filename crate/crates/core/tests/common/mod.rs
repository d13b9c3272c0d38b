#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use querytax::corpus::{qemb, tsv, Label, LabelRecord};
use querytax::synth::{planted_intents, PlantedCorpus, PlantedSpec};

/// Small planted corpus: 4 intents of 60 queries plus 20 noise queries in
/// 16 dimensions. Even intents count as geospatial.
pub fn small_corpus() -> PlantedCorpus {
    planted_intents(&PlantedSpec {
        n_intents: 4,
        per_intent: 60,
        n_noise: 20,
        dim: 16,
        separation: 12.0,
        seed: 3,
    })
}

pub fn is_positive(truth: i32) -> bool {
    truth >= 0 && truth % 2 == 0
}

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub corpus: PlantedCorpus,
}

impl Fixture {
    /// Writes `queries.tsv`, `corpus.qemb`, `gold.tsv` and `votes.tsv`.
    /// Every 25th vote row abstains.
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let corpus = small_corpus();
        let p = dir.path();
        std::fs::write(p.join("queries.tsv"), tsv::format_queries(&corpus.queries)).unwrap();
        qemb::write(p.join("corpus.qemb"), &corpus.embeddings).unwrap();
        let gold: Vec<LabelRecord> = corpus
            .queries
            .iter()
            .zip(&corpus.truth)
            .map(|(q, &t)| LabelRecord::gold(q.id, Label::from_positive(is_positive(t))))
            .collect();
        std::fs::write(p.join("gold.tsv"), tsv::format_labels(&gold)).unwrap();
        let mut votes = String::from("id\tv1\tv2\tv3\tv4\tv5\n");
        for (i, (q, &t)) in corpus.queries.iter().zip(&corpus.truth).enumerate() {
            let pos = is_positive(t);
            // One dissenting vote per row keeps the majority intact.
            let row: Vec<&str> = (0..5)
                .map(|k| {
                    if i % 25 == 0 && k == 2 {
                        "abstain"
                    } else if (k == i % 5) != pos {
                        "true"
                    } else {
                        "false"
                    }
                })
                .collect();
            let _ = writeln!(votes, "{}\t{}", q.id, row.join("\t"));
        }
        std::fs::write(p.join("votes.tsv"), votes).unwrap();
        Fixture { dir, corpus }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn arg(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }
}

pub fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}
