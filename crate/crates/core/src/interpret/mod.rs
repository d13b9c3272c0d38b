//! Review artifacts per cluster and the merged theme/category taxonomy.

pub mod taxonomy;
pub mod terms;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use ndarray::ArrayView2;
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{EmbeddingSet, QueryRecord};
use crate::error::{Error, Result};
use crate::util;

pub use taxonomy::{
    apply_merge, build_taxonomy, export_taxonomy_json, parse_merge_map, parse_taxonomy_json, theme_shares,
    CategoryAssignment, MergeEntry, MergeMap, Taxonomy, TaxonomyDoc, ThemeShares,
};
pub use terms::{english_stopwords, tfidf_terms, Term};

pub const NOISE: i32 = -1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRef {
    pub id: u64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub cluster_id: i32,
    pub size: usize,
    /// Absent for the noise bucket.
    pub representative: Option<QueryRef>,
    pub top_terms: Vec<Term>,
    pub samples: Vec<QueryRef>,
}

/// Row of the member closest to the members' centroid; ties go to the
/// lowest id.
pub fn representative_query(points: ArrayView2<'_, f32>, rows: &[usize], ids: &[u64]) -> Result<usize> {
    if rows.is_empty() {
        return Err(Error::EmptyCluster);
    }
    let dim = points.ncols();
    let mut centroid = vec![0.0f64; dim];
    for &r in rows {
        for (c, v) in centroid.iter_mut().zip(points.row(r)) {
            *c += *v as f64;
        }
    }
    centroid.iter_mut().for_each(|c| *c /= rows.len() as f64);
    let dist = |r: usize| -> f64 {
        points
            .row(r)
            .iter()
            .zip(&centroid)
            .map(|(v, c)| (*v as f64 - c).powi(2))
            .sum()
    };
    Ok(*rows
        .iter()
        .min_by(|&&a, &&b| dist(a).total_cmp(&dist(b)).then(ids[a].cmp(&ids[b])))
        .expect("non-empty"))
}

/// Up to `n` distinct members drawn uniformly without replacement; the
/// whole list when it is shorter. Returned in input order.
pub fn sample_queries(ids: &[u64], n: usize, seed: u64) -> Vec<u64> {
    sample_positions(ids.len(), n, &mut util::rng(seed))
        .into_iter()
        .map(|i| ids[i])
        .collect()
}

fn sample_positions(len: usize, n: usize, rng: &mut util::Rng) -> Vec<usize> {
    if len <= n {
        return (0..len).collect();
    }
    let mut picked = index::sample(rng, len, n).into_vec();
    picked.sort_unstable();
    picked
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryOptions {
    pub n_terms: usize,
    pub n_samples: usize,
    pub seed: u64,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        Self {
            n_terms: 20,
            n_samples: 10,
            seed: 42,
        }
    }
}

fn check_aligned(queries: &[QueryRecord], embeddings: &EmbeddingSet, labels: &[i32]) -> Result<()> {
    if queries.len() != embeddings.len() || queries.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: queries.len(),
            right: embeddings.len().min(labels.len()),
        });
    }
    if queries.iter().zip(embeddings.ids()).any(|(q, id)| q.id != *id) {
        return Err(Error::Format("queries and embeddings are not in the same order".into()));
    }
    Ok(())
}

/// Members of each label, noise included, by ascending label.
pub(crate) fn members_by_label(labels: &[i32]) -> BTreeMap<i32, Vec<usize>> {
    let mut out: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (row, &l) in labels.iter().enumerate() {
        out.entry(l).or_default().push(row);
    }
    out
}

/// One summary per label (noise first), over row-aligned queries,
/// original-space embeddings and labels. Samples for cluster `c` come from
/// stream `c + 1` of `seed`, so adding clusters does not disturb others.
pub fn summarize(
    queries: &[QueryRecord],
    embeddings: &EmbeddingSet,
    labels: &[i32],
    options: &SummaryOptions,
) -> Result<Vec<ClusterSummary>> {
    check_aligned(queries, embeddings, labels)?;
    let members = members_by_label(labels);
    let clusters: Vec<(&i32, &Vec<usize>)> = members.iter().filter(|(&l, _)| l != NOISE).collect();
    let terms = if clusters.len() >= 2 {
        let docs: Vec<Vec<&str>> = clusters
            .iter()
            .map(|(_, rows)| rows.iter().map(|&r| queries[r].text.as_str()).collect())
            .collect();
        tfidf_terms(&docs, options.n_terms, english_stopwords())?
    } else {
        log::warn!("fewer than two clusters; no term scores");
        vec![Vec::new(); clusters.len()]
    };
    let terms: BTreeMap<i32, Vec<Term>> = clusters.iter().map(|(&l, _)| l).zip(terms).collect();

    members
        .par_iter()
        .map(|(&label, rows)| {
            let representative = if label == NOISE {
                None
            } else {
                let r = representative_query(embeddings.matrix(), rows, embeddings.ids())?;
                Some(QueryRef {
                    id: queries[r].id,
                    text: queries[r].text.clone(),
                })
            };
            let mut rng = util::stream_rng(options.seed, (label + 1) as u64);
            let samples: Vec<usize> = sample_positions(rows.len(), options.n_samples, &mut rng)
                .into_iter()
                .map(|i| rows[i])
                .collect();
            Ok(ClusterSummary {
                cluster_id: label,
                size: rows.len(),
                representative,
                top_terms: terms.get(&label).cloned().unwrap_or_default(),
                samples: samples
                    .into_iter()
                    .map(|r| QueryRef {
                        id: queries[r].id,
                        text: queries[r].text.clone(),
                    })
                    .collect(),
            })
        })
        .collect()
}

fn sorted(summaries: &[ClusterSummary]) -> Vec<&ClusterSummary> {
    let mut v: Vec<&ClusterSummary> = summaries.iter().collect();
    v.sort_by_key(|s| s.cluster_id);
    v
}

/// Review document: one section per cluster, noise first.
pub fn export_markdown(summaries: &[ClusterSummary]) -> String {
    let mut out = String::from("# Cluster review\n");
    for s in sorted(summaries) {
        if s.cluster_id == NOISE {
            let _ = writeln!(out, "\n## Noise\n\n- Size: {}", s.size);
        } else {
            let _ = writeln!(out, "\n## Cluster {}\n\n- Size: {}", s.cluster_id, s.size);
        }
        if let Some(r) = &s.representative {
            let _ = writeln!(out, "- Representative query: {} (id {})", r.text, r.id);
        }
        if !s.top_terms.is_empty() {
            let terms: Vec<&str> = s.top_terms.iter().map(|t| t.term.as_str()).collect();
            let _ = writeln!(out, "- Top terms: {}", terms.join(", "));
        }
        let _ = writeln!(out, "- Sample queries:");
        for q in &s.samples {
            let _ = writeln!(out, "  - {} (id {})", q.text, q.id);
        }
    }
    out
}

/// Spreadsheet mirror of the Markdown review; list fields are joined
/// with " | ".
pub fn export_csv(summaries: &[ClusterSummary]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "cluster_id",
        "size",
        "representative_id",
        "representative_query",
        "top_terms",
        "sample_ids",
        "sample_queries",
    ])?;
    for s in sorted(summaries) {
        let join = |items: Vec<String>| items.join(" | ");
        w.write_record([
            s.cluster_id.to_string(),
            s.size.to_string(),
            s.representative.as_ref().map(|r| r.id.to_string()).unwrap_or_default(),
            s.representative.as_ref().map(|r| r.text.clone()).unwrap_or_default(),
            join(s.top_terms.iter().map(|t| t.term.clone()).collect()),
            join(s.samples.iter().map(|q| q.id.to_string()).collect()),
            join(s.samples.iter().map(|q| q.text.clone()).collect()),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
