//! Query texts, embedding matrices and labels, and their alignment into a
//! single corpus every other module consumes.

pub mod qemb;
pub mod tsv;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use log::warn;
use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use qemb::{read as load_embeddings, write as write_embeddings};
pub use tsv::{load_labels, load_queries};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub id: u64,
    pub text: String,
}

/// Row-aligned ids and a finite `n x d` matrix of 32-bit floats.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    ids: Vec<u64>,
    matrix: Array2<f32>,
}

impl EmbeddingSet {
    pub fn new(ids: Vec<u64>, matrix: Array2<f32>) -> Result<Self> {
        if ids.len() != matrix.nrows() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: matrix.nrows(),
            });
        }
        if matrix.ncols() == 0 {
            return Err(Error::Format("embedding dimension must be positive".into()));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for &id in &ids {
            if !seen.insert(id) {
                return Err(Error::DuplicateId(id));
            }
        }
        for (row, values) in matrix.axis_iter(Axis(0)).enumerate() {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue { row });
            }
        }
        let matrix = if matrix.is_standard_layout() {
            matrix
        } else {
            matrix.as_standard_layout().into_owned()
        };
        Ok(Self { ids, matrix })
    }

    /// Ids `0..n` for matrices that carry no external identity (reduced
    /// coordinates, synthetic fixtures).
    pub fn from_matrix(matrix: Array2<f32>) -> Result<Self> {
        let ids = (0..matrix.nrows() as u64).collect();
        Self::new(ids, matrix)
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn matrix(&self) -> ArrayView2<'_, f32> {
        self.matrix.view()
    }

    pub fn into_matrix(self) -> Array2<f32> {
        self.matrix
    }

    pub fn row(&self, i: usize) -> &[f32] {
        let d = self.dim();
        &self.matrix.as_slice().expect("standard layout")[i * d..(i + 1) * d]
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    /// Rows at `rows`, in that order.
    pub fn select(&self, rows: &[usize]) -> EmbeddingSet {
        let ids = rows.iter().map(|&r| self.ids[r]).collect();
        let matrix = self.matrix.select(Axis(0), rows);
        EmbeddingSet { ids, matrix }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Geospatial,
    NonGeospatial,
}

impl Label {
    pub fn from_positive(positive: bool) -> Self {
        if positive {
            Label::Geospatial
        } else {
            Label::NonGeospatial
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Geospatial
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Geospatial => "geospatial",
            Label::NonGeospatial => "non_geospatial",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "geospatial" => Ok(Label::Geospatial),
            "non_geospatial" => Ok(Label::NonGeospatial),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    Weak,
    Gold,
    Predicted,
}

impl fmt::Display for LabelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelSource::Weak => "weak",
            LabelSource::Gold => "gold",
            LabelSource::Predicted => "predicted",
        })
    }
}

impl FromStr for LabelSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "weak" => Ok(LabelSource::Weak),
            "gold" => Ok(LabelSource::Gold),
            "predicted" => Ok(LabelSource::Predicted),
            other => Err(format!("unknown label source {other:?}")),
        }
    }
}

/// A class label with provenance. Weak labels carry the number of positive
/// votes (0..=5); other sources carry none.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub id: u64,
    pub label: Label,
    pub source: LabelSource,
    pub votes: Option<u8>,
}

impl LabelRecord {
    pub fn new(
        id: u64,
        label: Label,
        source: LabelSource,
        votes: Option<u8>,
    ) -> std::result::Result<Self, String> {
        match (source, votes) {
            (LabelSource::Weak, None) => return Err("weak label without vote count".into()),
            (LabelSource::Weak, Some(v)) if v > 5 => {
                return Err(format!("vote count {v} outside 0..=5"))
            }
            (LabelSource::Gold | LabelSource::Predicted, Some(_)) => {
                return Err(format!("vote count on a {source} label"))
            }
            _ => {}
        }
        Ok(Self {
            id,
            label,
            source,
            votes,
        })
    }

    pub fn gold(id: u64, label: Label) -> Self {
        Self::new(id, label, LabelSource::Gold, None).unwrap()
    }
}

/// Queries, embeddings and optional labels restricted to their common ids.
/// Row `i` of the embedding matrix belongs to `queries[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedCorpus {
    pub queries: Vec<QueryRecord>,
    pub embeddings: EmbeddingSet,
    pub labels: Option<HashMap<u64, LabelRecord>>,
    /// Ids present in only one of the two inputs.
    pub dropped: usize,
}

impl AlignedCorpus {
    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn label_of(&self, id: u64) -> Option<Label> {
        self.labels.as_ref()?.get(&id).map(|r| r.label)
    }

    pub fn index_of(&self) -> HashMap<u64, usize> {
        self.queries
            .iter()
            .enumerate()
            .map(|(i, q)| (q.id, i))
            .collect()
    }

    /// Sub-corpus of the given rows (in the given order).
    pub fn subset(&self, rows: &[usize]) -> AlignedCorpus {
        let queries: Vec<QueryRecord> = rows.iter().map(|&r| self.queries[r].clone()).collect();
        let labels = self.labels.as_ref().map(|l| {
            queries
                .iter()
                .filter_map(|q| l.get(&q.id).map(|r| (q.id, r.clone())))
                .collect()
        });
        AlignedCorpus {
            queries,
            embeddings: self.embeddings.select(rows),
            labels,
            dropped: 0,
        }
    }
}

/// Keeps ids present in both `queries` and `embeddings`, in query order.
/// Labels for ids outside the intersection are discarded.
pub fn align(
    queries: &[QueryRecord],
    embeddings: &EmbeddingSet,
    labels: Option<&[LabelRecord]>,
) -> Result<AlignedCorpus> {
    let row_of: HashMap<u64, usize> = embeddings
        .ids()
        .iter()
        .enumerate()
        .map(|(i, &id)| (id, i))
        .collect();
    let mut kept = Vec::new();
    let mut rows = Vec::new();
    for q in queries {
        if let Some(&r) = row_of.get(&q.id) {
            kept.push(q.clone());
            rows.push(r);
        }
    }
    if kept.is_empty() {
        return Err(Error::NoOverlap);
    }
    let dropped = (queries.len() - kept.len()) + (embeddings.len() - kept.len());
    if dropped > 0 {
        warn!("align: dropped {dropped} ids present in only one input");
    }
    let labels = labels.map(|records| {
        let keep: HashSet<u64> = kept.iter().map(|q| q.id).collect();
        records
            .iter()
            .filter(|r| keep.contains(&r.id))
            .map(|r| (r.id, r.clone()))
            .collect::<HashMap<_, _>>()
    });
    Ok(AlignedCorpus {
        queries: kept,
        embeddings: embeddings.select(&rows),
        labels,
        dropped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstWordRow {
    pub word: String,
    pub count: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstWordTable {
    pub label: Label,
    /// Queries of this class with a usable first word.
    pub total: usize,
    pub rows: Vec<FirstWordRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstWordStats {
    pub tables: Vec<FirstWordTable>,
    pub unlabelled: usize,
}

/// Lowercased first whitespace-delimited token with punctuation stripped from
/// both edges. `None` when nothing alphanumeric remains.
pub fn first_word(text: &str) -> Option<String> {
    let token = text.split_whitespace().next()?;
    let trimmed = token.trim_matches(|c: char| !c.is_alphanumeric());
    if trimmed.is_empty() {
        None
    } else {
        Some(trimmed.to_lowercase())
    }
}

/// Per-class first-word frequency tables, ranked by count (ties alphabetical).
pub fn first_word_stats(
    queries: &[QueryRecord],
    labels: &HashMap<u64, Label>,
) -> FirstWordStats {
    let mut counts: HashMap<Label, HashMap<String, usize>> = HashMap::new();
    let mut unlabelled = 0;
    for q in queries {
        let Some(&label) = labels.get(&q.id) else {
            unlabelled += 1;
            continue;
        };
        if let Some(word) = first_word(&q.text) {
            *counts.entry(label).or_default().entry(word).or_default() += 1;
        }
    }
    let mut tables: Vec<FirstWordTable> = counts
        .into_iter()
        .map(|(label, words)| {
            let total: usize = words.values().sum();
            let mut rows: Vec<FirstWordRow> = words
                .into_iter()
                .map(|(word, count)| FirstWordRow {
                    percent: 100.0 * count as f64 / total as f64,
                    word,
                    count,
                })
                .collect();
            rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.word.cmp(&b.word)));
            FirstWordTable { label, total, rows }
        })
        .collect();
    tables.sort_by_key(|t| t.label);
    FirstWordStats { tables, unlabelled }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn q(id: u64, text: &str) -> QueryRecord {
        QueryRecord {
            id,
            text: text.into(),
        }
    }

    fn emb(ids: &[u64]) -> EmbeddingSet {
        let m = Array2::from_shape_fn((ids.len(), 2), |(i, j)| (i * 2 + j) as f32);
        EmbeddingSet::new(ids.to_vec(), m).unwrap()
    }

    #[test]
    fn align_full_overlap() {
        let qs = [q(1, "a"), q(2, "b"), q(3, "c")];
        let c = align(&qs, &emb(&[3, 1, 2]), None).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.dropped, 0);
        assert_eq!(c.embeddings.ids(), &[1, 2, 3]);
        assert_eq!(c.embeddings.row(0), &[2.0, 3.0]);
    }

    #[test]
    fn align_partial_overlap() {
        let qs = [q(1, "a"), q(2, "b"), q(3, "c")];
        let c = align(&qs, &emb(&[1, 3]), None).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.dropped, 1);
    }

    #[test]
    fn align_disjoint() {
        let qs = [q(1, "a")];
        assert!(matches!(align(&qs, &emb(&[5]), None), Err(Error::NoOverlap)));
    }

    #[test]
    fn align_filters_labels() {
        let qs = [q(1, "a"), q(2, "b")];
        let labels = [
            LabelRecord::gold(1, Label::Geospatial),
            LabelRecord::gold(9, Label::NonGeospatial),
        ];
        let c = align(&qs, &emb(&[1, 2]), Some(&labels)).unwrap();
        assert_eq!(c.labels.as_ref().unwrap().len(), 1);
        assert_eq!(c.label_of(1), Some(Label::Geospatial));
    }

    #[test]
    fn embedding_set_rejects_bad_input() {
        assert!(matches!(
            EmbeddingSet::new(vec![1, 1], array![[0.0f32], [1.0]]),
            Err(Error::DuplicateId(1))
        ));
        assert!(matches!(
            EmbeddingSet::new(vec![1, 2], array![[0.0f32], [f32::INFINITY]]),
            Err(Error::NonFiniteValue { row: 1 })
        ));
    }

    #[test]
    fn first_word_edges() {
        assert_eq!(first_word("  Where's  the x?"), Some("where's".into()));
        assert_eq!(first_word("\"what\" county"), Some("what".into()));
        assert_eq!(first_word("?? x"), None);
        assert_eq!(first_word(""), None);
    }

    #[test]
    fn first_word_single_query() {
        let labels = HashMap::from([(1, Label::Geospatial)]);
        let stats = first_word_stats(&[q(1, "where is x")], &labels);
        assert_eq!(stats.tables.len(), 1);
        assert_eq!(stats.tables[0].rows[0].word, "where");
        assert_eq!(stats.tables[0].rows[0].percent, 100.0);
    }

    #[test]
    fn first_word_hand_count() {
        let qs = [
            q(1, "what is a"),
            q(2, "What county"),
            q(3, "where is b"),
            q(4, "how far"),
            q(5, "unlabelled query"),
        ];
        let labels: HashMap<u64, Label> = (1..=4).map(|i| (i, Label::NonGeospatial)).collect();
        let stats = first_word_stats(&qs, &labels);
        assert_eq!(stats.unlabelled, 1);
        let rows = &stats.tables[0].rows;
        let got: Vec<(&str, f64)> = rows.iter().map(|r| (r.word.as_str(), r.percent)).collect();
        assert_eq!(got, vec![("what", 50.0), ("how", 25.0), ("where", 25.0)]);
    }

    proptest! {
        #[test]
        fn qemb_round_trip_is_byte_identical(
            n in 1usize..12,
            d in 1usize..9,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = Array2::from_shape_fn((n, d), |_| rng.random_range(-1e6f32..1e6));
            let ids: Vec<u64> = (0..n as u64).map(|i| i * 7919 + seed % 1000).collect();
            let set = EmbeddingSet::new(ids, m).unwrap();
            let bytes = qemb::encode(&set);
            let back = qemb::decode(&bytes).unwrap();
            prop_assert_eq!(qemb::encode(&back), bytes);
        }

        #[test]
        fn align_is_idempotent(
            q_ids in proptest::collection::btree_set(0u64..40, 1..20),
            e_ids in proptest::collection::btree_set(0u64..40, 1..20),
        ) {
            let qs: Vec<QueryRecord> = q_ids.iter().map(|&i| q(i, "x")).collect();
            let e_ids: Vec<u64> = e_ids.into_iter().rev().collect();
            if let Ok(once) = align(&qs, &emb(&e_ids), None) {
                let twice = align(&once.queries, &once.embeddings, None).unwrap();
                prop_assert_eq!(&twice.queries, &once.queries);
                prop_assert_eq!(&twice.embeddings, &once.embeddings);
                prop_assert_eq!(twice.dropped, 0);
            }
        }

        #[test]
        fn first_word_percents_sum_to_100(
            words in proptest::collection::vec("[a-z]{1,4}( [a-z]{1,3})?", 1..40),
            flags in proptest::collection::vec(any::<bool>(), 40),
        ) {
            let qs: Vec<QueryRecord> = words.iter().enumerate().map(|(i, w)| q(i as u64, w)).collect();
            let labels: HashMap<u64, Label> = (0..qs.len())
                .map(|i| (i as u64, Label::from_positive(flags[i])))
                .collect();
            let stats = first_word_stats(&qs, &labels);
            for t in &stats.tables {
                let sum: f64 = t.rows.iter().map(|r| r.percent).sum();
                prop_assert!((sum - 100.0).abs() < 1e-9);
                prop_assert!(t.rows.windows(2).all(|w| w[0].count >= w[1].count));
            }
        }
    }
}
