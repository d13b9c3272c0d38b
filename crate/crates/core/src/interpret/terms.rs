use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const STOPWORDS_EN: &str = include_str!("../../data/stopwords_en.txt");

/// The bundled English stopword list.
pub fn english_stopwords() -> &'static HashSet<String> {
    static SET: OnceLock<HashSet<String>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS_EN
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_owned)
            .collect()
    })
}

/// Lowercased alphanumeric runs with stopwords removed.
pub fn tokenize(text: &str, stopwords: &HashSet<String>) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && !stopwords.contains(*t))
        .map(str::to_owned)
        .collect()
}

/// Unigrams and bigrams of one query. Bigrams join adjacent surviving
/// tokens and never span two queries.
pub fn ngrams(text: &str, stopwords: &HashSet<String>) -> Vec<String> {
    let tokens = tokenize(text, stopwords);
    let mut out = tokens.clone();
    out.extend(tokens.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub term: String,
    pub score: f64,
}

/// Top `n` terms per document, where each document is the list of a
/// cluster's query texts. Score is raw count times
/// `ln((1 + D) / (1 + df)) + 1` over the `D` documents; ties alphabetical.
pub fn tfidf_terms(docs: &[Vec<&str>], n: usize, stopwords: &HashSet<String>) -> Result<Vec<Vec<Term>>> {
    if docs.len() < 2 {
        return Err(Error::IdfUndefined);
    }
    let counts: Vec<BTreeMap<String, u64>> = docs
        .iter()
        .map(|texts| {
            let mut tf = BTreeMap::new();
            for text in texts {
                for g in ngrams(text, stopwords) {
                    *tf.entry(g).or_insert(0) += 1;
                }
            }
            tf
        })
        .collect();
    let mut df: HashMap<&str, u64> = HashMap::new();
    for tf in &counts {
        for term in tf.keys() {
            *df.entry(term.as_str()).or_insert(0) += 1;
        }
    }
    let d = docs.len() as f64;
    Ok(counts
        .iter()
        .map(|tf| {
            let mut scored: Vec<Term> = tf
                .iter()
                .map(|(term, &count)| {
                    let idf = ((1.0 + d) / (1.0 + df[term.as_str()] as f64)).ln() + 1.0;
                    Term {
                        term: term.clone(),
                        score: count as f64 * idf,
                    }
                })
                .collect();
            scored.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.term.cmp(&b.term)));
            scored.truncate(n);
            scored
        })
        .collect())
}
