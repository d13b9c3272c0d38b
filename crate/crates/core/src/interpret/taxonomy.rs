use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_aligned, members_by_label, representative_query, NOISE};
use crate::corpus::tsv::data_lines;
use crate::corpus::{EmbeddingSet, QueryRecord};
use crate::error::{Error, Result};

pub const MERGE_HEADER: &str = "cluster_id\tcategory\ttheme";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeEntry {
    pub category: String,
    pub theme: String,
}

/// Cluster id to (category, theme).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeMap {
    pub entries: BTreeMap<i32, MergeEntry>,
}

impl MergeMap {
    /// Every cluster its own category, all under one theme.
    pub fn identity(cluster_ids: impl IntoIterator<Item = i32>, theme: &str) -> Self {
        Self {
            entries: cluster_ids
                .into_iter()
                .filter(|&c| c != NOISE)
                .map(|c| {
                    (
                        c,
                        MergeEntry {
                            category: format!("cluster {c}"),
                            theme: theme.to_owned(),
                        },
                    )
                })
                .collect(),
        }
    }

    /// Fails on the first theme not in `declared`.
    pub fn check_themes(&self, declared: &[String]) -> Result<()> {
        for e in self.entries.values() {
            if !declared.contains(&e.theme) {
                return Err(Error::UnknownTheme(e.theme.clone()));
            }
        }
        Ok(())
    }

    /// Category to theme; a category filed under two themes is an error.
    fn category_themes(&self) -> Result<BTreeMap<&str, &str>> {
        let mut out: BTreeMap<&str, &str> = BTreeMap::new();
        for e in self.entries.values() {
            match out.insert(&e.category, &e.theme) {
                Some(prev) if prev != e.theme => {
                    return Err(Error::Config(format!(
                        "category {:?} is filed under both {prev:?} and {:?}",
                        e.category, e.theme
                    )))
                }
                _ => {}
            }
        }
        Ok(out)
    }
}

pub fn parse_merge_map(text: &str) -> Result<MergeMap> {
    let mut entries = BTreeMap::new();
    for (line, raw) in data_lines(text, MERGE_HEADER) {
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(line, "expected cluster_id, category and theme"));
        }
        let id: i32 = fields[0]
            .trim()
            .parse()
            .map_err(|_| Error::parse(line, "cluster_id is not an integer"))?;
        if id < 0 {
            return Err(Error::parse(line, "noise cannot be mapped"));
        }
        let (category, theme) = (fields[1].trim(), fields[2].trim());
        if category.is_empty() || theme.is_empty() {
            return Err(Error::parse(line, "empty category or theme"));
        }
        let entry = MergeEntry {
            category: category.to_owned(),
            theme: theme.to_owned(),
        };
        if entries.insert(id, entry).is_some() {
            return Err(Error::parse(line, format!("cluster {id} mapped twice")));
        }
    }
    Ok(MergeMap { entries })
}

pub fn load_merge_map(path: &Path) -> Result<MergeMap> {
    parse_merge_map(&std::fs::read_to_string(path)?)
}

pub fn format_merge_map(map: &MergeMap) -> String {
    let mut out = format!("{MERGE_HEADER}\n");
    for (id, e) in &map.entries {
        out.push_str(&format!("{id}\t{}\t{}\n", e.category, e.theme));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryAssignment {
    /// Category per query, `None` for noise.
    pub categories: Vec<Option<String>>,
    pub sizes: BTreeMap<String, usize>,
    pub noise: usize,
}

/// Each query inherits its cluster's category; noise stays noise.
pub fn apply_merge(labels: &[i32], map: &MergeMap) -> Result<CategoryAssignment> {
    map.category_themes()?;
    let present: BTreeSet<i32> = labels.iter().copied().filter(|&l| l != NOISE).collect();
    if let Some(&missing) = present.iter().find(|c| !map.entries.contains_key(c)) {
        return Err(Error::UnmappedCluster(missing));
    }
    if let Some(&extra) = map.entries.keys().find(|c| !present.contains(c)) {
        return Err(Error::UnknownCluster(extra));
    }
    let mut sizes = BTreeMap::new();
    let mut noise = 0;
    let categories = labels
        .iter()
        .map(|&l| {
            if l == NOISE {
                noise += 1;
                None
            } else {
                let c = &map.entries[&l].category;
                *sizes.entry(c.clone()).or_insert(0) += 1;
                Some(c.clone())
            }
        })
        .collect();
    Ok(CategoryAssignment {
        categories,
        sizes,
        noise,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryNode {
    pub name: String,
    pub size: usize,
    pub cluster_ids: Vec<i32>,
    pub representative_query: String,
    pub representative_query_id: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThemeNode {
    pub name: String,
    pub children: Vec<CategoryNode>,
}

impl ThemeNode {
    pub fn size(&self) -> usize {
        self.children.iter().map(|c| c.size).sum()
    }
}

/// The exported parent-child document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyDoc {
    pub name: String,
    pub children: Vec<ThemeNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taxonomy {
    /// Themes by decreasing size, then name; categories likewise.
    pub themes: Vec<ThemeNode>,
    pub noise: usize,
    pub total: usize,
}

impl Taxonomy {
    pub fn to_doc(&self) -> TaxonomyDoc {
        TaxonomyDoc {
            name: "root".into(),
            children: self.themes.clone(),
        }
    }
}

/// Merges clusters into categories and themes. A category's representative
/// query is recomputed over all of its members in the embedding space.
pub fn build_taxonomy(
    queries: &[QueryRecord],
    embeddings: &EmbeddingSet,
    labels: &[i32],
    map: &MergeMap,
) -> Result<Taxonomy> {
    check_aligned(queries, embeddings, labels)?;
    let assignment = apply_merge(labels, map)?;
    let themes_of = map.category_themes()?;
    let members = members_by_label(labels);

    let mut by_category: BTreeMap<&str, (Vec<i32>, Vec<usize>)> = BTreeMap::new();
    for (&label, rows) in &members {
        if label == NOISE {
            continue;
        }
        let entry = by_category.entry(&map.entries[&label].category).or_default();
        entry.0.push(label);
        entry.1.extend(rows);
    }
    let mut themes: BTreeMap<&str, Vec<CategoryNode>> = BTreeMap::new();
    for (category, (cluster_ids, mut rows)) in by_category {
        rows.sort_unstable();
        let r = representative_query(embeddings.matrix(), &rows, embeddings.ids())?;
        themes.entry(themes_of[category]).or_default().push(CategoryNode {
            name: category.to_owned(),
            size: rows.len(),
            cluster_ids,
            representative_query: queries[r].text.clone(),
            representative_query_id: queries[r].id,
        });
    }
    let mut themes: Vec<ThemeNode> = themes
        .into_iter()
        .map(|(name, mut children)| {
            children.sort_by(|a, b| b.size.cmp(&a.size).then(a.name.cmp(&b.name)));
            ThemeNode {
                name: name.to_owned(),
                children,
            }
        })
        .collect();
    themes.sort_by(|a, b| b.size().cmp(&a.size()).then(a.name.cmp(&b.name)));
    Ok(Taxonomy {
        themes,
        noise: assignment.noise,
        total: labels.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThemeShare {
    pub theme: String,
    pub size: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThemeShares {
    pub total: usize,
    pub themes: Vec<ThemeShare>,
    pub noise_percent: f64,
}

/// Theme sizes as percentages of `total`, noise included.
pub fn theme_shares(taxonomy: &Taxonomy, total: usize) -> Result<ThemeShares> {
    let parts = taxonomy.themes.iter().map(ThemeNode::size).sum::<usize>() + taxonomy.noise;
    if parts != total {
        return Err(Error::SizeMismatch { parts, total });
    }
    if total == 0 {
        return Err(Error::EmptyInput);
    }
    let pct = |n: usize| n as f64 / total as f64 * 100.0;
    Ok(ThemeShares {
        total,
        themes: taxonomy
            .themes
            .iter()
            .map(|t| ThemeShare {
                theme: t.name.clone(),
                size: t.size(),
                percent: pct(t.size()),
            })
            .collect(),
        noise_percent: pct(taxonomy.noise),
    })
}

pub fn export_taxonomy_json(taxonomy: &Taxonomy) -> String {
    serde_json::to_string_pretty(&taxonomy.to_doc()).expect("taxonomy serialises")
}

pub fn parse_taxonomy_json(text: &str) -> Result<TaxonomyDoc> {
    Ok(serde_json::from_str(text)?)
}
