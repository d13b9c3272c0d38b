//! HDBSCAN over (reduced) embeddings with Excess-of-Mass selection.

pub mod mst;
pub mod tree;

use std::collections::HashMap;
use std::path::Path;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::corpus::tsv::{data_lines, parse_id};
use crate::error::{Error, Result};
use crate::util;

pub use mst::{build_mst, core_distances, mutual_reachability, MstEdge};
pub use tree::{condense, eom_select, select_eom, CondensedTree, TreeNode};

pub const LABELS_HEADER: &str = "id\tcluster";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub min_cluster_size: usize,
    pub min_samples: usize,
}

impl ClusterParams {
    pub fn new(min_cluster_size: usize, min_samples: usize) -> Self {
        Self {
            min_cluster_size,
            min_samples,
        }
    }

    /// `min_samples = round(fraction * min_cluster_size)`, at least 1.
    pub fn from_fraction(min_cluster_size: usize, fraction: f64) -> Self {
        let ms = (fraction * min_cluster_size as f64).round().max(1.0) as usize;
        Self::new(min_cluster_size, ms)
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.min_cluster_size < 2 {
            return Err(Error::Config("min_cluster_size must be at least 2".into()));
        }
        if self.min_samples < 1 {
            return Err(Error::Config("min_samples must be at least 1".into()));
        }
        if self.min_samples > n {
            return Err(Error::ParamTooLarge {
                min_samples: self.min_samples,
                n,
            });
        }
        if self.min_samples > self.min_cluster_size {
            log::warn!(
                "min_samples {} exceeds min_cluster_size {}",
                self.min_samples,
                self.min_cluster_size
            );
        }
        Ok(())
    }
}

/// Per-point labels (-1 = noise) with per-cluster sizes and stabilities,
/// both indexed by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterLabels {
    pub labels: Vec<i32>,
    pub sizes: Vec<usize>,
    pub stability: Vec<f64>,
}

impl ClusterLabels {
    pub fn n_clusters(&self) -> usize {
        self.sizes.len()
    }
}

#[derive(Debug, Clone)]
pub struct Hdbscan {
    pub labels: ClusterLabels,
    pub tree: CondensedTree,
}

pub fn hdbscan(points: ArrayView2<'_, f32>, params: &ClusterParams) -> Result<Hdbscan> {
    let n = points.nrows();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    params.check(n)?;
    let core = core_distances(points, params.min_samples)?;
    let mst = build_mst(points, &core)?;
    let tree = condense(n, &mst, params.min_cluster_size);
    let labels = select_eom(&tree);
    Ok(Hdbscan { labels, tree })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterMetrics {
    pub noise_fraction: f64,
    pub n_clusters: usize,
    /// `None` when every point is noise.
    pub median_cluster_size: Option<f64>,
}

pub fn cluster_metrics(labels: &[i32]) -> Result<ClusterMetrics> {
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sizes: HashMap<i32, usize> = HashMap::new();
    let mut noise = 0usize;
    for &l in labels {
        if l < 0 {
            noise += 1;
        } else {
            *sizes.entry(l).or_default() += 1;
        }
    }
    let sizes: Vec<f64> = sizes.values().map(|&s| s as f64).collect();
    Ok(ClusterMetrics {
        noise_fraction: noise as f64 / labels.len() as f64,
        n_clusters: sizes.len(),
        median_cluster_size: util::median(&sizes),
    })
}

pub fn format_cluster_labels(ids: &[u64], labels: &[i32]) -> Result<String> {
    if ids.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: ids.len(),
            right: labels.len(),
        });
    }
    let mut out = String::from(LABELS_HEADER);
    out.push('\n');
    for (id, l) in ids.iter().zip(labels) {
        out.push_str(&format!("{id}\t{l}\n"));
    }
    Ok(out)
}

/// `(id, cluster)` pairs in file order.
pub fn parse_cluster_labels(text: &str) -> Result<Vec<(u64, i32)>> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (line, raw) in data_lines(text, LABELS_HEADER) {
        let mut fields = raw.split('\t');
        let id = parse_id(line, fields.next().unwrap_or(""))?;
        let cluster: i32 = fields
            .next()
            .ok_or_else(|| Error::parse(line, "missing cluster column"))?
            .trim()
            .parse()
            .map_err(|_| Error::parse(line, "cluster is not an integer"))?;
        if cluster < -1 {
            return Err(Error::parse(line, "cluster ids below -1 are invalid"));
        }
        if !seen.insert(id) {
            return Err(Error::DuplicateId(id));
        }
        out.push((id, cluster));
    }
    Ok(out)
}

pub fn load_cluster_labels(path: &Path) -> Result<Vec<(u64, i32)>> {
    parse_cluster_labels(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeExport {
    pub nodes: Vec<TreeNode>,
    /// Selected node ids in label order.
    pub selected: Vec<usize>,
}

impl Hdbscan {
    pub fn tree_export(&self) -> TreeExport {
        let mut selected = self.tree.eom_select();
        let t = &self.tree;
        selected.sort_by(|&x, &y| {
            t.nodes[y]
                .size
                .cmp(&t.nodes[x].size)
                .then(t.nodes[x].lambda_birth.total_cmp(&t.nodes[y].lambda_birth))
                .then(x.cmp(&y))
        });
        TreeExport {
            nodes: t.nodes.clone(),
            selected,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use ndarray::Array2;
    use proptest::prelude::*;

    #[test]
    fn metric_examples() {
        let m = cluster_metrics(&[-1, -1, 0, 1, 1, 1]).unwrap();
        assert!((m.noise_fraction - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.n_clusters, 2);
        assert_eq!(m.median_cluster_size, Some(2.0));
        let m = cluster_metrics(&[0, 0, 0, 0]).unwrap();
        assert_eq!((m.noise_fraction, m.n_clusters, m.median_cluster_size), (0.0, 1, Some(4.0)));
        assert!(matches!(cluster_metrics(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn fraction_rounds_to_samples() {
        assert_eq!(ClusterParams::from_fraction(25, 0.2).min_samples, 5);
        assert_eq!(ClusterParams::from_fraction(25, 0.5).min_samples, 13);
        assert_eq!(ClusterParams::from_fraction(2, 0.2).min_samples, 1);
    }

    #[test]
    fn uniform_noise_is_valid() {
        use rand::Rng;
        let mut rng = crate::util::rng(8);
        let p = Array2::from_shape_fn((300, 2), |_| rng.random_range(0.0f32..1.0));
        let h = hdbscan(p.view(), &ClusterParams::new(25, 5)).unwrap();
        let k = h.labels.n_clusters() as i32;
        assert!(h.labels.labels.iter().all(|&l| l >= -1 && l < k));
        assert!(h.labels.sizes.iter().all(|&s| s >= 25));
    }

    #[test]
    fn labels_round_trip() {
        let text = format_cluster_labels(&[5, 9, 2], &[0, -1, 3]).unwrap();
        assert_eq!(parse_cluster_labels(&text).unwrap(), vec![(5, 0), (9, -1), (2, 3)]);
        assert!(parse_cluster_labels("id\tcluster\n1\t-2\n").is_err());
    }

    #[test]
    fn ids_ordered_by_size() {
        let b = synth::gaussian_blobs(&[30, 60, 45], 2, 25.0, 1.0, 6);
        let h = hdbscan(b.points.view(), &ClusterParams::new(20, 5)).unwrap();
        assert_eq!(h.labels.n_clusters(), 3);
        assert!(h.labels.sizes.windows(2).all(|w| w[0] >= w[1]));
    }

    fn quarter_turn(points: &Array2<f32>) -> Array2<f32> {
        Array2::from_shape_fn(points.dim(), |(i, j)| {
            if j == 0 { -points[[i, 1]] } else { points[[i, 0]] }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn cluster_sizes_respect_minimum(seed in 0u64..1000, mcs in 5usize..30, ms in 1usize..10) {
            let b = synth::gaussian_blobs(&[40, 40, 20], 2, 6.0, 1.0, seed);
            let h = hdbscan(b.points.view(), &ClusterParams::new(mcs, ms)).unwrap();
            let k = h.labels.n_clusters();
            for (c, &size) in h.labels.sizes.iter().enumerate() {
                prop_assert!(size >= mcs);
                prop_assert_eq!(h.labels.labels.iter().filter(|&&l| l == c as i32).count(), size);
            }
            prop_assert!(h.labels.labels.iter().all(|&l| l >= -1 && l < k as i32));
        }

        #[test]
        fn rotation_by_quarter_turn_keeps_labels(seed in 0u64..1000) {
            // A quarter turn maps coordinates exactly, so distances are
            // bit-identical and the labelling must be too.
            let b = synth::gaussian_blobs(&[30, 30, 30], 2, 8.0, 1.0, seed);
            let r = quarter_turn(&b.points);
            let p = ClusterParams::new(10, 4);
            let a = hdbscan(b.points.view(), &p).unwrap().labels;
            let c = hdbscan(r.view(), &p).unwrap().labels;
            prop_assert_eq!(a.labels, c.labels);
        }
    }
}
