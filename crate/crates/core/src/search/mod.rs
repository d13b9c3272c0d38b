//! Hyper-parameter grid over UMAP + HDBSCAN, scored by DBCV and cluster
//! statistics, plus the cross-seed consistency protocol.

pub mod io;
pub mod select;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{cluster_metrics, hdbscan, ClusterParams};
use crate::corpus::EmbeddingSet;
use crate::error::{Error, Result};
use crate::reduce::{knn_graph, reduce_from_knn, KnnGraph, ReducerConfig};
use crate::validate::dbcv;

pub use io::{format_consistency_csv, format_grid_csv, parse_consistency_csv, parse_grid_csv, GRID_HEADER};
pub use select::{select_config, select_seed, Selection, SeedChoice};

pub const CONSISTENCY_SEEDS: [u64; 6] = [0, 1, 2, 3, 4, 42];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dims: Vec<usize>,
    pub neighbors: Vec<usize>,
    pub min_cluster_sizes: Vec<usize>,
    pub min_samples_fractions: Vec<f64>,
    pub seed: u64,
}

impl Default for GridSpec {
    /// 3 x 3 x 4 x 3 = 108 cells at seed 42.
    fn default() -> Self {
        Self {
            dims: vec![5, 10, 15],
            neighbors: vec![10, 25, 50],
            min_cluster_sizes: vec![25, 50, 100, 200],
            min_samples_fractions: vec![0.2, 0.5, 1.0],
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub config_id: usize,
    pub umap_dims: usize,
    pub umap_neighbors: usize,
    pub min_cluster_size: usize,
    pub min_samples: usize,
}

impl GridConfig {
    pub fn cluster_params(&self) -> ClusterParams {
        ClusterParams::new(self.min_cluster_size, self.min_samples)
    }
}

/// Cells in lexicographic (dims, neighbors, min cluster size, fraction)
/// order; `config_id` is the position.
pub fn enumerate_grid(spec: &GridSpec) -> Result<Vec<GridConfig>> {
    if spec.dims.is_empty()
        || spec.neighbors.is_empty()
        || spec.min_cluster_sizes.is_empty()
        || spec.min_samples_fractions.is_empty()
    {
        return Err(Error::Config("every grid axis needs at least one value".into()));
    }
    let mut out = Vec::new();
    for &umap_dims in &spec.dims {
        for &umap_neighbors in &spec.neighbors {
            for &mcs in &spec.min_cluster_sizes {
                for &fraction in &spec.min_samples_fractions {
                    out.push(GridConfig {
                        config_id: out.len(),
                        umap_dims,
                        umap_neighbors,
                        min_cluster_size: mcs,
                        min_samples: ClusterParams::from_fraction(mcs, fraction).min_samples,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigResult {
    pub config_id: usize,
    pub umap_dims: usize,
    pub umap_neighbors: usize,
    pub min_cluster_size: usize,
    pub min_samples: usize,
    pub seed: u64,
    pub dbcv: Option<f64>,
    pub noise_fraction: Option<f64>,
    pub n_clusters: Option<usize>,
    pub median_cluster_size: Option<f64>,
    /// Projection plus clustering plus scoring time; cells sharing a
    /// projection each report its full cost.
    pub wall_time_s: f64,
    /// First failure in the cell, if any.
    pub error: Option<String>,
}

impl ConfigResult {
    fn empty(config: &GridConfig, seed: u64) -> Self {
        Self {
            config_id: config.config_id,
            umap_dims: config.umap_dims,
            umap_neighbors: config.umap_neighbors,
            min_cluster_size: config.min_cluster_size,
            min_samples: config.min_samples,
            seed,
            dbcv: None,
            noise_fraction: None,
            n_clusters: None,
            median_cluster_size: None,
            wall_time_s: 0.0,
            error: None,
        }
    }

    pub fn config(&self) -> GridConfig {
        GridConfig {
            config_id: self.config_id,
            umap_dims: self.umap_dims,
            umap_neighbors: self.umap_neighbors,
            min_cluster_size: self.min_cluster_size,
            min_samples: self.min_samples,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DbcvSpace {
    /// The projected space HDBSCAN clustered in.
    Reduced,
    /// The input embedding space.
    Original,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub dbcv_space: DbcvSpace,
    pub min_dist: f64,
    pub n_epochs: Option<usize>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            dbcv_space: DbcvSpace::Reduced,
            min_dist: 0.1,
            n_epochs: None,
        }
    }
}

/// Shared read-only state for a sweep: the embeddings and one exact
/// neighbour graph at the largest neighbour count any cell needs.
pub struct SweepContext<'a> {
    pub embeddings: &'a EmbeddingSet,
    pub options: SweepOptions,
    knn: Option<KnnGraph>,
}

impl<'a> SweepContext<'a> {
    pub fn new(embeddings: &'a EmbeddingSet, max_neighbors: usize, options: SweepOptions) -> Result<Self> {
        let n = embeddings.len();
        let k = max_neighbors.min(n.saturating_sub(1));
        let knn = if k >= 2 {
            Some(knn_graph(embeddings.matrix(), k)?)
        } else {
            None
        };
        Ok(Self {
            embeddings,
            options,
            knn,
        })
    }

    pub fn for_grid(embeddings: &'a EmbeddingSet, spec: &GridSpec, options: SweepOptions) -> Result<Self> {
        let k = spec.neighbors.iter().copied().max().unwrap_or(2);
        Self::new(embeddings, k, options)
    }

    fn reducer(&self, config: &GridConfig, seed: u64) -> ReducerConfig {
        ReducerConfig {
            out_dims: config.umap_dims,
            n_neighbors: config.umap_neighbors,
            min_dist: self.options.min_dist,
            n_epochs: self.options.n_epochs,
            seed,
        }
    }

    fn project(&self, config: &GridConfig, seed: u64) -> Result<ndarray::Array2<f32>> {
        let n = self.embeddings.len();
        let knn = match &self.knn {
            Some(knn) if config.umap_neighbors <= knn.k => knn,
            _ => {
                return Err(Error::KTooLarge {
                    k: config.umap_neighbors,
                    n,
                })
            }
        };
        Ok(reduce_from_knn(knn, self.embeddings.dim(), &self.reducer(config, seed))?.matrix)
    }

    fn score(&self, projected: &ndarray::Array2<f32>, config: &GridConfig, out: &mut ConfigResult) {
        let h = match hdbscan(projected.view(), &config.cluster_params()) {
            Ok(h) => h,
            Err(e) => {
                out.error = Some(e.to_string());
                return;
            }
        };
        let labels = &h.labels.labels;
        if let Ok(m) = cluster_metrics(labels) {
            out.noise_fraction = Some(m.noise_fraction);
            out.n_clusters = Some(m.n_clusters);
            out.median_cluster_size = m.median_cluster_size;
        }
        let space = match self.options.dbcv_space {
            DbcvSpace::Reduced => projected.view(),
            DbcvSpace::Original => self.embeddings.matrix(),
        };
        match dbcv(space, labels) {
            Ok(report) => out.dbcv = Some(report.overall),
            Err(e) => out.error = Some(e.to_string()),
        }
    }

    /// One cell: project with `seed`, cluster, score. Failures land in the
    /// row, never in the return value.
    pub fn run_config(&self, config: &GridConfig, seed: u64) -> ConfigResult {
        let start = Instant::now();
        let mut out = ConfigResult::empty(config, seed);
        match self.project(config, seed) {
            Ok(p) => self.score(&p, config, &mut out),
            Err(e) => out.error = Some(e.to_string()),
        }
        out.wall_time_s = start.elapsed().as_secs_f64();
        out
    }

    /// Every (config, seed) cell. Cells sharing a projection reuse it;
    /// output is ordered by config id then seed.
    pub fn run_grid(&self, configs: &[GridConfig], seeds: &[u64]) -> Vec<ConfigResult> {
        let mut groups: Vec<((usize, usize, u64), Vec<GridConfig>)> = Vec::new();
        for &seed in seeds {
            for c in configs {
                let key = (c.umap_dims, c.umap_neighbors, seed);
                match groups.iter_mut().find(|g| g.0 == key) {
                    Some(g) => g.1.push(*c),
                    None => groups.push((key, vec![*c])),
                }
            }
        }
        let mut results: Vec<ConfigResult> = groups
            .par_iter()
            .flat_map(|((_, _, seed), cells)| {
                let start = Instant::now();
                let projected = self.project(&cells[0], *seed);
                let projection_time = start.elapsed().as_secs_f64();
                cells
                    .par_iter()
                    .map(|c| {
                        let start = Instant::now();
                        let mut out = ConfigResult::empty(c, *seed);
                        match &projected {
                            Ok(p) => self.score(p, c, &mut out),
                            Err(e) => out.error = Some(e.to_string()),
                        }
                        out.wall_time_s = projection_time + start.elapsed().as_secs_f64();
                        out
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        results.sort_by_key(|r| (r.config_id, r.seed));
        for r in &results {
            if let Some(e) = &r.error {
                log::warn!("config {} seed {}: {e}", r.config_id, r.seed);
            }
        }
        results
    }

    /// The cell under each seed, summarised.
    pub fn consistency(&self, config: &GridConfig, seeds: &[u64]) -> Result<ConsistencyReport> {
        if seeds.len() < 2 {
            return Err(Error::Config("consistency needs at least two seeds".into()));
        }
        let results = self.run_grid(std::slice::from_ref(config), seeds);
        ConsistencyReport::from_results(config, &results)
    }
}

/// Top `k` cells by DBCV among those with at least `min_clusters`
/// clusters; ties go to lower noise, then lower config id.
pub fn rank_top(results: &[ConfigResult], k: usize, min_clusters: usize) -> Vec<ConfigResult> {
    let mut kept: Vec<&ConfigResult> = results
        .iter()
        .filter(|r| r.dbcv.is_some() && r.n_clusters.is_some_and(|c| c >= min_clusters))
        .collect();
    kept.sort_by(|a, b| {
        b.dbcv
            .unwrap()
            .total_cmp(&a.dbcv.unwrap())
            .then(
                a.noise_fraction
                    .unwrap_or(1.0)
                    .total_cmp(&b.noise_fraction.unwrap_or(1.0)),
            )
            .then(a.config_id.cmp(&b.config_id))
            .then(a.seed.cmp(&b.seed))
    });
    kept.into_iter().take(k).cloned().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    /// Population standard deviation.
    pub std: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        // Shifted by the first value so identical inputs give exactly that
        // value back and a zero deviation.
        let shift = values[0];
        let mean = shift + values.iter().map(|v| v - shift).sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Stats {
            min: values.iter().cloned().fold(f64::INFINITY, f64::min),
            mean,
            max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub config: GridConfig,
    pub n_seeds: usize,
    pub dbcv: Option<Stats>,
    pub noise: Option<Stats>,
    pub n_clusters: Option<Stats>,
    /// Per-seed DBCV where defined.
    pub seed_dbcv: Vec<(u64, f64)>,
}

impl ConsistencyReport {
    /// Summary over the rows of `config` in `results`.
    pub fn from_results(config: &GridConfig, results: &[ConfigResult]) -> Result<Self> {
        let rows: Vec<&ConfigResult> = results
            .iter()
            .filter(|r| r.config_id == config.config_id)
            .collect();
        let ok: Vec<&&ConfigResult> = rows.iter().filter(|r| r.n_clusters.is_some()).collect();
        if ok.is_empty() {
            return Err(Error::AllSeedsFailed(rows.len()));
        }
        let seed_dbcv: Vec<(u64, f64)> = ok.iter().filter_map(|r| r.dbcv.map(|d| (r.seed, d))).collect();
        let dbcv_values: Vec<f64> = seed_dbcv.iter().map(|p| p.1).collect();
        let noise: Vec<f64> = ok.iter().filter_map(|r| r.noise_fraction).collect();
        let clusters: Vec<f64> = ok.iter().filter_map(|r| r.n_clusters.map(|c| c as f64)).collect();
        Ok(Self {
            config: *config,
            n_seeds: rows.len(),
            dbcv: Stats::of(&dbcv_values),
            noise: Stats::of(&noise),
            n_clusters: Stats::of(&clusters),
            seed_dbcv,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    fn result(id: usize, dbcv: Option<f64>, noise: f64, clusters: usize) -> ConfigResult {
        ConfigResult {
            dbcv,
            noise_fraction: Some(noise),
            n_clusters: Some(clusters),
            ..ConfigResult::empty(
                &GridConfig {
                    config_id: id,
                    umap_dims: 5,
                    umap_neighbors: 10,
                    min_cluster_size: 25,
                    min_samples: 5,
                },
                42,
            )
        }
    }

    #[test]
    fn default_grid_has_108_cells() {
        let grid = enumerate_grid(&GridSpec::default()).unwrap();
        assert_eq!(grid.len(), 108);
        assert_eq!(grid[0].min_samples, 5);
        assert!(grid.iter().enumerate().all(|(i, c)| c.config_id == i));
        assert_eq!(
            (grid[107].umap_dims, grid[107].umap_neighbors, grid[107].min_cluster_size, grid[107].min_samples),
            (15, 50, 200, 200)
        );
        let one = GridSpec {
            dims: vec![5],
            neighbors: vec![10],
            min_cluster_sizes: vec![25],
            min_samples_fractions: vec![0.2],
            seed: 42,
        };
        assert_eq!(enumerate_grid(&one).unwrap().len(), 1);
        let empty = GridSpec { dims: vec![], ..one };
        assert!(enumerate_grid(&empty).is_err());
    }

    #[test]
    fn ranking_filters_and_breaks_ties() {
        let rows = vec![
            result(0, Some(0.5), 0.4, 12),
            result(1, Some(0.5), 0.3, 12),
            result(2, Some(0.9), 0.1, 4),
            result(3, None, 0.1, 40),
            result(4, Some(0.6), 0.5, 10),
        ];
        let ids: Vec<usize> = rank_top(&rows, 10, 10).iter().map(|r| r.config_id).collect();
        assert_eq!(ids, vec![4, 1, 0]);
        assert!(rank_top(&rows, 10, 100).is_empty());
        assert_eq!(rank_top(&rows, 1, 10).len(), 1);
    }

    #[test]
    fn population_std() {
        let s = Stats::of(&[0.2, 0.4]).unwrap();
        assert!((s.mean - 0.3).abs() < 1e-12);
        assert!((s.std - 0.1).abs() < 1e-12);
        assert_eq!(Stats::of(&[0.7; 6]).unwrap().std, 0.0);
    }

    fn small_corpus() -> EmbeddingSet {
        let b = synth::gaussian_blobs(&[60, 60, 60], 12, 12.0, 1.0, 5);
        EmbeddingSet::from_matrix(b.points).unwrap()
    }

    fn small_config(neighbors: usize) -> GridConfig {
        GridConfig {
            config_id: 0,
            umap_dims: 3,
            umap_neighbors: neighbors,
            min_cluster_size: 20,
            min_samples: 5,
        }
    }

    fn fast() -> SweepOptions {
        SweepOptions {
            n_epochs: Some(100),
            ..SweepOptions::default()
        }
    }

    #[test]
    fn cell_is_deterministic_and_grid_matches_single_runs() {
        let set = small_corpus();
        let ctx = SweepContext::new(&set, 15, fast()).unwrap();
        let c = small_config(10);
        let a = ctx.run_config(&c, 3);
        let b = ctx.run_config(&c, 3);
        assert_eq!((a.dbcv, a.noise_fraction, a.n_clusters), (b.dbcv, b.noise_fraction, b.n_clusters));
        assert_eq!(a.n_clusters, Some(3));
        let grid = ctx.run_grid(&[c], &[3]);
        assert_eq!(grid[0].dbcv, a.dbcv);
    }

    #[test]
    fn oversized_neighbourhood_is_recorded_not_raised() {
        let set = small_corpus();
        let ctx = SweepContext::new(&set, 500, fast()).unwrap();
        let r = ctx.run_config(&small_config(400), 0);
        assert!(r.error.is_some());
        assert_eq!(r.n_clusters, None);
    }

    #[test]
    fn consistency_over_seeds() {
        let set = small_corpus();
        let ctx = SweepContext::new(&set, 10, fast()).unwrap();
        let report = ctx.consistency(&small_config(10), &[0, 1, 2]).unwrap();
        assert_eq!(report.n_seeds, 3);
        let d = report.dbcv.unwrap();
        assert!(d.min <= d.mean && d.mean <= d.max && d.std >= 0.0);
        assert!(ctx.consistency(&small_config(10), &[0]).is_err());
    }
}
