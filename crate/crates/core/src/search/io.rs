use super::{ConfigResult, ConsistencyReport, GridConfig, Stats};
use crate::error::{Error, Result};

pub const GRID_HEADER: &str = "config_id,umap_dims,umap_neighbors,min_cluster_size,min_samples,seed,dbcv,noise_fraction,n_clusters,median_cluster_size,wall_time_s";

pub const CONSISTENCY_HEADER: &str = "config_id,umap_dims,umap_neighbors,min_cluster_size,min_samples,n_seeds,\
dbcv_min,dbcv_mean,dbcv_max,dbcv_std,noise_min,noise_mean,noise_max,noise_std,\
clusters_min,clusters_mean,clusters_max,clusters_std";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Grid rows as CSV; undefined metrics are empty fields.
pub fn format_grid_csv(results: &[ConfigResult]) -> String {
    let mut out = String::from(GRID_HEADER);
    out.push('\n');
    for r in results {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{:.3}\n",
            r.config_id,
            r.umap_dims,
            r.umap_neighbors,
            r.min_cluster_size,
            r.min_samples,
            r.seed,
            opt(r.dbcv),
            opt(r.noise_fraction),
            opt(r.n_clusters),
            opt(r.median_cluster_size),
            r.wall_time_s
        ));
    }
    out
}

struct Fields<'a> {
    line: usize,
    parts: Vec<&'a str>,
}

impl Fields<'_> {
    fn get<T: std::str::FromStr>(&self, i: usize) -> Result<T> {
        self.parts[i]
            .parse()
            .map_err(|_| Error::parse(self.line, format!("bad value {:?} in column {}", self.parts[i], i + 1)))
    }

    fn opt<T: std::str::FromStr>(&self, i: usize) -> Result<Option<T>> {
        if self.parts[i].is_empty() {
            Ok(None)
        } else {
            self.get(i).map(Some)
        }
    }
}

fn rows<'a>(text: &'a str, header: &str) -> Result<Vec<Fields<'a>>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == header => {}
        _ => return Err(Error::Format(format!("expected CSV header {header:?}"))),
    }
    let width = header.split(',').count();
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let parts: Vec<&str> = l.trim_end().split(',').collect();
            if parts.len() != width {
                return Err(Error::parse(i + 1, format!("expected {width} columns, found {}", parts.len())));
            }
            Ok(Fields { line: i + 1, parts })
        })
        .collect()
}

pub fn parse_grid_csv(text: &str) -> Result<Vec<ConfigResult>> {
    rows(text, GRID_HEADER)?
        .into_iter()
        .map(|f| {
            Ok(ConfigResult {
                config_id: f.get(0)?,
                umap_dims: f.get(1)?,
                umap_neighbors: f.get(2)?,
                min_cluster_size: f.get(3)?,
                min_samples: f.get(4)?,
                seed: f.get(5)?,
                dbcv: f.opt(6)?,
                noise_fraction: f.opt(7)?,
                n_clusters: f.opt(8)?,
                median_cluster_size: f.opt(9)?,
                wall_time_s: f.get(10)?,
                error: None,
            })
        })
        .collect()
}

fn stats_fields(s: Option<Stats>) -> String {
    match s {
        Some(s) => format!("{},{},{},{}", s.min, s.mean, s.max, s.std),
        None => ",,,".into(),
    }
}

pub fn format_consistency_csv(reports: &[ConsistencyReport]) -> String {
    let mut out = String::from(CONSISTENCY_HEADER);
    out.push('\n');
    for r in reports {
        let c = &r.config;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.config_id,
            c.umap_dims,
            c.umap_neighbors,
            c.min_cluster_size,
            c.min_samples,
            r.n_seeds,
            stats_fields(r.dbcv),
            stats_fields(r.noise),
            stats_fields(r.n_clusters)
        ));
    }
    out
}

/// Reports without per-seed values (`seed_dbcv` is empty).
pub fn parse_consistency_csv(text: &str) -> Result<Vec<ConsistencyReport>> {
    rows(text, CONSISTENCY_HEADER)?
        .into_iter()
        .map(|f| {
            let stats = |at: usize| -> Result<Option<Stats>> {
                Ok(match (f.opt(at)?, f.opt(at + 1)?, f.opt(at + 2)?, f.opt(at + 3)?) {
                    (Some(min), Some(mean), Some(max), Some(std)) => Some(Stats { min, mean, max, std }),
                    (None, None, None, None) => None,
                    _ => return Err(Error::parse(f.line, "partially filled statistics")),
                })
            };
            Ok(ConsistencyReport {
                config: GridConfig {
                    config_id: f.get(0)?,
                    umap_dims: f.get(1)?,
                    umap_neighbors: f.get(2)?,
                    min_cluster_size: f.get(3)?,
                    min_samples: f.get(4)?,
                },
                n_seeds: f.get(5)?,
                dbcv: stats(6)?,
                noise: stats(10)?,
                n_clusters: stats(14)?,
                seed_dbcv: Vec::new(),
            })
        })
        .collect()
}
