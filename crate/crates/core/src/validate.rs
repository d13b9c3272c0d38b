//! Density-Based Clustering Validation (DBCV) and adjusted Rand index.

use std::collections::{BTreeMap, HashMap};

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::sq_dist;

/// Distances below this are treated as this value.
pub const MIN_DISTANCE: f64 = 1e-12;

fn clamped_dist(a: &[f32], b: &[f32]) -> (f64, bool) {
    let d = sq_dist(a, b).sqrt();
    if d < MIN_DISTANCE {
        (MIN_DISTANCE, true)
    } else {
        (d, false)
    }
}

/// All-points core distance of each member of a cluster of `m >= 2` rows in
/// `dim` dimensions: `(sum_{y != x} (1/d(x,y))^dim / (m-1))^(-1/dim)`,
/// evaluated in log space so large `dim` cannot overflow.
pub fn apts_core_distance(cluster: &[&[f32]], dim: usize) -> Result<Vec<f64>> {
    let m = cluster.len();
    if m < 2 {
        return Err(Error::InsufficientData(format!(
            "all-points core distance needs at least 2 points, got {m}"
        )));
    }
    let dim_f = dim as f64;
    let mut coincident = false;
    let out = cluster
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let logs: Vec<f64> = cluster
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, y)| {
                    let (d, clamped) = clamped_dist(x, y);
                    coincident |= clamped;
                    -dim_f * d.ln()
                })
                .collect();
            let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
            (-(lse - ((m - 1) as f64).ln()) / dim_f).exp()
        })
        .collect();
    if coincident {
        log::warn!("coincident points in cluster; distances clamped to {MIN_DISTANCE:e}");
    }
    Ok(out)
}

/// Mutual-reachability MST of one cluster under its all-points core
/// distances: (max internal edge, internal-node mask).
fn sparseness(cluster: &[&[f32]], core: &[f64]) -> (f64, Vec<bool>) {
    let m = cluster.len();
    let mr = |i: usize, j: usize| clamped_dist(cluster[i], cluster[j]).0.max(core[i]).max(core[j]);
    let mut in_tree = vec![false; m];
    let mut best = vec![f64::INFINITY; m];
    let mut from = vec![0usize; m];
    let mut degree = vec![0usize; m];
    let mut edges = Vec::with_capacity(m - 1);
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..m {
        let mut next = usize::MAX;
        for v in 0..m {
            if in_tree[v] {
                continue;
            }
            let w = mr(current, v);
            if w < best[v] {
                best[v] = w;
                from[v] = current;
            }
            if next == usize::MAX || best[v] < best[next] {
                next = v;
            }
        }
        in_tree[next] = true;
        degree[next] += 1;
        degree[from[next]] += 1;
        edges.push((from[next], next, best[next]));
        current = next;
    }
    let internal: Vec<bool> = degree.iter().map(|&d| d >= 2).collect();
    let internal_max = edges
        .iter()
        .filter(|(a, b, _)| internal[*a] && internal[*b])
        .map(|e| e.2)
        .fold(None, |acc: Option<f64>, w| Some(acc.map_or(w, |a| a.max(w))));
    let dsc = internal_max.unwrap_or_else(|| edges.iter().map(|e| e.2).fold(0.0, f64::max));
    let mask = if internal.iter().any(|&b| b) {
        internal
    } else {
        vec![true; m]
    };
    (dsc, mask)
}

/// Density sparseness of a cluster: the largest internal edge of its
/// mutual-reachability MST (largest edge overall when none is internal).
pub fn density_sparseness(cluster: &[&[f32]], apts: &[f64]) -> f64 {
    sparseness(cluster, apts).0
}

/// Internal MST nodes of a cluster (all nodes when there are none).
pub fn internal_nodes(cluster: &[&[f32]], apts: &[f64]) -> Vec<bool> {
    sparseness(cluster, apts).1
}

/// Density separation between two clusters: the smallest mutual
/// reachability between their internal nodes.
pub fn density_separation(
    ci: &[&[f32]],
    cj: &[&[f32]],
    apts_i: &[f64],
    apts_j: &[f64],
    internal_i: &[bool],
    internal_j: &[bool],
) -> f64 {
    let mut best = f64::INFINITY;
    for (a, x) in ci.iter().enumerate() {
        if !internal_i[a] {
            continue;
        }
        for (b, y) in cj.iter().enumerate() {
            if !internal_j[b] {
                continue;
            }
            let w = clamped_dist(x, y).0.max(apts_i[a]).max(apts_j[b]);
            best = best.min(w);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterValidity {
    pub id: i32,
    pub size: usize,
    pub validity: f64,
    /// Absent for single-point clusters.
    pub dsc: Option<f64>,
    pub min_dspc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Separation {
    pub a: i32,
    pub b: i32,
    pub dspc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbcvReport {
    pub overall: f64,
    pub per_cluster: Vec<ClusterValidity>,
    pub separations: Vec<Separation>,
}

struct Prepared<'a> {
    id: i32,
    rows: Vec<&'a [f32]>,
    apts: Vec<f64>,
    dsc: f64,
    internal: Vec<bool>,
}

/// DBCV of `labels` (-1 = noise) over `points`. Per-cluster validity is
/// weighted by cluster size over the total point count, noise included.
pub fn dbcv(points: ArrayView2<'_, f32>, labels: &[i32]) -> Result<DbcvReport> {
    let n = points.nrows();
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: labels.len(),
        });
    }
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let dim = points.ncols();
    let points = points.as_standard_layout();
    let all: Vec<&[f32]> = points
        .outer_iter()
        .map(|r| r.to_slice().expect("row-major points"))
        .collect();
    let mut members: BTreeMap<i32, Vec<&[f32]>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        if l >= 0 {
            members.entry(l).or_default().push(all[i]);
        }
    }
    let valid = members.values().filter(|m| m.len() >= 2).count();
    if valid < 2 {
        return Err(Error::UndefinedDbcv(valid));
    }

    let prepared: Vec<Prepared> = members
        .iter()
        .filter(|(_, rows)| rows.len() >= 2)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(&id, rows)| {
            let apts = apts_core_distance(rows, dim)?;
            let (dsc, internal) = sparseness(rows, &apts);
            Ok(Prepared {
                id,
                rows: rows.clone(),
                apts,
                dsc,
                internal,
            })
        })
        .collect::<Result<_>>()?;

    let pairs: Vec<(usize, usize)> = (0..prepared.len())
        .flat_map(|i| (i + 1..prepared.len()).map(move |j| (i, j)))
        .collect();
    let separations: Vec<Separation> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&prepared[i], &prepared[j]);
            Separation {
                a: a.id,
                b: b.id,
                dspc: density_separation(&a.rows, &b.rows, &a.apts, &b.apts, &a.internal, &b.internal),
            }
        })
        .collect();

    let mut min_sep: HashMap<i32, f64> = HashMap::new();
    for s in &separations {
        for id in [s.a, s.b] {
            let e = min_sep.entry(id).or_insert(f64::INFINITY);
            *e = e.min(s.dspc);
        }
    }
    let by_id: HashMap<i32, &Prepared> = prepared.iter().map(|p| (p.id, p)).collect();
    let mut overall = 0.0;
    let per_cluster = members
        .iter()
        .map(|(&id, rows)| {
            let size = rows.len();
            match by_id.get(&id) {
                Some(p) => {
                    let sep = min_sep[&id];
                    let denom = sep.max(p.dsc);
                    let validity = if denom > 0.0 { (sep - p.dsc) / denom } else { 0.0 };
                    overall += size as f64 / n as f64 * validity;
                    ClusterValidity {
                        id,
                        size,
                        validity,
                        dsc: Some(p.dsc),
                        min_dspc: Some(sep),
                    }
                }
                None => ClusterValidity {
                    id,
                    size,
                    validity: 0.0,
                    dsc: None,
                    min_dspc: None,
                },
            }
        })
        .collect();
    Ok(DbcvReport {
        overall,
        per_cluster,
        separations,
    })
}

/// Adjusted Rand index between two labellings; every distinct value
/// (noise included) is one class.
pub fn adjusted_rand_index(a: &[i32], b: &[i32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut table: HashMap<(i32, i32), u64> = HashMap::new();
    let mut rows: HashMap<i32, u64> = HashMap::new();
    let mut cols: HashMap<i32, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let pairs = |c: u64| (c * c.saturating_sub(1) / 2) as f64;
    let index: f64 = table.values().map(|&c| pairs(c)).sum();
    let sum_a: f64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_b: f64 = cols.values().map(|&c| pairs(c)).sum();
    let expected = sum_a * sum_b / pairs(a.len() as u64);
    let max = (sum_a + sum_b) / 2.0;
    if max == expected {
        // Both labellings trivial (one class or all singletons).
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}
