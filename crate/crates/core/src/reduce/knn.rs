use ndarray::ArrayView2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::util::sq_dist_f32;

/// Per-point `k` nearest neighbours (self excluded), sorted by ascending
/// distance with ties broken by index.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnGraph {
    pub n: usize,
    pub k: usize,
    pub indices: Vec<u32>,
    pub distances: Vec<f32>,
}

impl KnnGraph {
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.indices[i * self.k..(i + 1) * self.k]
    }

    pub fn distances_of(&self, i: usize) -> &[f32] {
        &self.distances[i * self.k..(i + 1) * self.k]
    }

    /// The `k`-neighbour graph contained in this one. Exact because rows are
    /// fully sorted.
    pub fn truncate(&self, k: usize) -> Result<KnnGraph> {
        if k > self.k {
            return Err(Error::Config(format!(
                "cannot widen a {}-NN graph to k = {k}",
                self.k
            )));
        }
        let mut indices = Vec::with_capacity(self.n * k);
        let mut distances = Vec::with_capacity(self.n * k);
        for i in 0..self.n {
            indices.extend_from_slice(&self.neighbors(i)[..k]);
            distances.extend_from_slice(&self.distances_of(i)[..k]);
        }
        Ok(KnnGraph {
            n: self.n,
            k,
            indices,
            distances,
        })
    }
}

/// Exact Euclidean k-NN by full scan, parallel over query rows.
pub fn knn_graph(points: ArrayView2<'_, f32>, k: usize) -> Result<KnnGraph> {
    let n = points.nrows();
    if k == 0 {
        return Err(Error::Config("k must be positive".into()));
    }
    if k >= n {
        return Err(Error::KTooLarge { k, n });
    }
    let data = points.as_standard_layout();
    let data = data.as_slice().unwrap();
    let d = points.ncols();
    let row = |i: usize| &data[i * d..(i + 1) * d];

    let rows: Vec<Vec<(f32, u32)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let xi = row(i);
            let mut cand: Vec<(f32, u32)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (sq_dist_f32(xi, row(j)), j as u32))
                .collect();
            let by = |a: &(f32, u32), b: &(f32, u32)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < cand.len() {
                cand.select_nth_unstable_by(k - 1, by);
                cand.truncate(k);
            }
            cand.sort_unstable_by(by);
            cand
        })
        .collect();

    let mut indices = Vec::with_capacity(n * k);
    let mut distances = Vec::with_capacity(n * k);
    for r in rows {
        for (d2, j) in r {
            indices.push(j);
            distances.push(d2.sqrt());
        }
    }
    Ok(KnnGraph {
        n,
        k,
        indices,
        distances,
    })
}
