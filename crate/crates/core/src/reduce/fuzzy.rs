//! Local-scale calibration and the symmetric fuzzy neighbourhood graph.

use rayon::prelude::*;

use super::knn::KnnGraph;
use crate::error::{Error, Result};

const SIGMA_TOLERANCE: f64 = 1e-5;
const SIGMA_ITERATIONS: usize = 64;
const MIN_SCALE_FRACTION: f64 = 1e-3;

/// Per-point distance to the nearest neighbour (`rho`) and bandwidth
/// (`sigma`).
#[derive(Debug, Clone, PartialEq)]
pub struct LocalScale {
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
}

/// `sum_j exp(-max(0, d_j - rho) / sigma)`.
pub fn membership_sum(distances: &[f32], rho: f64, sigma: f64) -> f64 {
    distances
        .iter()
        .map(|&d| {
            let gap = d as f64 - rho;
            if gap > 0.0 {
                (-gap / sigma).exp()
            } else {
                1.0
            }
        })
        .sum()
}

fn solve_sigma(point: usize, distances: &[f32], target: f64, mean_all: f64) -> Result<(f64, f64)> {
    let rho = distances[0] as f64;
    let (mut lo, mut hi, mut mid) = (0.0f64, f64::INFINITY, 1.0f64);
    let mut residual = f64::INFINITY;
    for _ in 0..SIGMA_ITERATIONS {
        let psum = membership_sum(distances, rho, mid);
        residual = (psum - target).abs();
        if residual < SIGMA_TOLERANCE {
            break;
        }
        if psum > target {
            hi = mid;
            mid = (lo + hi) / 2.0;
        } else {
            lo = mid;
            mid = if hi.is_infinite() { mid * 2.0 } else { (lo + hi) / 2.0 };
        }
    }
    // Neighbours tied at rho weigh 1 for every sigma; if there are at least
    // `target` of them the constraint cannot be met and sigma shrinks to the
    // floor below.
    let ties = distances.iter().filter(|&&d| d as f64 <= rho).count() as f64;
    if residual >= SIGMA_TOLERANCE && ties < target {
        return Err(Error::SigmaSolveFailure { point });
    }
    let floor = if rho > 0.0 {
        let mean = distances.iter().map(|&d| d as f64).sum::<f64>() / distances.len() as f64;
        MIN_SCALE_FRACTION * mean
    } else {
        MIN_SCALE_FRACTION * mean_all
    };
    Ok((rho, mid.max(floor)))
}

/// Bandwidth per point such that the memberships of its `k` neighbours sum
/// to `log2(k)`, found by bisection.
pub fn smooth_knn(knn: &KnnGraph) -> Result<LocalScale> {
    let target = (knn.k as f64).log2();
    let mean_all = knn.distances.iter().map(|&d| d as f64).sum::<f64>() / knn.distances.len() as f64;
    let solved: Vec<(f64, f64)> = (0..knn.n)
        .into_par_iter()
        .map(|i| solve_sigma(i, knn.distances_of(i), target, mean_all))
        .collect::<Result<_>>()?;
    let (rho, sigma) = solved.into_iter().unzip();
    Ok(LocalScale { rho, sigma })
}

/// Symmetric sparse graph in coordinate form, sorted by `(row, col)`. Both
/// `(i, j)` and `(j, i)` are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyGraph {
    pub n: usize,
    pub rows: Vec<u32>,
    pub cols: Vec<u32>,
    pub weights: Vec<f64>,
}

impl FuzzyGraph {
    pub fn nnz(&self) -> usize {
        self.weights.len()
    }

    /// Offsets into the entry arrays for each row (CSR row pointer).
    pub fn row_offsets(&self) -> Vec<usize> {
        let mut ptr = vec![0usize; self.n + 1];
        for &r in &self.rows {
            ptr[r as usize + 1] += 1;
        }
        for i in 0..self.n {
            ptr[i + 1] += ptr[i];
        }
        ptr
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let ptr = self.row_offsets();
        let cols = &self.cols[ptr[i]..ptr[i + 1]];
        match cols.binary_search(&(j as u32)) {
            Ok(p) => self.weights[ptr[i] + p],
            Err(_) => 0.0,
        }
    }
}

/// Directed memberships `w_ij = exp(-max(0, d_ij - rho_i) / sigma_i)` per
/// k-NN entry, in the k-NN graph's layout.
pub fn directed_weights(knn: &KnnGraph, scale: &LocalScale) -> Vec<f64> {
    let mut w = Vec::with_capacity(knn.n * knn.k);
    for i in 0..knn.n {
        for &d in knn.distances_of(i) {
            let gap = d as f64 - scale.rho[i];
            w.push(if gap > 0.0 {
                (-gap / scale.sigma[i]).exp()
            } else {
                1.0
            });
        }
    }
    w
}

/// Fuzzy union `W = A + A^T - A o A^T` of the directed membership graph.
/// Entries that underflow to zero are dropped.
pub fn fuzzy_simplicial_set(knn: &KnnGraph) -> Result<(FuzzyGraph, LocalScale)> {
    let scale = smooth_knn(knn)?;
    let directed = directed_weights(knn, &scale);

    // (row, col, forward weight, backward weight)
    let mut entries: Vec<(u32, u32, f64, f64)> = Vec::with_capacity(2 * directed.len());
    for i in 0..knn.n {
        for (slot, &j) in knn.neighbors(i).iter().enumerate() {
            let w = directed[i * knn.k + slot];
            if j as usize == i {
                continue;
            }
            entries.push((i as u32, j, w, 0.0));
            entries.push((j, i as u32, 0.0, w));
        }
    }
    entries.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

    let mut graph = FuzzyGraph {
        n: knn.n,
        rows: Vec::new(),
        cols: Vec::new(),
        weights: Vec::new(),
    };
    let mut idx = 0;
    while idx < entries.len() {
        let (r, c, mut a, mut b) = entries[idx];
        idx += 1;
        while idx < entries.len() && entries[idx].0 == r && entries[idx].1 == c {
            a += entries[idx].2;
            b += entries[idx].3;
            idx += 1;
        }
        let w = a + b - a * b;
        if w > 0.0 {
            graph.rows.push(r);
            graph.cols.push(c);
            graph.weights.push(w);
        }
    }
    Ok((graph, scale))
}
