//! Spectral initialisation: leading non-trivial eigenvectors of the
//! normalised adjacency `D^-1/2 W D^-1/2` (equivalently the smallest of the
//! normalised Laplacian), by block subspace iteration with Rayleigh-Ritz.

use nalgebra::DMatrix;
use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};

use super::fuzzy::FuzzyGraph;
use crate::util;

const MAX_ITERATIONS: usize = 150;
const RITZ_EVERY: usize = 5;
const TOLERANCE: f64 = 1e-4;
const EXTRA_VECTORS: usize = 4;

struct Operator<'a> {
    graph: &'a FuzzyGraph,
    offsets: Vec<usize>,
    inv_sqrt_deg: Vec<f64>,
}

impl Operator<'_> {
    /// `y = (x + D^-1/2 W D^-1/2 x) / 2`; eigenvalues lie in [0, 1].
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let g = self.graph;
        for i in 0..g.n {
            let mut acc = 0.0;
            for e in self.offsets[i]..self.offsets[i + 1] {
                let j = g.cols[e] as usize;
                acc += g.weights[e] * self.inv_sqrt_deg[j] * x[j];
            }
            y[i] = 0.5 * (x[i] + self.inv_sqrt_deg[i] * acc);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormalises `cols` in place against `fixed` and each other (modified
/// Gram-Schmidt). Columns that collapse are replaced with fresh random ones.
fn orthonormalize(cols: &mut [Vec<f64>], fixed: &[f64], rng: &mut util::Rng) {
    for c in 0..cols.len() {
        for attempt in 0..3 {
            let (done, rest) = cols.split_at_mut(c);
            let v = &mut rest[0];
            let p = dot(v, fixed);
            v.iter_mut().zip(fixed).for_each(|(x, f)| *x -= p * f);
            for u in done.iter() {
                let p = dot(v, u);
                v.iter_mut().zip(u).for_each(|(x, f)| *x -= p * f);
            }
            let norm = dot(v, v).sqrt();
            if norm > 1e-10 {
                v.iter_mut().for_each(|x| *x /= norm);
                break;
            }
            if attempt == 2 {
                v.iter_mut().for_each(|x| *x = 0.0);
            } else {
                v.iter_mut()
                    .for_each(|x| *x = StandardNormal.sample(&mut *rng));
            }
        }
    }
}

/// `dims` coordinates per vertex, or `None` when the graph is too small or
/// degenerate for an eigen-decomposition.
pub fn spectral_init(graph: &FuzzyGraph, dims: usize, seed: u64) -> Option<Array2<f32>> {
    let n = graph.n;
    if n <= dims + 1 {
        return None;
    }
    let offsets = graph.row_offsets();
    let mut degree = vec![0.0f64; n];
    for e in 0..graph.nnz() {
        degree[graph.rows[e] as usize] += graph.weights[e];
    }
    if degree.iter().any(|&d| d <= 0.0) {
        return None;
    }
    let op = Operator {
        graph,
        offsets,
        inv_sqrt_deg: degree.iter().map(|d| 1.0 / d.sqrt()).collect(),
    };
    let mut trivial: Vec<f64> = degree.iter().map(|d| d.sqrt()).collect();
    let tn = dot(&trivial, &trivial).sqrt();
    trivial.iter_mut().for_each(|x| *x /= tn);

    let p = (dims + EXTRA_VECTORS).min(n - 1);
    let mut rng = util::stream_rng(seed, 2);
    let mut block: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    orthonormalize(&mut block, &trivial, &mut rng);

    let mut images: Vec<Vec<f64>> = vec![vec![0.0; n]; p];
    for iter in 1..=MAX_ITERATIONS {
        for (x, y) in block.iter().zip(images.iter_mut()) {
            op.apply(x, y);
        }
        if iter % RITZ_EVERY != 0 && iter != MAX_ITERATIONS {
            std::mem::swap(&mut block, &mut images);
            orthonormalize(&mut block, &trivial, &mut rng);
            continue;
        }
        // Rayleigh-Ritz on the current (orthonormal) block.
        let h = DMatrix::from_fn(p, p, |a, b| dot(&block[a], &images[b]));
        let h = (&h + h.transpose()) * 0.5;
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let rotate = |src: &[Vec<f64>]| -> Vec<Vec<f64>> {
            order
                .iter()
                .map(|&c| {
                    let mut v = vec![0.0; n];
                    for (r, s) in src.iter().enumerate() {
                        let coef = eig.eigenvectors[(r, c)];
                        v.iter_mut().zip(s).for_each(|(x, y)| *x += coef * y);
                    }
                    v
                })
                .collect()
        };
        let ritz = rotate(&block);
        let ritz_images = rotate(&images);
        let residual = (0..dims)
            .map(|c| {
                let theta = eig.eigenvalues[order[c]];
                ritz_images[c]
                    .iter()
                    .zip(&ritz[c])
                    .map(|(sy, x)| (sy - theta * x).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0f64, f64::max);
        if residual < TOLERANCE || iter == MAX_ITERATIONS {
            block = ritz;
            break;
        }
        block = ritz_images;
        orthonormalize(&mut block, &trivial, &mut rng);
    }

    let coords = Array2::from_shape_fn((n, dims), |(i, c)| block[c][i]);
    if coords.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let max_abs = coords.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs <= 0.0 {
        return None;
    }
    let expansion = 10.0 / max_abs;
    let mut noise_rng = util::stream_rng(seed, 3);
    Some(coords.mapv(|v| {
        let jitter: f64 = StandardNormal.sample(&mut noise_rng);
        (v * expansion + 1e-4 * jitter) as f32
    }))
}
