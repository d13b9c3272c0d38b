//! Stochastic gradient layout of a fuzzy graph in low dimension.
//!
//! Edges are sampled in proportion to their weight, each positive sample is
//! followed by negative samples drawn uniformly over vertices, and the
//! learning rate decays linearly to zero. Updates are applied sequentially
//! in edge order, so a seed fixes the result bit for bit.

use ndarray::Array2;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::fuzzy::FuzzyGraph;
use super::spectral::spectral_init;
use crate::error::{Error, Result};
use crate::util;

pub const NEGATIVE_SAMPLE_RATE: usize = 5;
const GRADIENT_CLIP: f32 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutParams {
    pub dims: usize,
    pub n_epochs: usize,
    pub a: f64,
    pub b: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Spectral,
    Random,
}

fn random_init(n: usize, dims: usize, seed: u64) -> Array2<f32> {
    let mut rng = util::stream_rng(seed, 0);
    Array2::from_shape_fn((n, dims), |_| rng.random_range(-10.0f32..10.0))
}

/// Spectral coordinates, or uniform random in [-10, 10] when the
/// eigen-solver has nothing usable.
pub fn initial_layout(graph: &FuzzyGraph, dims: usize, seed: u64) -> (Array2<f32>, InitKind) {
    match spectral_init(graph, dims, seed) {
        Some(init) => (init, InitKind::Spectral),
        None => (random_init(graph.n, dims, seed), InitKind::Random),
    }
}

/// Rescales every column to [0, 10]; constant columns are left alone.
fn normalize_columns(emb: &mut Array2<f32>) {
    for mut col in emb.columns_mut() {
        let lo = col.iter().cloned().fold(f32::INFINITY, f32::min);
        let hi = col.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
        if hi > lo {
            col.mapv_inplace(|v| 10.0 * (v - lo) / (hi - lo));
        }
    }
}

#[inline]
fn clip(v: f32) -> f32 {
    v.clamp(-GRADIENT_CLIP, GRADIENT_CLIP)
}

pub fn layout(graph: &FuzzyGraph, params: &LayoutParams) -> Result<(Array2<f32>, InitKind)> {
    if graph.n == 0 {
        return Err(Error::EmptyGraph);
    }
    if params.dims == 0 || params.n_epochs == 0 {
        return Err(Error::Config("layout needs dims > 0 and epochs > 0".into()));
    }
    let (mut emb, init) = initial_layout(graph, params.dims, params.seed);
    if graph.nnz() == 0 {
        return Ok((emb, init));
    }
    normalize_columns(&mut emb);
    optimize(&mut emb, graph, params);
    Ok((emb, init))
}

fn optimize(emb: &mut Array2<f32>, graph: &FuzzyGraph, params: &LayoutParams) {
    let n = graph.n;
    let dims = params.dims;
    let n_epochs = params.n_epochs;
    let max_w = graph.weights.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = max_w / n_epochs as f64;

    let mut heads = Vec::new();
    let mut tails = Vec::new();
    let mut eps = Vec::new();
    for e in 0..graph.nnz() {
        let w = graph.weights[e];
        if w >= cutoff {
            heads.push(graph.rows[e] as usize);
            tails.push(graph.cols[e] as usize);
            eps.push(max_w / w);
        }
    }
    let eps_neg: Vec<f64> = eps.iter().map(|e| e / NEGATIVE_SAMPLE_RATE as f64).collect();
    let mut next_sample = eps.clone();
    let mut next_neg = eps_neg.clone();

    let a = params.a as f32;
    let b = params.b as f32;
    let data = emb.as_slice_mut().expect("standard layout");
    let mut rng = util::stream_rng(params.seed, 1);
    let mut grad = vec![0.0f32; dims];

    for epoch in 0..n_epochs {
        let alpha = 1.0 - epoch as f32 / n_epochs as f32;
        let now = epoch as f64;
        for i in 0..heads.len() {
            if next_sample[i] > now {
                continue;
            }
            let (j, k) = (heads[i], tails[i]);

            let mut d2 = 0.0f32;
            for c in 0..dims {
                let diff = data[j * dims + c] - data[k * dims + c];
                grad[c] = diff;
                d2 += diff * diff;
            }
            let coeff = if d2 > 0.0 {
                -2.0 * a * b * d2.powf(b - 1.0) / (a * d2.powf(b) + 1.0)
            } else {
                0.0
            };
            for c in 0..dims {
                let g = clip(coeff * grad[c]) * alpha;
                data[j * dims + c] += g;
                data[k * dims + c] -= g;
            }
            next_sample[i] += eps[i];

            let n_neg = ((now - next_neg[i]) / eps_neg[i]).max(0.0) as usize;
            for _ in 0..n_neg {
                let k = rng.random_range(0..n);
                if k == j {
                    continue;
                }
                let mut d2 = 0.0f32;
                for c in 0..dims {
                    let diff = data[j * dims + c] - data[k * dims + c];
                    grad[c] = diff;
                    d2 += diff * diff;
                }
                if d2 > 0.0 {
                    let coeff = 2.0 * b / ((0.001 + d2) * (a * d2.powf(b) + 1.0));
                    for c in 0..dims {
                        data[j * dims + c] += clip(coeff * grad[c]) * alpha;
                    }
                }
            }
            next_neg[i] += n_neg as f64 * eps_neg[i];
        }
    }
}
