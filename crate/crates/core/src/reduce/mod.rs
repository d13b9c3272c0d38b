//! UMAP projection: exact k-NN graph, fuzzy simplicial set, spectral
//! initialisation and stochastic layout.

pub mod curve;
pub mod fuzzy;
pub mod knn;
pub mod layout;
pub mod quality;
pub mod spectral;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::corpus::EmbeddingSet;
use crate::error::{Error, Result};

pub use fuzzy::{fuzzy_simplicial_set, FuzzyGraph, LocalScale};
pub use knn::{knn_graph, KnnGraph};
pub use layout::{layout, InitKind, LayoutParams};
pub use quality::trustworthiness;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducerConfig {
    pub out_dims: usize,
    pub n_neighbors: usize,
    pub min_dist: f64,
    /// `None` picks 200 epochs above 10,000 points and 500 otherwise.
    pub n_epochs: Option<usize>,
    pub seed: u64,
}

impl ReducerConfig {
    pub fn new(out_dims: usize, n_neighbors: usize, seed: u64) -> Self {
        Self {
            out_dims,
            n_neighbors,
            min_dist: 0.1,
            n_epochs: None,
            seed,
        }
    }

    pub fn epochs_for(&self, n: usize) -> usize {
        self.n_epochs
            .unwrap_or(if n > 10_000 { 200 } else { 500 })
    }

    pub fn validate(&self, n: usize, input_dim: usize) -> Result<()> {
        if self.out_dims == 0 || self.out_dims >= input_dim {
            return Err(Error::Config(format!(
                "output dimensionality {} must be in 1..{input_dim}",
                self.out_dims
            )));
        }
        if self.n_neighbors < 2 {
            return Err(Error::Config("n_neighbors must be at least 2".into()));
        }
        if self.n_neighbors >= n {
            return Err(Error::KTooLarge {
                k: self.n_neighbors,
                n,
            });
        }
        if !(self.min_dist >= 0.0) {
            return Err(Error::Config("min_dist must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMatrix {
    pub matrix: Array2<f32>,
    pub config: ReducerConfig,
    pub init: InitKind,
}

/// Projects `embeddings` to `config.out_dims` dimensions.
pub fn reduce(embeddings: &EmbeddingSet, config: &ReducerConfig) -> Result<ReducedMatrix> {
    config.validate(embeddings.len(), embeddings.dim())?;
    let knn = knn_graph(embeddings.matrix(), config.n_neighbors)?;
    reduce_from_knn(&knn, embeddings.dim(), config)
}

/// As [`reduce`], reusing a precomputed neighbour graph with at least
/// `config.n_neighbors` neighbours per point.
pub fn reduce_from_knn(
    knn: &KnnGraph,
    input_dim: usize,
    config: &ReducerConfig,
) -> Result<ReducedMatrix> {
    config.validate(knn.n, input_dim)?;
    let knn = if knn.k == config.n_neighbors {
        std::borrow::Cow::Borrowed(knn)
    } else {
        std::borrow::Cow::Owned(knn.truncate(config.n_neighbors)?)
    };
    let (graph, _) = fuzzy_simplicial_set(&knn)?;
    let (a, b) = curve::curve_params(config.min_dist);
    let params = LayoutParams {
        dims: config.out_dims,
        n_epochs: config.epochs_for(knn.n),
        a,
        b,
        seed: config.seed,
    };
    let (matrix, init) = layout(&graph, &params)?;
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue {
            row: matrix
                .outer_iter()
                .position(|r| r.iter().any(|v| !v.is_finite()))
                .unwrap_or(0),
        });
    }
    Ok(ReducedMatrix {
        matrix,
        config: *config,
        init,
    })
}

impl ReducedMatrix {
    /// As an embedding set carrying the source ids, for `.qemb` output.
    pub fn to_embedding_set(&self, ids: &[u64]) -> Result<EmbeddingSet> {
        EmbeddingSet::new(ids.to_vec(), self.matrix.clone())
    }
}
