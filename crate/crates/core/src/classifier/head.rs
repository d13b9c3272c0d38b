//! Logistic-regression head over frozen embeddings.

use std::fs;
use std::path::Path;

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::{EmbeddingSet, Label};
use crate::error::{Error, Result};
use crate::util;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f32>,
    pub bias: f32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            epochs: 5,
            learning_rate: 2e-3,
            batch_size: 64,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    /// Mean training loss before training, then after each epoch.
    pub losses: Vec<f64>,
}

impl TrainReport {
    pub fn initial_loss(&self) -> f64 {
        self.losses[0]
    }

    pub fn final_loss(&self) -> f64 {
        *self.losses.last().unwrap()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn logit(w: &[f64], b: f64, x: &[f32]) -> f64 {
    w.iter().zip(x).map(|(w, x)| w * *x as f64).sum::<f64>() + b
}

/// Mean logistic loss over `rows` and its gradient `(d/dw, d/db)`.
pub fn loss_and_gradient(
    weights: &[f64],
    bias: f64,
    features: ArrayView2<'_, f32>,
    targets: &[bool],
    rows: &[usize],
) -> (f64, Vec<f64>, f64) {
    let mut loss = 0.0;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    for &r in rows {
        let x = features.row(r);
        let x = x.as_slice().expect("standard layout");
        let z = logit(weights, bias, x);
        let y = if targets[r] { 1.0 } else { 0.0 };
        loss += softplus(z) - y * z;
        let err = sigmoid(z) - y;
        for (g, xi) in gw.iter_mut().zip(x) {
            *g += err * *xi as f64;
        }
        gb += err;
    }
    let m = rows.len() as f64;
    gw.iter_mut().for_each(|g| *g /= m);
    (loss / m, gw, gb / m)
}

/// Mini-batch gradient descent on the logistic loss, starting from zero
/// weights. Batches are reshuffled each epoch from `params.seed`.
pub fn train_head(
    features: ArrayView2<'_, f32>,
    labels: &[Label],
    params: &TrainParams,
) -> Result<(LinearModel, TrainReport)> {
    if features.nrows() != labels.len() {
        return Err(Error::LengthMismatch {
            left: features.nrows(),
            right: labels.len(),
        });
    }
    let targets: Vec<bool> = labels.iter().map(|l| l.is_positive()).collect();
    if !targets.iter().any(|&t| t) || targets.iter().all(|&t| t) {
        return Err(Error::DegenerateTraining);
    }
    if params.batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    let features = features.as_standard_layout();
    let n = targets.len();
    let all: Vec<usize> = (0..n).collect();
    let mut w = vec![0.0; features.ncols()];
    let mut b = 0.0;
    let mut rng = util::rng(params.seed);
    let mut losses = vec![loss_and_gradient(&w, b, features.view(), &targets, &all).0];
    let mut order = all.clone();
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(params.batch_size) {
            let (_, gw, gb) = loss_and_gradient(&w, b, features.view(), &targets, batch);
            for (wi, gi) in w.iter_mut().zip(&gw) {
                *wi -= params.learning_rate * gi;
            }
            b -= params.learning_rate * gb;
        }
        losses.push(loss_and_gradient(&w, b, features.view(), &targets, &all).0);
    }
    let model = LinearModel {
        weights: w.iter().map(|&v| v as f32).collect(),
        bias: b as f32,
    };
    Ok((model, TrainReport { losses }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub id: u64,
    pub label: Label,
    pub probability: f64,
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn probability(&self, x: &[f32]) -> f64 {
        let z: f64 = self
            .weights
            .iter()
            .zip(x)
            .map(|(w, x)| *w as f64 * *x as f64)
            .sum::<f64>()
            + self.bias as f64;
        sigmoid(z)
    }
}

/// Geospatial iff `sigmoid(w.x + b) >= 0.5`.
pub fn predict(model: &LinearModel, embeddings: &EmbeddingSet) -> Result<Vec<Prediction>> {
    if model.dim() != embeddings.dim() {
        return Err(Error::DimMismatch {
            expected: model.dim(),
            found: embeddings.dim(),
        });
    }
    Ok(embeddings
        .ids()
        .iter()
        .enumerate()
        .map(|(i, &id)| {
            let p = model.probability(embeddings.row(i));
            Prediction {
                id,
                label: Label::from_positive(p >= 0.5),
                probability: p,
            }
        })
        .collect())
}

pub const MODEL_MAGIC: &[u8; 4] = b"LMDL";
pub const MODEL_VERSION: u32 = 1;

pub fn encode_model(model: &LinearModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 4 * (model.dim() + 1));
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    out.extend_from_slice(&(model.dim() as u32).to_le_bytes());
    for w in model.weights.iter().chain(std::iter::once(&model.bias)) {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out
}

pub fn decode_model(bytes: &[u8]) -> Result<LinearModel> {
    if bytes.len() < 12 || &bytes[..4] != MODEL_MAGIC {
        return Err(Error::Format("missing LMDL magic".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != MODEL_VERSION {
        return Err(Error::Format(format!("unsupported model version {version}")));
    }
    let d = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected = 4 * (d as u64 + 1);
    let found = (bytes.len() - 12) as u64;
    if found != expected {
        return Err(Error::TruncatedFile { expected, found });
    }
    let mut values: Vec<f32> = bytes[12..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(row) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue { row });
    }
    let bias = values.pop().unwrap();
    Ok(LinearModel {
        weights: values,
        bias,
    })
}

pub fn write_model(path: impl AsRef<Path>, model: &LinearModel) -> Result<()> {
    Ok(fs::write(path, encode_model(model))?)
}

pub fn read_model(path: impl AsRef<Path>) -> Result<LinearModel> {
    decode_model(&fs::read(path)?)
}
