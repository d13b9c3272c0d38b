use std::collections::HashMap;
use std::hash::Hash;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::util;

/// Binary confusion counts and the ratios derived from them. Ratios whose
/// denominator is zero are reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Accuracy,
    Precision,
    Recall,
    F1,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [
        MetricKind::Accuracy,
        MetricKind::Precision,
        MetricKind::Recall,
        MetricKind::F1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Accuracy => "accuracy",
            MetricKind::Precision => "precision",
            MetricKind::Recall => "recall",
            MetricKind::F1 => "f1",
        }
    }

    /// `None` when the metric's denominator is zero.
    pub fn value(self, tp: usize, fp: usize, fn_: usize, tn: usize) -> Option<f64> {
        let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        match self {
            MetricKind::Accuracy => ratio(tp + tn, tp + fp + fn_ + tn),
            MetricKind::Precision => ratio(tp, tp + fp),
            MetricKind::Recall => ratio(tp, tp + fn_),
            MetricKind::F1 => ratio(2 * tp, 2 * tp + fp + fn_),
        }
    }
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        let v = |k: MetricKind| k.value(tp, fp, fn_, tn).unwrap_or(0.0);
        Self {
            tp,
            fp,
            fn_,
            tn,
            accuracy: v(MetricKind::Accuracy),
            precision: v(MetricKind::Precision),
            recall: v(MetricKind::Recall),
            f1: v(MetricKind::F1),
        }
    }

    pub fn get(&self, kind: MetricKind) -> f64 {
        match kind {
            MetricKind::Accuracy => self.accuracy,
            MetricKind::Precision => self.precision,
            MetricKind::Recall => self.recall,
            MetricKind::F1 => self.f1,
        }
    }
}

fn confusion(pred: &[Label], gold: &[Label], rows: impl Iterator<Item = usize>) -> [usize; 4] {
    let mut c = [0usize; 4];
    for i in rows {
        let slot = match (pred[i].is_positive(), gold[i].is_positive()) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        };
        c[slot] += 1;
    }
    c
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { left: a, right: b });
    }
    if a == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(())
}

pub fn evaluate(pred: &[Label], gold: &[Label]) -> Result<Metrics> {
    check_lengths(pred.len(), gold.len())?;
    let [tp, fp, fn_, tn] = confusion(pred, gold, 0..pred.len());
    Ok(Metrics::from_counts(tp, fp, fn_, tn))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub metric: MetricKind,
    #[serde(rename = "ci_lower")]
    pub lower: f64,
    #[serde(rename = "ci_upper")]
    pub upper: f64,
    pub resamples: usize,
    /// Resamples on which the metric was undefined and therefore ignored.
    pub skipped: usize,
    pub level: f64,
}

/// Linear-interpolation percentile of sorted data, `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Percentile bootstrap over items resampled uniformly with replacement.
/// Resample `b` draws from stream `b` of `seed`, so bounds do not depend on
/// the worker count.
pub fn bootstrap_ci(
    pred: &[Label],
    gold: &[Label],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<Vec<BootstrapCi>> {
    check_lengths(pred.len(), gold.len())?;
    if pred.len() < 2 {
        return Err(Error::InsufficientData("bootstrap needs at least 2 items".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("confidence level {level} not in (0, 1)")));
    }
    if resamples == 0 {
        return Err(Error::Config("resample count must be positive".into()));
    }
    let n = pred.len();
    let counts: Vec<[usize; 4]> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = util::stream_rng(seed, b as u64);
            confusion(pred, gold, (0..n).map(|_| rng.random_range(0..n)))
        })
        .collect();
    let alpha = (1.0 - level) / 2.0;
    MetricKind::ALL
        .iter()
        .map(|&kind| {
            let mut values: Vec<f64> = counts
                .iter()
                .filter_map(|&[tp, fp, fn_, tn]| kind.value(tp, fp, fn_, tn))
                .collect();
            if values.is_empty() {
                return Err(Error::UndefinedMetricCi(kind.name().into()));
            }
            values.sort_by(|a, b| a.total_cmp(b));
            Ok(BootstrapCi {
                metric: kind,
                lower: percentile(&values, alpha),
                upper: percentile(&values, 1.0 - alpha),
                resamples,
                skipped: resamples - values.len(),
                level,
            })
        })
        .collect()
}

/// Chance-corrected agreement `(p_o - p_e) / (1 - p_e)`. Returns 1 when both
/// raters use a single identical category throughout.
pub fn cohens_kappa<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<f64> {
    check_lengths(a.len(), b.len())?;
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let mut marg_a: HashMap<&T, usize> = HashMap::new();
    let mut marg_b: HashMap<&T, usize> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *marg_a.entry(x).or_default() += 1;
        *marg_b.entry(y).or_default() += 1;
    }
    let p_o = agree / n;
    let p_e: f64 = marg_a
        .iter()
        .map(|(k, &ca)| ca as f64 * marg_b.get(k).copied().unwrap_or(0) as f64)
        .sum::<f64>()
        / (n * n);
    if p_e >= 1.0 {
        return Ok(if p_o >= 1.0 { 1.0 } else { 0.0 });
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}
