use std::fmt::Write as _;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::tsv::{data_lines, parse_id};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::util;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_n: usize,
    pub val_n: usize,
    pub test_n: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn total(&self) -> usize {
        self.train_n + self.val_n + self.test_n
    }
}

/// Disjoint row indices into the label slice, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Partition {
    Train,
    Val,
    Test,
}

impl Partition {
    pub fn as_str(self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Val => "val",
            Partition::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Partition::Train),
            "val" => Some(Partition::Val),
            "test" => Some(Partition::Test),
            _ => None,
        }
    }
}

impl Split {
    pub fn part(&self, p: Partition) -> &[usize] {
        match p {
            Partition::Train => &self.train,
            Partition::Val => &self.val,
            Partition::Test => &self.test,
        }
    }
}

/// `round(num / den)` with halves rounded up, in exact integer arithmetic.
fn round_div(num: usize, den: usize) -> usize {
    (2 * num + den) / (2 * den)
}

/// Stratified three-way split. Positives per partition come from rounding
/// the cumulative partition boundaries, so each partition's class count is
/// within one of exact proportionality.
pub fn stratified_split(labels: &[Label], spec: &SplitSpec) -> Result<Split> {
    let n = labels.len();
    if spec.total() > n {
        return Err(Error::InsufficientData(format!(
            "split needs {} labelled items, have {n}",
            spec.total()
        )));
    }
    let mut pos: Vec<usize> = (0..n).filter(|&i| labels[i].is_positive()).collect();
    let mut neg: Vec<usize> = (0..n).filter(|&i| !labels[i].is_positive()).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::InsufficientData(
            "stratified split needs both classes".into(),
        ));
    }
    let mut rng = util::rng(spec.seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);

    let sizes = [spec.train_n, spec.val_n, spec.test_n];
    let mut parts: [Vec<usize>; 3] = Default::default();
    let (mut cum, mut pos_used, mut neg_used) = (0, 0, 0);
    for (k, size) in sizes.into_iter().enumerate() {
        cum += size;
        let pos_cum = round_div(cum * pos.len(), n);
        let take_pos = pos_cum - pos_used;
        let take_neg = size - take_pos;
        parts[k].extend_from_slice(&pos[pos_used..pos_used + take_pos]);
        parts[k].extend_from_slice(&neg[neg_used..neg_used + take_neg]);
        parts[k].sort_unstable();
        pos_used += take_pos;
        neg_used += take_neg;
    }
    let [train, val, test] = parts;
    Ok(Split { train, val, test })
}

pub const SPLIT_HEADER: &str = "id\tpartition";

pub fn format_split(ids: &[u64], split: &Split) -> String {
    let mut rows: Vec<(u64, Partition)> = Vec::new();
    for p in [Partition::Train, Partition::Val, Partition::Test] {
        rows.extend(split.part(p).iter().map(|&i| (ids[i], p)));
    }
    let mut out = String::from(SPLIT_HEADER);
    out.push('\n');
    for (id, p) in rows {
        let _ = writeln!(out, "{id}\t{}", p.as_str());
    }
    out
}

pub fn parse_split(text: &str) -> Result<Vec<(u64, Partition)>> {
    data_lines(text, SPLIT_HEADER)
        .map(|(line, row)| {
            let (id, part) = row
                .split_once('\t')
                .ok_or_else(|| Error::parse(line, "expected id and partition"))?;
            let part = Partition::parse(part.trim())
                .ok_or_else(|| Error::parse(line, format!("unknown partition {part:?}")))?;
            Ok((parse_id(line, id)?, part))
        })
        .collect()
}
