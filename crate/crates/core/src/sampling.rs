//! Annotation-candidate selection (D² seeding, centroid snapping) and
//! weak-label aggregation by majority vote.

use std::collections::HashSet;
use std::fmt::Write as _;

use log::warn;
use ndarray::ArrayView2;
use rand::Rng as _;
use rayon::prelude::*;

use crate::corpus::tsv::{data_lines, parse_id};
use crate::corpus::{Label, LabelRecord, LabelSource};
use crate::error::{Error, Result};
use crate::util::{self, sq_dist};

/// Picks `k` distinct rows by k-means++ seeding: the first uniformly, each
/// next one with probability proportional to its squared distance to the
/// nearest row already picked. When every remaining row sits on a picked
/// one, the next pick is uniform over the unpicked rows.
pub fn kmeanspp_select(points: ArrayView2<'_, f32>, k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = points.nrows();
    if k == 0 {
        return Err(Error::EmptyRequest);
    }
    if k > n {
        return Err(Error::InsufficientPoints {
            requested: k,
            available: n,
        });
    }
    let mut rng = util::rng(seed);
    let first = rng.random_range(0..n);
    Ok(d2_continue(points, k, first, &mut rng))
}

fn d2_continue(points: ArrayView2<'_, f32>, k: usize, first: usize, rng: &mut util::Rng) -> Vec<usize> {
    let n = points.nrows();
    let data = points.as_standard_layout();
    let data = data.as_slice().unwrap();
    let d = points.ncols();
    let row = |i: usize| &data[i * d..(i + 1) * d];

    let mut chosen = vec![first];
    let mut picked = vec![false; n];
    picked[first] = true;
    let mut nearest: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| sq_dist(row(i), row(first)))
        .collect();

    while chosen.len() < k {
        let total: f64 = nearest
            .iter()
            .zip(&picked)
            .filter(|(_, &p)| !p)
            .map(|(d, _)| d)
            .sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for i in 0..n {
                if picked[i] || nearest[i] <= 0.0 {
                    continue;
                }
                acc += nearest[i];
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
            pick.expect("positive mass implies a candidate")
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !picked[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        picked[next] = true;
        chosen.push(next);
        nearest.par_iter_mut().enumerate().for_each(|(i, m)| {
            let dd = sq_dist(row(i), row(next));
            if dd < *m {
                *m = dd;
            }
        });
    }
    chosen
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapped {
    /// Nearest row per centroid, in centroid order.
    pub indices: Vec<usize>,
    /// Positions in `indices` that repeat an earlier row.
    pub duplicates: Vec<usize>,
}

impl Snapped {
    /// First occurrence of each row, in centroid order.
    pub fn unique(&self) -> Vec<usize> {
        let mut seen = HashSet::new();
        self.indices
            .iter()
            .copied()
            .filter(|i| seen.insert(*i))
            .collect()
    }
}

/// Nearest row (Euclidean) for each centroid; ties go to the lowest row index.
pub fn snap_to_nearest(
    centroids: ArrayView2<'_, f32>,
    points: ArrayView2<'_, f32>,
) -> Result<Snapped> {
    if centroids.ncols() != points.ncols() {
        return Err(Error::DimMismatch {
            expected: points.ncols(),
            found: centroids.ncols(),
        });
    }
    if points.nrows() == 0 {
        return Err(Error::EmptyInput);
    }
    let pts = points.as_standard_layout();
    let cen = centroids.as_standard_layout();
    let indices: Vec<usize> = cen
        .outer_iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|c| {
            let c = c.as_slice().unwrap();
            let mut best = (f64::INFINITY, 0);
            for (i, p) in pts.outer_iter().enumerate() {
                let dd = sq_dist(c, p.as_slice().unwrap());
                if dd < best.0 {
                    best = (dd, i);
                }
            }
            best.1
        })
        .collect();
    let mut seen = HashSet::new();
    let duplicates: Vec<usize> = indices
        .iter()
        .enumerate()
        .filter(|(_, i)| !seen.insert(**i))
        .map(|(pos, _)| pos)
        .collect();
    if !duplicates.is_empty() {
        warn!(
            "snap_to_nearest: {} centroids snapped onto an already selected row",
            duplicates.len()
        );
    }
    Ok(Snapped {
        indices,
        duplicates,
    })
}

/// Label is geospatial iff at least `threshold` votes are positive; the
/// default threshold is a strict majority, `ceil(len / 2)`.
pub fn majority_vote(votes: &[bool], threshold: Option<usize>) -> Result<(Label, usize)> {
    if votes.is_empty() {
        return Err(Error::EmptyVotes);
    }
    let threshold = threshold.unwrap_or(votes.len().div_ceil(2));
    let positive = votes.iter().filter(|&&v| v).count();
    Ok((Label::from_positive(positive >= threshold), positive))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VoteTable {
    pub rows: Vec<(u64, Vec<bool>)>,
    /// Ids whose row was flagged `abstain` by the labeller.
    pub abstained: Vec<u64>,
}

fn parse_vote(line: usize, field: &str) -> Result<Option<bool>> {
    match field.trim().to_ascii_lowercase().as_str() {
        "true" | "1" => Ok(Some(true)),
        "false" | "0" => Ok(Some(false)),
        "abstain" => Ok(None),
        other => Err(Error::parse(line, format!("invalid vote {other:?}"))),
    }
}

/// Reads `id\tvote1..voteN`; an optional header starting with `id\t` is
/// skipped. Rows containing `abstain` are set aside, not parsed.
pub fn parse_votes(text: &str) -> Result<VoteTable> {
    let mut table = VoteTable::default();
    let mut seen = HashSet::new();
    for (line, row) in text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
    {
        if line == 1 && row.starts_with("id\t") {
            continue;
        }
        let mut fields = row.split('\t');
        let id = parse_id(line, fields.next().unwrap_or(""))?;
        if !seen.insert(id) {
            return Err(Error::DuplicateId(id));
        }
        let parsed = fields
            .map(|f| parse_vote(line, f))
            .collect::<Result<Vec<_>>>()?;
        if parsed.is_empty() {
            return Err(Error::parse(line, "row has no votes"));
        }
        if parsed.iter().any(Option::is_none) {
            table.abstained.push(id);
        } else {
            table.rows.push((id, parsed.into_iter().flatten().collect()));
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoteSummary {
    pub labels: Vec<LabelRecord>,
    /// `histogram[c]` = rows with exactly `c` positive votes.
    pub histogram: Vec<usize>,
    pub abstained: usize,
}

pub fn aggregate_votes(table: &VoteTable, threshold: Option<usize>) -> Result<VoteSummary> {
    let max_votes = table.rows.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    let mut histogram = vec![0; max_votes + 1];
    let mut labels = Vec::with_capacity(table.rows.len());
    for (id, votes) in &table.rows {
        let (label, positive) = majority_vote(votes, threshold)?;
        histogram[positive] += 1;
        let record = LabelRecord::new(*id, label, LabelSource::Weak, Some(positive as u8))
            .map_err(|e| Error::Format(format!("id {id}: {e}")))?;
        labels.push(record);
    }
    Ok(VoteSummary {
        labels,
        histogram,
        abstained: table.abstained.len(),
    })
}

pub fn format_id_list(ids: &[u64]) -> String {
    let mut out = String::from("id\n");
    for id in ids {
        let _ = writeln!(out, "{id}");
    }
    out
}

pub fn parse_id_list(text: &str) -> Result<Vec<u64>> {
    data_lines(text, "id")
        .map(|(line, row)| parse_id(line, row))
        .collect()
}
