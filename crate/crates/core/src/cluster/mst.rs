use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::sq_dist;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MstEdge {
    pub a: u32,
    pub b: u32,
    pub weight: f64,
}

fn rows<'a>(points: &'a ArrayView2<'_, f32>) -> Vec<&'a [f32]> {
    points
        .outer_iter()
        .map(|r| r.to_slice().expect("row-major points"))
        .collect()
}

/// Distance to the `min_samples`-th nearest neighbour, the point itself
/// being its own first neighbour (so `min_samples == 1` gives zeros).
pub fn core_distances(points: ArrayView2<'_, f32>, min_samples: usize) -> Result<Vec<f64>> {
    let n = points.nrows();
    if min_samples == 0 {
        return Err(Error::Config("min_samples must be at least 1".into()));
    }
    if min_samples > n {
        return Err(Error::ParamTooLarge { min_samples, n });
    }
    let points = points.as_standard_layout();
    let view = points.view();
    let rows = rows(&view);
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<f64> = rows.iter().map(|r| sq_dist(rows[i], r)).collect();
            d[i] = 0.0;
            let (_, kth, _) = d.select_nth_unstable_by(min_samples - 1, f64::total_cmp);
            kth.sqrt()
        })
        .collect())
}

/// `max(core_i, core_j, d(i, j))`.
pub fn mutual_reachability(i: usize, j: usize, points: ArrayView2<'_, f32>, core: &[f64]) -> f64 {
    let a = points.row(i);
    let b = points.row(j);
    let d = sq_dist(
        a.as_slice().expect("row-major points"),
        b.as_slice().expect("row-major points"),
    )
    .sqrt();
    d.max(core[i]).max(core[j])
}

/// Minimum spanning tree of the implied dense mutual-reachability graph
/// (Prim, O(n^2) distance evaluations). Edges come out in insertion order;
/// the frontier minimum breaks ties towards the lower vertex index.
pub fn build_mst(points: ArrayView2<'_, f32>, core: &[f64]) -> Result<Vec<MstEdge>> {
    let n = points.nrows();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    if core.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: core.len(),
        });
    }
    let points = points.as_standard_layout();
    let view = points.view();
    let rows = rows(&view);

    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0u32; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut current = 0usize;
    in_tree[0] = true;
    for _ in 1..n {
        let src = rows[current];
        let core_c = core[current];
        let mut next = usize::MAX;
        let mut next_w = f64::INFINITY;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let w = sq_dist(src, rows[v]).sqrt().max(core_c).max(core[v]);
            if w < best[v] {
                best[v] = w;
                from[v] = current as u32;
            }
            if best[v] < next_w || next == usize::MAX {
                next_w = best[v];
                next = v;
            }
        }
        in_tree[next] = true;
        edges.push(MstEdge {
            a: from[next],
            b: next as u32,
            weight: next_w,
        });
        current = next;
    }
    Ok(edges)
}
