use ndarray::ArrayView2;
use rayon::prelude::*;

use crate::util::sq_dist;

fn sorted_others(points: &[f32], dims: usize, n: usize, i: usize) -> Vec<usize> {
    let row = |r: usize| &points[r * dims..(r + 1) * dims];
    let mut others: Vec<(f64, usize)> = (0..n)
        .filter(|&j| j != i)
        .map(|j| (sq_dist(row(i), row(j)), j))
        .collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    others.into_iter().map(|p| p.1).collect()
}

/// Trustworthiness of a low-dimensional embedding at neighbourhood size `k`:
///
/// `T = 1 - 2 / (n k (2n - 3k - 1)) * sum_i sum_{j in U_i} (r(i, j) - k)`
///
/// where `U_i` are the low-dimensional k-NN of `i` that are not among its
/// high-dimensional k-NN and `r(i, j)` is the high-dimensional rank of `j`.
pub fn trustworthiness(high: ArrayView2<'_, f32>, low: ArrayView2<'_, f32>, k: usize) -> f64 {
    let n = high.nrows();
    assert_eq!(n, low.nrows());
    assert!(k >= 1 && 2 * n > 3 * k + 1, "k too large for n");
    let h = high.as_standard_layout();
    let l = low.as_standard_layout();
    let (h, l) = (h.as_slice().unwrap(), l.as_slice().unwrap());
    let (hd, ld) = (high.ncols(), low.ncols());

    let penalty: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let order = sorted_others(h, hd, n, i);
            let mut rank = vec![0usize; n];
            for (r, &j) in order.iter().enumerate() {
                rank[j] = r + 1;
            }
            sorted_others(l, ld, n, i)[..k]
                .iter()
                .map(|&j| rank[j].saturating_sub(k) as f64)
                .sum::<f64>()
        })
        .sum();
    let (n, k) = (n as f64, k as f64);
    1.0 - 2.0 / (n * k * (2.0 * n - 3.0 * k - 1.0)) * penalty
}
