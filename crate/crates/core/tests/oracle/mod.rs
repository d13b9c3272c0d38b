//! Slow, direct reimplementations used as oracles by the acceptance suite.
//! Nothing here calls into the library's clustering or validation code.

use std::collections::{BTreeMap, HashMap, HashSet};

use ndarray::Array2;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use querytax::classifier::MetricKind;
use querytax::corpus::Label;

fn euclid(a: &[f32], b: &[f32]) -> f64 {
    let mut s = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let d = *x as f64 - *y as f64;
        s += d * d;
    }
    s.sqrt()
}

fn rows(pts: &Array2<f32>) -> Vec<Vec<f32>> {
    pts.outer_iter().map(|r| r.to_vec()).collect()
}

pub struct NaiveHdbscan {
    pub labels: Vec<i32>,
    /// Stability of each labelled cluster, by label.
    pub stability: Vec<f64>,
}

struct Cluster {
    parent: Option<usize>,
    birth: f64,
    death: f64,
    /// Points that fell out of this cluster, with their lambda.
    fell: Vec<(usize, f64)>,
    /// Points handed to child clusters.
    handed: usize,
    children: Vec<usize>,
}

fn lambda(w: f64) -> f64 {
    1.0 / w.max(1e-12)
}

/// Connected components of `members` in the graph with an edge wherever
/// `mr < level`, found by breadth-first search.
fn components(members: &[usize], mr: &[Vec<f64>], level: f64) -> Vec<Vec<usize>> {
    let inside: HashSet<usize> = members.iter().copied().collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for &s in members {
        if !seen.insert(s) {
            continue;
        }
        let mut comp = vec![s];
        let mut head = 0;
        while head < comp.len() {
            let x = comp[head];
            head += 1;
            for &y in members {
                if mr[x][y] < level && inside.contains(&y) && seen.insert(y) {
                    comp.push(y);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// HDBSCAN* by brute force: dense mutual reachability, Kruskal for the
/// candidate levels, then top-down level sets of the threshold graph.
pub fn naive_hdbscan(pts: &Array2<f32>, mcs: usize, ms: usize) -> NaiveHdbscan {
    let x = rows(pts);
    let n = x.len();
    let dist: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| euclid(&x[i], &x[j])).collect()).collect();
    let core: Vec<f64> = dist
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.sort_by(f64::total_cmp);
            r[ms - 1]
        })
        .collect();
    let mr: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| dist[i][j].max(core[i]).max(core[j])).collect())
        .collect();

    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((mr[i][j], i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut uf: Vec<usize> = (0..n).collect();
    fn root(uf: &mut Vec<usize>, mut v: usize) -> usize {
        while uf[v] != v {
            v = uf[v];
        }
        v
    }
    let mut levels = Vec::new();
    for &(w, i, j) in &pairs {
        let (a, b) = (root(&mut uf, i), root(&mut uf, j));
        if a != b {
            uf[a] = b;
            levels.push(w);
        }
    }
    levels.dedup();
    levels.reverse();

    let mut clusters = vec![Cluster {
        parent: None,
        birth: 0.0,
        death: 0.0,
        fell: Vec::new(),
        handed: 0,
        children: Vec::new(),
    }];
    // (cluster, current members, first level index still to examine)
    let mut work = vec![(0usize, (0..n).collect::<Vec<usize>>(), 0usize)];
    while let Some((c, mut members, mut li)) = work.pop() {
        loop {
            let level = levels[li];
            let l = lambda(level);
            li += 1;
            let parts = components(&members, &mr, level);
            if parts.len() == 1 {
                continue;
            }
            let (big, small): (Vec<Vec<usize>>, Vec<Vec<usize>>) = parts.into_iter().partition(|p| p.len() >= mcs);
            for p in small.iter().flatten() {
                clusters[c].fell.push((*p, l));
            }
            match big.len() {
                0 => {
                    clusters[c].death = l;
                    break;
                }
                1 => {
                    members = big.into_iter().next().unwrap();
                }
                _ => {
                    clusters[c].death = l;
                    for p in big {
                        let id = clusters.len();
                        clusters[c].handed += p.len();
                        clusters[c].children.push(id);
                        clusters.push(Cluster {
                            parent: Some(c),
                            birth: l,
                            death: l,
                            fell: Vec::new(),
                            handed: 0,
                            children: Vec::new(),
                        });
                        work.push((id, p, li));
                    }
                    break;
                }
            }
        }
    }

    let stability: Vec<f64> = clusters
        .iter()
        .map(|c| {
            let own: f64 = c.fell.iter().map(|&(_, l)| l - c.birth).sum();
            own + c.handed as f64 * (c.death - c.birth)
        })
        .collect();

    // Excess of mass, bottom-up over a recursion; the root is never chosen.
    fn choose(v: usize, clusters: &[Cluster], stab: &[f64], out: &mut Vec<usize>) -> f64 {
        let mut picked = Vec::new();
        let below: f64 = clusters[v].children.iter().map(|&c| choose(c, clusters, stab, &mut picked)).sum();
        if v != 0 && stab[v] >= below {
            out.push(v);
            stab[v]
        } else {
            out.extend(picked);
            below
        }
    }
    let mut selected = Vec::new();
    choose(0, &clusters, &stability, &mut selected);

    let mut label_of: HashMap<usize, i32> = HashMap::new();
    for (k, &v) in selected.iter().enumerate() {
        label_of.insert(v, k as i32);
    }
    let mut labels = vec![-1i32; n];
    for (v, c) in clusters.iter().enumerate() {
        let mut a = Some(v);
        let mut label = -1;
        while let Some(u) = a {
            if let Some(&l) = label_of.get(&u) {
                label = l;
                break;
            }
            a = clusters[u].parent;
        }
        for &(p, _) in &c.fell {
            labels[p] = label;
        }
    }
    NaiveHdbscan {
        labels,
        stability: selected.iter().map(|&v| stability[v]).collect(),
    }
}

/// Pairs (a, b) of co-occurring labels, failing unless they form a
/// bijection that maps noise to noise.
pub fn label_bijection(a: &[i32], b: &[i32]) -> Result<Vec<(i32, i32)>, String> {
    let mut fwd: BTreeMap<i32, i32> = BTreeMap::new();
    let mut back: BTreeMap<i32, i32> = BTreeMap::new();
    for (i, (&x, &y)) in a.iter().zip(b).enumerate() {
        if (x < 0) != (y < 0) {
            return Err(format!("point {i}: label {x} vs oracle {y}"));
        }
        if *fwd.entry(x).or_insert(y) != y || *back.entry(y).or_insert(x) != x {
            return Err(format!("point {i}: labels {x}/{y} do not correspond one-to-one"));
        }
    }
    Ok(fwd.into_iter().collect())
}

pub struct NaiveDbcv {
    pub overall: f64,
    pub per_cluster: HashMap<i32, f64>,
}

fn clamp(d: f64) -> f64 {
    d.max(1e-12)
}

/// DBCV straight from its definition. The mutual-reachability MST of each
/// cluster is grown from its first member, attaching the lowest-index vertex
/// among the cheapest and, for that vertex, the earliest-added tree vertex.
/// Ties are common (an edge weight is often just one endpoint's core
/// distance), and which nodes count as internal depends on the tree chosen.
pub fn naive_dbcv(pts: &Array2<f32>, labels: &[i32]) -> NaiveDbcv {
    let x = rows(pts);
    let n = x.len();
    let dim = pts.ncols() as i32;
    let mut groups: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        if l >= 0 {
            groups.entry(l).or_default().push(i);
        }
    }
    struct Info {
        core: Vec<f64>,
        internal: Vec<bool>,
        dsc: f64,
    }
    let mut info: BTreeMap<i32, Info> = BTreeMap::new();
    for (&id, members) in &groups {
        let m = members.len();
        if m < 2 {
            continue;
        }
        let core: Vec<f64> = members
            .iter()
            .map(|&p| {
                let s: f64 = members
                    .iter()
                    .filter(|&&q| q != p)
                    .map(|&q| (1.0 / clamp(euclid(&x[p], &x[q]))).powi(dim))
                    .sum();
                (s / (m - 1) as f64).powf(-1.0 / dim as f64)
            })
            .collect();
        let w = |a: usize, b: usize| clamp(euclid(&x[members[a]], &x[members[b]])).max(core[a]).max(core[b]);
        let mut order = vec![0usize];
        let mut edges = Vec::new();
        while order.len() < m {
            let mut best: Option<(f64, usize, usize)> = None;
            for v in 0..m {
                if order.contains(&v) {
                    continue;
                }
                let mut attach: Option<(f64, usize)> = None;
                for &t in &order {
                    let c = w(t, v);
                    if attach.is_none_or(|a| c < a.0) {
                        attach = Some((c, t));
                    }
                }
                let (c, t) = attach.unwrap();
                if best.is_none_or(|b| c < b.0) {
                    best = Some((c, t, v));
                }
            }
            let (c, t, v) = best.unwrap();
            edges.push((t, v, c));
            order.push(v);
        }
        let mut degree = vec![0; m];
        for &(a, b, _) in &edges {
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut internal: Vec<bool> = degree.iter().map(|&d| d >= 2).collect();
        let inner: Vec<f64> = edges
            .iter()
            .filter(|e| internal[e.0] && internal[e.1])
            .map(|e| e.2)
            .collect();
        let dsc = if inner.is_empty() {
            edges.iter().map(|e| e.2).fold(0.0, f64::max)
        } else {
            inner.into_iter().fold(0.0, f64::max)
        };
        if !internal.contains(&true) {
            internal = vec![true; m];
        }
        info.insert(id, Info { core, internal, dsc });
    }

    let mut per_cluster = HashMap::new();
    let mut overall = 0.0;
    for (&id, members) in &groups {
        let Some(me) = info.get(&id) else {
            per_cluster.insert(id, 0.0);
            continue;
        };
        let mut sep = f64::INFINITY;
        for (&other, theirs) in &groups {
            let Some(them) = info.get(&other) else { continue };
            if other == id {
                continue;
            }
            for (a, &p) in members.iter().enumerate() {
                for (b, &q) in theirs.iter().enumerate() {
                    if me.internal[a] && them.internal[b] {
                        let d = clamp(euclid(&x[p], &x[q])).max(me.core[a]).max(them.core[b]);
                        sep = sep.min(d);
                    }
                }
            }
        }
        let v = (sep - me.dsc) / sep.max(me.dsc);
        per_cluster.insert(id, v);
        overall += v * members.len() as f64 / n as f64;
    }
    NaiveDbcv { overall, per_cluster }
}

/// Whether no chosen node is an ancestor of another.
pub fn is_antichain(parents: &[Option<usize>], chosen: &[usize]) -> bool {
    chosen.iter().all(|&v| {
        let mut a = parents[v];
        while let Some(u) = a {
            if chosen.contains(&u) {
                return false;
            }
            a = parents[u];
        }
        true
    })
}

/// Best total stability over every antichain of non-root nodes.
pub fn best_antichain(parents: &[Option<usize>], stability: &[f64]) -> f64 {
    let m = parents.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << m) {
        if mask & 1 == 1 {
            continue;
        }
        let chosen: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).collect();
        if is_antichain(parents, &chosen) {
            best = best.max(chosen.iter().map(|&i| stability[i]).sum());
        }
    }
    best
}

/// Percentile bootstrap with its own generator, metric formulas and
/// linear-interpolation quantiles.
pub fn bootstrap_reference(
    pred: &[Label],
    gold: &[Label],
    resamples: usize,
    level: f64,
    seed: u64,
) -> HashMap<MetricKind, (f64, f64)> {
    let n = pred.len();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut values: HashMap<MetricKind, Vec<f64>> = HashMap::new();
    for _ in 0..resamples {
        let (mut tp, mut fp, mut fn_, mut tn) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let i = rng.random_range(0..n);
            match (pred[i].is_positive(), gold[i].is_positive()) {
                (true, true) => tp += 1.0,
                (true, false) => fp += 1.0,
                (false, true) => fn_ += 1.0,
                (false, false) => tn += 1.0,
            }
        }
        let precision = tp / (tp + fp);
        let recall = tp / (tp + fn_);
        for (k, v) in [
            (MetricKind::Accuracy, (tp + tn) / n as f64),
            (MetricKind::Precision, precision),
            (MetricKind::Recall, recall),
            (MetricKind::F1, 2.0 * precision * recall / (precision + recall)),
        ] {
            if v.is_finite() {
                values.entry(k).or_default().push(v);
            }
        }
    }
    let q = |sorted: &[f64], p: f64| {
        let h = p * (sorted.len() - 1) as f64;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(sorted.len() - 1);
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    };
    let tail = (1.0 - level) / 2.0;
    values
        .into_iter()
        .map(|(k, mut v)| {
            v.sort_by(f64::total_cmp);
            (k, (q(&v, tail), q(&v, 1.0 - tail)))
        })
        .collect()
}

/// Cohen's kappa from the agreement table written out cell by cell.
pub fn kappa_by_hand(a: &[u8], b: &[u8]) -> f64 {
    let cats: Vec<u8> = {
        let mut c: Vec<u8> = a.iter().chain(b).copied().collect();
        c.sort_unstable();
        c.dedup();
        c
    };
    let n = a.len() as f64;
    let mut table = vec![vec![0.0; cats.len()]; cats.len()];
    for (x, y) in a.iter().zip(b) {
        let i = cats.iter().position(|c| c == x).unwrap();
        let j = cats.iter().position(|c| c == y).unwrap();
        table[i][j] += 1.0;
    }
    let observed: f64 = (0..cats.len()).map(|i| table[i][i]).sum::<f64>() / n;
    let expected: f64 = (0..cats.len())
        .map(|i| {
            let row: f64 = table[i].iter().sum();
            let col: f64 = table.iter().map(|r| r[i]).sum();
            row * col
        })
        .sum::<f64>()
        / (n * n);
    (observed - expected) / (1.0 - expected)
}
