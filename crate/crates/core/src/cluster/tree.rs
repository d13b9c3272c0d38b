//! Condensed cluster tree and Excess-of-Mass selection.
//!
//! The single-linkage hierarchy is built from the MST with edges of equal
//! weight merged in one step, so a level can split a cluster into more than
//! two parts. This makes the tree a function of the mutual-reachability
//! distances alone, independent of which of several tied spanning trees
//! Prim happened to return.

use serde::{Deserialize, Serialize};

use super::mst::MstEdge;
use super::ClusterLabels;

/// Smallest distance used when converting to `lambda = 1 / distance`.
pub const MIN_DISTANCE: f64 = 1e-12;

pub fn lambda_of(distance: f64) -> f64 {
    1.0 / distance.max(MIN_DISTANCE)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub lambda_birth: f64,
    pub lambda_death: f64,
    pub stability: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensedTree {
    /// Node 0 is the root; children always have larger ids than parents.
    pub nodes: Vec<TreeNode>,
    /// Cluster each point last belonged to before falling out.
    pub point_cluster: Vec<usize>,
    /// Lambda at which each point fell out of `point_cluster`.
    pub point_lambda: Vec<f64>,
}

struct Dendrogram {
    children: Vec<Vec<usize>>,
    height: Vec<f64>,
    size: Vec<usize>,
    root: usize,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn dendrogram(n: usize, mst: &[MstEdge]) -> Dendrogram {
    let mut edges = mst.to_vec();
    edges.sort_by(|x, y| {
        x.weight
            .total_cmp(&y.weight)
            .then(x.a.cmp(&y.a))
            .then(x.b.cmp(&y.b))
    });
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut height = vec![0.0; n];
    let mut size = vec![1usize; n];
    let mut group_of = vec![usize::MAX; n];
    let mut uf: Vec<usize> = (0..n).collect();
    let mut node_of: Vec<usize> = (0..n).collect();
    let mut root = 0;

    let mut group = 0;
    let mut start = 0;
    while start < edges.len() {
        let w = edges[start].weight;
        let mut end = start;
        while end < edges.len() && edges[end].weight == w {
            end += 1;
        }
        for e in &edges[start..end] {
            let ra = find(&mut uf, e.a as usize);
            let rb = find(&mut uf, e.b as usize);
            debug_assert_ne!(ra, rb, "spanning tree has a cycle");
            let (na, nb) = (node_of[ra], node_of[rb]);
            let merged = match (group_of[na] == group, group_of[nb] == group) {
                (true, true) => {
                    let moved = std::mem::take(&mut children[nb]);
                    children[na].extend(moved);
                    size[na] += size[nb];
                    na
                }
                (true, false) => {
                    children[na].push(nb);
                    size[na] += size[nb];
                    na
                }
                (false, true) => {
                    children[nb].push(na);
                    size[nb] += size[na];
                    nb
                }
                (false, false) => {
                    children.push(vec![na, nb]);
                    height.push(w);
                    size.push(size[na] + size[nb]);
                    group_of.push(group);
                    children.len() - 1
                }
            };
            uf[ra] = rb;
            node_of[rb] = merged;
            root = merged;
        }
        group += 1;
        start = end;
    }
    Dendrogram {
        children,
        height,
        size,
        root,
    }
}

fn leaves_under(d: &Dendrogram, node: usize, n: usize, out: &mut Vec<usize>) {
    let mut stack = vec![node];
    while let Some(x) = stack.pop() {
        if x < n {
            out.push(x);
        } else {
            stack.extend(d.children[x].iter().copied());
        }
    }
}

/// Condenses the single-linkage hierarchy of `mst` over `n` points: a level
/// where two or more parts have at least `min_cluster_size` points gives
/// birth to one child cluster per such part; smaller parts fall out as
/// points of the cluster being split.
pub fn condense(n: usize, mst: &[MstEdge], min_cluster_size: usize) -> CondensedTree {
    assert!(n >= 1 && mst.len() + 1 == n, "need a spanning tree over n points");
    let mut nodes = vec![TreeNode {
        id: 0,
        parent: None,
        lambda_birth: 0.0,
        lambda_death: 0.0,
        stability: 0.0,
        size: n,
    }];
    let mut point_cluster = vec![0usize; n];
    let mut point_lambda = vec![0.0f64; n];
    if n == 1 {
        return CondensedTree {
            nodes,
            point_cluster,
            point_lambda,
        };
    }
    let d = dendrogram(n, mst);
    let mut fallen = Vec::new();
    let mut stack = vec![(d.root, 0usize)];
    while let Some((node, cluster)) = stack.pop() {
        let lambda = lambda_of(d.height[node]);
        let parts = &d.children[node];
        let big: Vec<usize> = parts
            .iter()
            .copied()
            .filter(|&c| d.size[c] >= min_cluster_size)
            .collect();
        let mut fall = |part: usize| {
            fallen.clear();
            leaves_under(&d, part, n, &mut fallen);
            for &p in &fallen {
                point_cluster[p] = cluster;
                point_lambda[p] = lambda;
            }
        };
        match big.len() {
            0 => {
                parts.iter().for_each(|&c| fall(c));
                nodes[cluster].lambda_death = lambda;
            }
            1 => {
                parts.iter().filter(|&&c| c != big[0]).for_each(|&c| fall(c));
                stack.push((big[0], cluster));
            }
            _ => {
                parts
                    .iter()
                    .filter(|&&c| d.size[c] < min_cluster_size)
                    .for_each(|&c| fall(c));
                nodes[cluster].lambda_death = lambda;
                // Reverse push so children are numbered in part order.
                let mut born = Vec::new();
                for &c in &big {
                    let id = nodes.len();
                    nodes.push(TreeNode {
                        id,
                        parent: Some(cluster),
                        lambda_birth: lambda,
                        lambda_death: lambda,
                        stability: 0.0,
                        size: d.size[c],
                    });
                    born.push((c, id));
                }
                stack.extend(born.into_iter().rev());
            }
        }
    }

    // A leaf cluster's points all fall out; its death is the last of them.
    for p in 0..n {
        let c = point_cluster[p];
        if point_lambda[p] > nodes[c].lambda_death {
            nodes[c].lambda_death = point_lambda[p];
        }
    }
    let mut stability: Vec<f64> = vec![0.0; nodes.len()];
    for p in 0..n {
        let c = point_cluster[p];
        stability[c] += point_lambda[p] - nodes[c].lambda_birth;
    }
    for i in 1..nodes.len() {
        let parent = nodes[i].parent.expect("non-root");
        stability[parent] +=
            nodes[i].size as f64 * (nodes[parent].lambda_death - nodes[parent].lambda_birth);
    }
    for (node, s) in nodes.iter_mut().zip(stability) {
        node.stability = s;
    }
    CondensedTree {
        nodes,
        point_cluster,
        point_lambda,
    }
}

/// Excess-of-Mass selection over a forest given by `parents` (each parent
/// id smaller than its child's). A node is kept unless its descendants'
/// best selection has strictly larger summed stability. Nodes in `exclude`
/// are never selected. Returns selected ids ascending.
pub fn eom_select(parents: &[Option<usize>], stability: &[f64], exclude: &[usize]) -> Vec<usize> {
    let m = parents.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, p) in parents.iter().enumerate() {
        if let Some(p) = *p {
            assert!(p < i, "parents must precede children");
            children[p].push(i);
        }
    }
    let mut best = stability.to_vec();
    let mut selected = vec![false; m];
    for node in (0..m).rev() {
        let subtree: f64 = children[node].iter().map(|&c| best[c]).sum();
        if exclude.contains(&node) || subtree > stability[node] {
            best[node] = subtree;
        } else {
            selected[node] = true;
            let mut stack = children[node].clone();
            while let Some(x) = stack.pop() {
                selected[x] = false;
                stack.extend(children[x].iter().copied());
            }
        }
    }
    (0..m).filter(|&i| selected[i]).collect()
}

impl CondensedTree {
    pub fn parents(&self) -> Vec<Option<usize>> {
        self.nodes.iter().map(|n| n.parent).collect()
    }

    pub fn stabilities(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.stability).collect()
    }

    /// EoM over all clusters except the root.
    pub fn eom_select(&self) -> Vec<usize> {
        eom_select(&self.parents(), &self.stabilities(), &[0])
    }

    /// Each point takes the label of its nearest selected ancestor (itself
    /// included) or -1. Labels are numbered by decreasing size, then
    /// ascending lambda_birth.
    pub fn label_points(&self, selected: &[usize]) -> ClusterLabels {
        let mut order = selected.to_vec();
        order.sort_by(|&x, &y| {
            let (a, b) = (&self.nodes[x], &self.nodes[y]);
            b.size
                .cmp(&a.size)
                .then(a.lambda_birth.total_cmp(&b.lambda_birth))
                .then(x.cmp(&y))
        });
        let mut label_of = vec![-1i32; self.nodes.len()];
        for (rank, &node) in order.iter().enumerate() {
            label_of[node] = rank as i32;
        }
        // Parents precede children, so one forward pass propagates labels.
        for i in 0..self.nodes.len() {
            if label_of[i] < 0 {
                if let Some(p) = self.nodes[i].parent {
                    label_of[i] = label_of[p];
                }
            }
        }
        let labels: Vec<i32> = self.point_cluster.iter().map(|&c| label_of[c]).collect();
        let mut sizes = vec![0usize; order.len()];
        for &l in &labels {
            if l >= 0 {
                sizes[l as usize] += 1;
            }
        }
        ClusterLabels {
            labels,
            sizes,
            stability: order.iter().map(|&c| self.nodes[c].stability).collect(),
        }
    }
}

/// EoM selection followed by point labelling.
pub fn select_eom(tree: &CondensedTree) -> ClusterLabels {
    tree.label_points(&tree.eom_select())
}
