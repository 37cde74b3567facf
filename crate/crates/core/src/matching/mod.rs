//! Exact matching: minimum-weight perfect matching, minimum-weight matching
//! with abstention weights (via graph doubling), and the nearest-neighbour
//! sparsifier that splits a problem into independent components.

mod blossom;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this size the exact subset DP gives way to the blossom solver.
pub const DP_LIMIT: usize = 12;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchGraph {
    /// Abstention weight `W_j` of every vertex.
    pub vertex_weights: Vec<f64>,
    /// `(j, k, W_jk)` with `j != k`.
    pub edges: Vec<(usize, usize, f64)>,
}

impl MatchGraph {
    pub fn new(vertex_weights: Vec<f64>) -> Self {
        Self { vertex_weights, edges: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.vertex_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_weights.is_empty()
    }

    pub fn add_edge(&mut self, j: usize, k: usize, w: f64) {
        debug_assert!(j != k);
        self.edges.push((j, k, w));
    }

    fn edge_map(&self) -> HashMap<(usize, usize), f64> {
        let mut m = HashMap::with_capacity(self.edges.len());
        for &(j, k, w) in &self.edges {
            let key = (j.min(k), j.max(k));
            let e = m.entry(key).or_insert(w);
            if w < *e {
                *e = w;
            }
        }
        m
    }

    fn dense(&self) -> Vec<Vec<Option<f64>>> {
        let n = self.len();
        let mut a = vec![vec![None; n]; n];
        for (&(j, k), &w) in &self.edge_map() {
            a[j][k] = Some(w);
            a[k][j] = Some(w);
        }
        a
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    /// Pairs with `j < k`, sorted.
    pub pairs: Vec<(usize, usize)>,
    /// Unpaired vertices, sorted.
    pub abstainers: Vec<usize>,
}

impl Matching {
    fn normalized(mut pairs: Vec<(usize, usize)>, mut abstainers: Vec<usize>) -> Self {
        for p in pairs.iter_mut() {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        pairs.sort_unstable();
        abstainers.sort_unstable();
        Self { pairs, abstainers }
    }

    /// Sum of pair weights (in pair order) plus abstention weights (in vertex
    /// order). Panics if a pair is not an edge of `g`.
    pub fn total_weight(&self, g: &MatchGraph) -> f64 {
        let m = g.edge_map();
        let mut t = 0.0;
        for p in &self.pairs {
            t += m[p];
        }
        for &a in &self.abstainers {
            t += g.vertex_weights[a];
        }
        t
    }

    /// Pairs and abstainers partition `0..n` and every pair is an edge.
    pub fn is_valid(&self, g: &MatchGraph) -> bool {
        let m = g.edge_map();
        let mut seen = vec![false; g.len()];
        let mut mark = |v: usize| v < seen.len() && !std::mem::replace(&mut seen[v], true);
        for &(j, k) in &self.pairs {
            if !m.contains_key(&(j, k)) || !mark(j) || !mark(k) {
                return false;
            }
        }
        for &a in &self.abstainers {
            if !mark(a) {
                return false;
            }
        }
        seen.iter().all(|&s| s)
    }
}

/// Subset DP: at each step the lowest uncovered vertex abstains (if allowed)
/// or pairs with a higher vertex. Strict comparisons keep the first optimum
/// in the order abstain, partner 0, partner 1, ...
fn dp_solve(adj: &[Vec<Option<f64>>], abstain: Option<&[f64]>) -> Option<Vec<Option<usize>>> {
    let n = adj.len();
    let full = (1usize << n) - 1;
    let mut best = vec![f64::INFINITY; 1 << n];
    let mut choice = vec![usize::MAX; 1 << n];
    best[full] = 0.0;
    for mask in (0..full).rev() {
        let i = (!mask).trailing_zeros() as usize;
        let mi = mask | (1 << i);
        if let Some(w) = abstain {
            let c = w[i] + best[mi];
            if c < best[mask] {
                best[mask] = c;
                choice[mask] = i;
            }
        }
        for j in i + 1..n {
            if mi & (1 << j) != 0 {
                continue;
            }
            if let Some(w) = adj[i][j] {
                let c = w + best[mi | (1 << j)];
                if c < best[mask] {
                    best[mask] = c;
                    choice[mask] = j;
                }
            }
        }
    }
    if !best[0].is_finite() {
        return None;
    }
    let mut mate = vec![None; n];
    let mut mask = 0usize;
    while mask != full {
        let i = (!mask).trailing_zeros() as usize;
        let j = choice[mask];
        if j != i {
            mate[i] = Some(j);
            mate[j] = Some(i);
            mask |= 1 << j;
        }
        mask |= 1 << i;
    }
    Some(mate)
}

/// Maximum-weight solve of a minimisation problem: weights become
/// `C - w`, scaled onto a 2^40 integer grid.
fn blossom_min_perfect(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Option<usize>> {
    let m = edges.iter().map(|e| e.2.abs()).fold(0.0f64, f64::max);
    let c = m + 1.0;
    let scale = (1u64 << 40) as f64 / (2.0 * m + 1.0);
    let ie = edges
        .iter()
        .map(|&(j, k, w)| (j, k, 2 * ((c - w) * scale).round() as i64))
        .collect();
    blossom::max_weight_matching(n, ie, true)
}

fn mates_to_matching(mate: &[Option<usize>]) -> Matching {
    let mut pairs = Vec::new();
    let mut abst = Vec::new();
    for (v, m) in mate.iter().enumerate() {
        match m {
            Some(u) if *u > v => pairs.push((v, *u)),
            Some(_) => {}
            None => abst.push(v),
        }
    }
    Matching::normalized(pairs, abst)
}

/// Minimum-weight perfect matching on `n` vertices.
pub fn mwpm(n: usize, edges: &[(usize, usize, f64)]) -> Result<Vec<(usize, usize)>> {
    if n % 2 == 1 {
        return Err(Error::OddVertexCount(n));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let g = MatchGraph { vertex_weights: vec![0.0; n], edges: edges.to_vec() };
    let mate = if n <= DP_LIMIT {
        dp_solve(&g.dense(), None).ok_or(Error::NoPerfectMatching)?
    } else {
        let simple: Vec<_> = g.edge_map().into_iter().map(|((j, k), w)| (j, k, w)).collect();
        let mut simple = simple;
        simple.sort_by_key(|a| (a.0, a.1));
        blossom_min_perfect(n, &simple)
    };
    let m = mates_to_matching(&mate);
    if !m.abstainers.is_empty() {
        return Err(Error::NoPerfectMatching);
    }
    Ok(m.pairs)
}

/// Minimum-weight matching where unpaired vertices pay their vertex weight.
pub fn mwm(g: &MatchGraph) -> Matching {
    if g.len() <= DP_LIMIT {
        let mate = dp_solve(&g.dense(), Some(&g.vertex_weights)).expect("abstention always feasible");
        mates_to_matching(&mate)
    } else {
        mwm_doubled(g)
    }
}

/// The doubled graph `G'`: duplicates `j' = n + j`, edges `jk` and `j'k'`
/// (weight 0) and `jj'` carrying the vertex weight.
pub fn doubled_graph(g: &MatchGraph) -> (usize, Vec<(usize, usize, f64)>) {
    let n = g.len();
    let mut edges = Vec::with_capacity(2 * g.edges.len() + n);
    for (&(j, k), &w) in &g.edge_map() {
        edges.push((j, k, w));
        edges.push((n + j, n + k, 0.0));
    }
    for (j, &w) in g.vertex_weights.iter().enumerate() {
        edges.push((j, n + j, w));
    }
    edges.sort_by_key(|a| (a.0, a.1));
    (2 * n, edges)
}

/// [`mwm`] through the doubling reduction regardless of size.
pub fn mwm_doubled(g: &MatchGraph) -> Matching {
    let n = g.len();
    if n == 0 {
        return Matching::default();
    }
    let (n2, edges) = doubled_graph(g);
    let pairs = mwpm(n2, &edges).expect("doubled graph always has a perfect matching");
    let mut out = Vec::new();
    let mut abst = Vec::new();
    for (j, k) in pairs {
        if j < n && k < n {
            out.push((j, k));
        } else if j < n && k == j + n {
            abst.push(j);
        }
    }
    Matching::normalized(out, abst)
}

/// Connected components of an undirected graph, each sorted, ordered by
/// smallest member.
pub fn components(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(n);
    for (a, b) in edges {
        uf.union(a, b);
    }
    let mut idx = vec![usize::MAX; n];
    let mut out: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let r = uf.find(v);
        if idx[r] == usize::MAX {
            idx[r] = out.len();
            out.push(Vec::new());
        }
        out[idx[r]].push(v);
    }
    out
}

/// Keeps edge `jk` iff `W_jk < W_j + W_k` and splits into components.
/// Each entry is the component's vertex list and its local subgraph.
pub fn sparsify(g: &MatchGraph) -> Vec<(Vec<usize>, MatchGraph)> {
    let kept: Vec<_> = g
        .edges
        .iter()
        .copied()
        .filter(|&(j, k, w)| w < g.vertex_weights[j] + g.vertex_weights[k])
        .collect();
    let comps = components(g.len(), kept.iter().map(|e| (e.0, e.1)));
    let mut local = vec![0usize; g.len()];
    let mut which = vec![0usize; g.len()];
    let mut out: Vec<(Vec<usize>, MatchGraph)> = comps
        .into_iter()
        .enumerate()
        .map(|(ci, c)| {
            for (i, &v) in c.iter().enumerate() {
                local[v] = i;
                which[v] = ci;
            }
            let w = c.iter().map(|&v| g.vertex_weights[v]).collect();
            (c, MatchGraph::new(w))
        })
        .collect();
    for (j, k, w) in kept {
        out[which[j]].1.add_edge(local[j], local[k], w);
    }
    out
}

/// Sparsify, then solve each component independently.
pub fn mwm_sparse(g: &MatchGraph) -> Matching {
    let mut pairs = Vec::new();
    let mut abst = Vec::new();
    for (verts, sub) in sparsify(g) {
        if verts.len() == 1 {
            abst.push(verts[0]);
            continue;
        }
        let m = mwm(&sub);
        pairs.extend(m.pairs.iter().map(|&(a, b)| (verts[a], verts[b])));
        abst.extend(m.abstainers.iter().map(|&a| verts[a]));
    }
    Matching::normalized(pairs, abst)
}

/// Pairs `jk` with `d_jk < d_j + d_k`, `d_j` the nearest-neighbour
/// distance of `j`.
pub fn sparse_distance_edges(n: usize, dist: impl Fn(usize, usize) -> u64) -> Vec<(usize, usize)> {
    let nn: Vec<u64> = (0..n).map(|j| (0..n).filter(|&k| k != j).map(|k| dist(j, k)).min().unwrap_or(u64::MAX)).collect();
    let mut edges = Vec::new();
    for j in 0..n {
        for k in j + 1..n {
            if (dist(j, k) as u128) < nn[j] as u128 + nn[k] as u128 {
                edges.push((j, k));
            }
        }
    }
    edges
}

/// Components of the graph kept by [`sparse_distance_edges`].
pub fn sparsify_distances(n: usize, dist: impl Fn(usize, usize) -> u64) -> Vec<Vec<usize>> {
    components(n, sparse_distance_edges(n, dist))
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}
