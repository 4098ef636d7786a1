#![allow(dead_code)]

use std::collections::BTreeMap;

use lpcoh_core::{Graph, Vertex};
use nalgebra::{DMatrix, DVector};
use rand::{seq::SliceRandom, Rng};

/// A random connected graph on `n` vertices: a random spanning tree plus
/// `extra` additional distinct edges. No vertex is marked as truncated.
pub fn random_connected_graph(rng: &mut impl Rng, n: usize, extra: usize) -> Graph {
    let mut order: Vec<Vertex> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = std::collections::BTreeSet::new();
    for i in 1..n {
        let j = rng.random_range(0..i);
        let (a, b) = (order[i], order[j]);
        edges.insert((a.min(b), a.max(b)));
    }
    let mut attempts = 0;
    while edges.len() < n - 1 + extra && attempts < 100 * (extra + 1) {
        attempts += 1;
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    Graph::from_edges(n, 0, &edges, None, None).unwrap()
}

/// Random boundary data on roughly `fraction` of the vertices (at least one).
pub fn random_boundary(rng: &mut impl Rng, n: usize, fraction: f64) -> BTreeMap<Vertex, f64> {
    let mut b = BTreeMap::new();
    for v in 0..n {
        if rng.random_bool(fraction) {
            b.insert(v, rng.random_range(-1.0..1.0));
        }
    }
    if b.is_empty() {
        b.insert(rng.random_range(0..n), rng.random_range(-1.0..1.0));
    }
    b
}

/// Solves the graph-Laplacian Dirichlet problem directly: every free vertex
/// equals the mean of its neighbours.
pub fn linear_harmonic_oracle(g: &Graph, boundary: &BTreeMap<Vertex, f64>) -> Vec<f64> {
    let n = g.num_vertices();
    let free: Vec<Vertex> = (0..n).filter(|v| !boundary.contains_key(v)).collect();
    let mut slot = vec![usize::MAX; n];
    for (i, &v) in free.iter().enumerate() {
        slot[v] = i;
    }
    let m = free.len();
    let mut a = DMatrix::<f64>::zeros(m, m);
    let mut rhs = DVector::<f64>::zeros(m);
    for (i, &v) in free.iter().enumerate() {
        a[(i, i)] = g.degree(v) as f64;
        for &w in g.neighbors(v) {
            match boundary.get(&w) {
                Some(&val) => rhs[i] += val,
                None => a[(i, slot[w])] -= 1.0,
            }
        }
    }
    let x = a.lu().solve(&rhs).expect("singular Laplacian block");
    let mut out = vec![0.0; n];
    for (&v, &val) in boundary {
        out[v] = val;
    }
    for (i, &v) in free.iter().enumerate() {
        out[v] = x[i];
    }
    out
}

/// An integer-valued flow with zero divergence at every vertex, built from
/// random multiples of the fundamental cycles of a BFS spanning tree.
pub fn random_circulation(rng: &mut impl Rng, g: &Graph) -> Vec<(Vertex, Vertex, f64)> {
    let n = g.num_vertices();
    let mut parent = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::from([0]);
    seen[0] = true;
    while let Some(x) = queue.pop_front() {
        for &y in g.neighbors(x) {
            if !seen[y] {
                seen[y] = true;
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }
    let path_to_root = |mut v: Vertex| {
        let mut p = vec![v];
        while parent[v] != usize::MAX {
            v = parent[v];
            p.push(v);
        }
        p
    };
    let mut flow: BTreeMap<(Vertex, Vertex), f64> = BTreeMap::new();
    let mut push = |a: Vertex, b: Vertex, w: f64| {
        if a < b {
            *flow.entry((a, b)).or_default() += w;
        } else {
            *flow.entry((b, a)).or_default() -= w;
        }
    };
    for (u, v) in g.edges() {
        if parent[v] == u || parent[u] == v {
            continue;
        }
        let w = rng.random_range(-3i32..=3) as f64;
        // cycle: u → v, then v → root → u along the tree
        push(u, v, w);
        let (pv, pu) = (path_to_root(v), path_to_root(u));
        for e in pv.windows(2) {
            push(e[0], e[1], w);
        }
        for e in pu.windows(2) {
            push(e[1], e[0], w);
        }
    }
    flow.into_iter().map(|((a, b), w)| (a, b, w)).collect()
}
