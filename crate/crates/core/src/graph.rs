//! Immutable bounded-degree graphs in compressed sparse row form.
//!
//! A [`Graph`] carries a base vertex `o`, the word length `|x| = d(o, x)` of
//! every vertex, and optionally an interior radius `R`: every vertex with
//! `|x| < R` has its complete neighbourhood present. Graphs without an
//! interior radius are complete finite graphs with nothing missing.

use alloc::{collections::BTreeMap, collections::VecDeque, format, vec, vec::Vec};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub type Vertex = usize;

/// Marker for unreachable vertices in BFS distance rows.
pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<Vertex>,
    /// `reverse[k]` is the arc index of `(y, x)` when arc `k` is `(x, y)`.
    reverse: Vec<usize>,
    base: Vertex,
    word_length: Vec<u32>,
    interior_radius: Option<u32>,
}

impl Graph {
    /// Builds a graph from an undirected edge list.
    ///
    /// Neighbour lists keep the order in which edges are listed. When
    /// `word_length` is `None` it is computed by BFS from `base`, which
    /// requires the graph to be connected.
    pub fn from_edges(
        num_vertices: usize,
        base: Vertex,
        edges: &[(Vertex, Vertex)],
        word_length: Option<Vec<u32>>,
        interior_radius: Option<u32>,
    ) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::EmptyGraph);
        }
        if base >= num_vertices {
            return Err(Error::VertexOutOfRange(base));
        }
        let mut degree = vec![0usize; num_vertices];
        for &(u, v) in edges {
            if u >= num_vertices {
                return Err(Error::VertexOutOfRange(u));
            }
            if v >= num_vertices {
                return Err(Error::VertexOutOfRange(v));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(num_vertices + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..num_vertices].to_vec();
        let mut targets = vec![0; offsets[num_vertices]];
        let mut reverse = vec![0; offsets[num_vertices]];
        for &(u, v) in edges {
            let (ku, kv) = (fill[u], fill[v]);
            targets[ku] = v;
            targets[kv] = u;
            reverse[ku] = kv;
            reverse[kv] = ku;
            fill[u] += 1;
            fill[v] += 1;
        }
        for x in 0..num_vertices {
            let mut ns = targets[offsets[x]..offsets[x + 1]].to_vec();
            ns.sort_unstable();
            if ns.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!("duplicate edge at vertex {x}")));
            }
        }
        let mut graph = Graph { offsets, targets, reverse, base, word_length: Vec::new(), interior_radius };
        graph.word_length = match word_length {
            Some(wl) => {
                if wl.len() != num_vertices {
                    return Err(Error::ShapeMismatch { expected: num_vertices, actual: wl.len() });
                }
                wl
            }
            None => {
                let d = graph.distances_from(base);
                if d.contains(&UNREACHABLE) {
                    return Err(Error::Disconnected);
                }
                d
            }
        };
        graph.check_word_length()?;
        Ok(graph)
    }

    fn check_word_length(&self) -> Result<()> {
        if self.word_length[self.base] != 0 {
            return Err(Error::InvalidGraph("word length of the base vertex is not 0".into()));
        }
        for (x, y, _) in self.arcs() {
            if self.word_length[x].abs_diff(self.word_length[y]) > 1 {
                return Err(Error::InvalidGraph(format!(
                    "word lengths of adjacent vertices {x} and {y} differ by more than 1"
                )));
            }
        }
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of ordered adjacent pairs (twice the edge count).
    pub fn num_arcs(&self) -> usize {
        self.targets.len()
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn base(&self) -> Vertex {
        self.base
    }

    pub fn neighbors(&self, x: Vertex) -> &[Vertex] {
        &self.targets[self.offsets[x]..self.offsets[x + 1]]
    }

    pub fn degree(&self, x: Vertex) -> usize {
        self.offsets[x + 1] - self.offsets[x]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_vertices()).map(|x| self.degree(x)).max().unwrap_or(0)
    }

    /// Arc indices `k` with `arc_target(k)` ranging over the neighbours of `x`.
    pub fn arc_range(&self, x: Vertex) -> core::ops::Range<usize> {
        self.offsets[x]..self.offsets[x + 1]
    }

    pub fn arc_target(&self, k: usize) -> Vertex {
        self.targets[k]
    }

    pub fn reverse_arc(&self, k: usize) -> usize {
        self.reverse[k]
    }

    /// Arc index of `(x, y)`, if adjacent.
    pub fn arc(&self, x: Vertex, y: Vertex) -> Option<usize> {
        self.arc_range(x).find(|&k| self.targets[k] == y)
    }

    /// Iterates over ordered adjacent pairs `(x, y, arc index)`.
    pub fn arcs(&self) -> impl Iterator<Item = (Vertex, Vertex, usize)> + '_ {
        (0..self.num_vertices()).flat_map(move |x| self.arc_range(x).map(move |k| (x, self.targets[k], k)))
    }

    /// Undirected edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out: Vec<_> = self.arcs().filter(|&(x, y, _)| x < y).map(|(x, y, _)| (x, y)).collect();
        out.sort_unstable();
        out
    }

    pub fn word_length(&self, x: Vertex) -> u32 {
        self.word_length[x]
    }

    pub fn word_lengths(&self) -> &[u32] {
        &self.word_length
    }

    pub fn interior_radius(&self) -> Option<u32> {
        self.interior_radius
    }

    /// Whether the full neighbourhood of `x` is present.
    pub fn is_interior(&self, x: Vertex) -> bool {
        match self.interior_radius {
            None => true,
            Some(r) => self.word_length[x] < r,
        }
    }

    fn check_vertex(&self, x: Vertex) -> Result<()> {
        if x < self.num_vertices() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange(x))
        }
    }

    /// Unweighted BFS distances from `source`; [`UNREACHABLE`] marks vertices
    /// in other components.
    pub fn distances_from(&self, source: Vertex) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.num_vertices()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x];
            for &y in self.neighbors(x) {
                if dist[y] == UNREACHABLE {
                    dist[y] = dx + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Gromov product `(x|y) = ½(|x| + |y| − d(x, y))` based at the base vertex.
    ///
    /// Both vertices must be interior, and the in-ball distance must be short
    /// enough that no path through missing vertices could beat it.
    pub fn gromov_product(&self, x: Vertex, y: Vertex) -> Result<f64> {
        self.check_vertex(x)?;
        self.check_vertex(y)?;
        let row = self.distances_from(x);
        self.gromov_product_from_row(x, &row, y)
    }

    /// Same as [`Graph::gromov_product`] with a precomputed BFS row from `x`.
    pub fn gromov_product_from_row(&self, x: Vertex, row: &[u32], y: Vertex) -> Result<f64> {
        self.check_vertex(y)?;
        for v in [x, y] {
            if !self.is_interior(v) {
                return Err(Error::NotInterior(v));
            }
        }
        let d = row[y];
        if d == UNREACHABLE {
            return Err(Error::Disconnected);
        }
        let (lx, ly) = (self.word_length[x], self.word_length[y]);
        if let Some(r) = self.interior_radius {
            // any path through a missing vertex z has |z| = r + 1 somewhere
            let detour = (r + 1 - lx) + (r + 1 - ly);
            if d > detour {
                return Err(Error::DistanceNotCertified { x, y });
            }
        }
        Ok(0.5 * (lx as f64 + ly as f64 - d as f64))
    }
}

/// Four-point defect of a quadruple from its six pairwise distances:
/// half the gap between the two largest of the three pair sums.
pub fn four_point_defect(dxy: u32, dzw: u32, dxz: u32, dyw: u32, dxw: u32, dyz: u32) -> f64 {
    let mut sums = [dxy as u64 + dzw as u64, dxz as u64 + dyw as u64, dxw as u64 + dyz as u64];
    sums.sort_unstable();
    (sums[2] - sums[1]) as f64 / 2.0
}

const ROW_CACHE_LIMIT: usize = 4096;

/// Largest four-point defect over `samples` uniformly drawn quadruples, using
/// the graph's own metric. Deterministic for a fixed seed.
pub fn estimate_hyperbolicity(g: &Graph, samples: usize, seed: u64) -> Result<f64> {
    let n = g.num_vertices();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    if n == 1 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache: BTreeMap<Vertex, Vec<u32>> = BTreeMap::new();
    let cache_rows = n <= ROW_CACHE_LIMIT;
    let mut delta = 0.0f64;
    for _ in 0..samples {
        let q: [Vertex; 4] =
            [rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n)];
        let mut rows: [Option<Vec<u32>>; 3] = [None, None, None];
        for (slot, &v) in rows.iter_mut().zip(&q[..3]) {
            let row = if cache_rows {
                cache.entry(v).or_insert_with(|| g.distances_from(v)).clone()
            } else {
                g.distances_from(v)
            };
            *slot = Some(row);
        }
        let [rx, ry, rz] = rows.map(|r| r.unwrap());
        let [_, y, z, w] = q;
        let ds = [rx[y], rz[w], rx[z], ry[w], rx[w], ry[z]];
        if ds.contains(&UNREACHABLE) {
            return Err(Error::Disconnected);
        }
        delta = delta.max(four_point_defect(ds[0], ds[1], ds[2], ds[3], ds[4], ds[5]));
    }
    Ok(delta)
}
