//! Non-vanishing certificates on balls of the 3-regular tree.
//!
//! Vertices are numbered breadth-first from the root `o = 0`; the root has
//! children 1, 2, 3 and every other non-leaf vertex has two children, listed
//! in index order. Leaves sit at depth `D` and stand in for the ends of the
//! tree. The distinguished edge is `e = (x₁, x₂) = (0, 3)`: `T₂` is the
//! subtree below vertex 3, `T₁` is everything else.
//!
//! Vertices at depth `D − 1` and `D` are treated as the boundary of the ball,
//! since the unit flow has its sources there on the `T₁` side.

use alloc::{format, vec, vec::Vec};

use crate::{
    dirichlet::{self, EdgeChain, VertexFunction},
    graph::Graph,
    math,
    sum::ExactSum,
    Error, Result, Vertex,
};

const NO_PARENT: Vertex = usize::MAX;

#[derive(Debug, Clone)]
pub struct TreeBall {
    pub graph: Graph,
    pub depth: u32,
    parent: Vec<Vertex>,
    first_child: Vec<Vertex>,
    far_side: Vec<bool>,
    first_leaf: Vertex,
}

/// Number of vertices of the depth-`d` ball: `1 + 3(2^d − 1)`.
pub fn tree_ball_size(d: u32) -> u128 {
    1 + 3 * ((1u128 << d) - 1)
}

impl TreeBall {
    pub fn x1(&self) -> Vertex {
        0
    }

    pub fn x2(&self) -> Vertex {
        3
    }

    pub fn num_vertices(&self) -> usize {
        self.parent.len()
    }

    pub fn vertex_depth(&self, v: Vertex) -> u32 {
        self.graph.word_length(v)
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        (self.parent[v] != NO_PARENT).then_some(self.parent[v])
    }

    /// Children in index order; empty for leaves.
    pub fn children(&self, v: Vertex) -> core::ops::Range<Vertex> {
        if self.first_child[v] == NO_PARENT {
            return 0..0;
        }
        let count = if v == 0 { 3 } else { 2 };
        self.first_child[v]..self.first_child[v] + count
    }

    /// Whether `v` lies in `T₂`.
    pub fn in_far_side(&self, v: Vertex) -> bool {
        self.far_side[v]
    }

    /// Leaves in lexicographic order of their root paths.
    pub fn leaves(&self) -> core::ops::Range<Vertex> {
        self.first_leaf..self.num_vertices()
    }

    pub fn num_leaves(&self) -> usize {
        self.num_vertices() - self.first_leaf
    }

    /// Position of a leaf in [`TreeBall::leaves`].
    pub fn leaf_index(&self, v: Vertex) -> Option<usize> {
        (v >= self.first_leaf && v < self.num_vertices()).then(|| v - self.first_leaf)
    }

    /// The leaf reached from `v` by always descending to the first child.
    pub fn first_descendant_leaf(&self, mut v: Vertex) -> Vertex {
        while self.first_child[v] != NO_PARENT {
            v = self.first_child[v];
        }
        v
    }

    /// Depth of the deepest common ancestor, which on a tree is the Gromov
    /// product based at the root.
    pub fn common_ancestor_depth(&self, mut u: Vertex, mut v: Vertex) -> u32 {
        while self.vertex_depth(u) > self.vertex_depth(v) {
            u = self.parent[u];
        }
        while self.vertex_depth(v) > self.vertex_depth(u) {
            v = self.parent[v];
        }
        while u != v {
            u = self.parent[u];
            v = self.parent[v];
        }
        self.vertex_depth(u)
    }
}

pub fn build_tree_ball(depth: u32, budget: usize) -> Result<TreeBall> {
    if depth == 0 {
        return Err(Error::InvalidParameter("tree depth must be at least 1".into()));
    }
    if depth >= 60 || tree_ball_size(depth) > budget as u128 {
        return Err(Error::BudgetExceeded { budget });
    }
    let n = tree_ball_size(depth) as usize;
    let mut parent = vec![NO_PARENT; n];
    let mut first_child = vec![NO_PARENT; n];
    let mut level = vec![0u32; n];
    let mut far_side = vec![false; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut next = 1;
    for v in 0..n {
        if level[v] == depth {
            continue;
        }
        let count = if v == 0 { 3 } else { 2 };
        first_child[v] = next;
        for c in next..next + count {
            parent[c] = v;
            level[c] = level[v] + 1;
            far_side[c] = far_side[v] || c == 3;
            edges.push((v, c));
        }
        next += count;
    }
    debug_assert_eq!(next, n);
    let first_leaf = n - 3 * (1usize << (depth - 1));
    let graph = Graph::from_edges(n, 0, &edges, Some(level), Some(depth - 1))?;
    Ok(TreeBall { graph, depth, parent, first_child, far_side, first_leaf })
}

/// A function on the leaves with a Lipschitz constant for the visual metric:
/// `|F(u) − F(v)| ≤ K · e^{−ε (u|v)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFunction {
    /// One value per leaf, in [`TreeBall::leaves`] order.
    pub values: Vec<f64>,
    pub epsilon: f64,
    pub lipschitz: f64,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("epsilon {epsilon} must be positive")))
    }
}

impl BoundaryFunction {
    pub fn new(t: &TreeBall, values: Vec<f64>, epsilon: f64, lipschitz: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if values.len() != t.num_leaves() {
            return Err(Error::ShapeMismatch { expected: t.num_leaves(), actual: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) || !(lipschitz >= 0.0) {
            return Err(Error::InvalidParameter("boundary values and K must be finite".into()));
        }
        Ok(BoundaryFunction { values, epsilon, lipschitz })
    }

    fn from_leaves(t: &TreeBall, epsilon: f64, lipschitz: f64, f: impl Fn(Vertex) -> f64) -> Result<Self> {
        Self::new(t, t.leaves().map(f).collect(), epsilon, lipschitz)
    }

    /// `0` on ends of `T₁`, `1` on ends of `T₂`. Leaves on different sides
    /// meet only at the root, so `K = e^ε` suffices.
    pub fn far_side_indicator(t: &TreeBall, epsilon: f64) -> Result<Self> {
        Self::from_leaves(t, epsilon, math::exp(epsilon), |v| if t.in_far_side(v) { 1.0 } else { 0.0 })
    }

    pub fn constant(t: &TreeBall, c: f64, epsilon: f64) -> Result<Self> {
        Self::from_leaves(t, epsilon, 0.0, |_| c)
    }

    /// Indicator of the leaves below `v`.
    pub fn cylinder(t: &TreeBall, v: Vertex, epsilon: f64) -> Result<Self> {
        if v >= t.num_vertices() {
            return Err(Error::VertexOutOfRange(v));
        }
        let d = t.vertex_depth(v);
        let k = if d == 0 { 0.0 } else { math::exp(epsilon * (d - 1) as f64) };
        Self::from_leaves(t, epsilon, k, |u| if t.common_ancestor_depth(u, v) == d { 1.0 } else { 0.0 })
    }

    /// `F(u) = e^{−ε (u|r)}` for a reference leaf `r`; 1-Lipschitz because
    /// the Gromov product on a tree is an ultrametric.
    pub fn decay_from_reference(t: &TreeBall, reference: Vertex, epsilon: f64) -> Result<Self> {
        if t.leaf_index(reference).is_none() {
            return Err(Error::InvalidParameter(format!("vertex {reference} is not a leaf")));
        }
        Self::from_leaves(t, epsilon, 1.0, |u| math::exp(-epsilon * t.common_ancestor_depth(u, reference) as f64))
    }

    /// `F(u) = Σ_m e^{−εm} [step m of the path to u avoids the first child]`.
    /// Leaves agreeing to depth `j` differ by at most `Σ_{m>j} e^{−εm}`,
    /// giving `K = e^{−ε} / (1 − e^{−ε})`.
    pub fn binary_expansion(t: &TreeBall, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        let decay = math::exp(-epsilon);
        Self::from_leaves(t, epsilon, decay / (1.0 - decay), |u| {
            let mut acc = ExactSum::new();
            let mut v = u;
            while let Some(p) = t.parent(v) {
                if v != t.first_child[p] {
                    acc.add(math::exp(-epsilon * t.vertex_depth(v) as f64));
                }
                v = p;
            }
            acc.value()
        })
    }

    pub fn value_at_leaf(&self, t: &TreeBall, leaf: Vertex) -> f64 {
        self.values[t.leaf_index(leaf).expect("not a leaf")]
    }

    /// Largest violation `|F(u) − F(v)| − K e^{−ε(u|v)}` over all leaf pairs
    /// (non-positive when the Lipschitz bound holds).
    pub fn lipschitz_excess(&self, t: &TreeBall) -> f64 {
        let leaves: Vec<Vertex> = t.leaves().collect();
        let mut worst = f64::NEG_INFINITY;
        for (i, &u) in leaves.iter().enumerate() {
            for (j, &v) in leaves.iter().enumerate().skip(i + 1) {
                let gp = t.common_ancestor_depth(u, v) as f64;
                let excess = (self.values[i] - self.values[j]).abs() - self.lipschitz * math::exp(-self.epsilon * gp);
                worst = worst.max(excess);
            }
        }
        worst
    }
}

/// `f(x) = F(u_x)` with `u_x` the first descendant leaf of `x`.
pub fn boundary_extension(f: &BoundaryFunction, t: &TreeBall) -> Result<VertexFunction> {
    if f.values.len() != t.num_leaves() {
        return Err(Error::ShapeMismatch { expected: t.num_leaves(), actual: f.values.len() });
    }
    VertexFunction::from_fn(t.num_vertices(), |v| f.value_at_leaf(t, t.first_descendant_leaf(v)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepthEnergy {
    /// Edges between depth `depth` and `depth + 1`.
    pub depth: u32,
    /// `Σ |f(x) − f(y)|^p` over both orientations of those edges.
    pub energy: f64,
    /// `2 · 3·2^n · K^p e^{−pεn}`, which bounds `energy`.
    pub envelope: f64,
    /// `2 · 3·2^n · K^p e^{−2pεn + 2p}`, reported for comparison.
    pub radial_envelope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyProfile {
    pub p: f64,
    pub per_depth: Vec<DepthEnergy>,
    pub total: f64,
}

/// Energy of the boundary extension per depth, checked against the
/// Lipschitz envelope.
pub fn extension_energy_profile(f: &BoundaryFunction, t: &TreeBall, p: f64) -> Result<EnergyProfile> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent {p} must satisfy p > 1")));
    }
    let ext = boundary_extension(f, t)?;
    let mut sums: Vec<ExactSum> = (0..t.depth).map(|_| ExactSum::new()).collect();
    for c in 1..t.num_vertices() {
        let parent = t.parent[c];
        let d = math::abs_pow(ext.get(parent) - ext.get(c), p);
        sums[t.vertex_depth(parent) as usize].add(2.0 * d);
    }
    let kp = math::powf(f.lipschitz, p);
    let mut per_depth = Vec::with_capacity(t.depth as usize);
    for (n, s) in sums.into_iter().enumerate() {
        let edges = 2.0 * 3.0 * math::powf(2.0, n as f64);
        let energy = s.value();
        let envelope = edges * kp * math::exp(-p * f.epsilon * n as f64);
        let radial_envelope = edges * kp * math::exp(-2.0 * p * f.epsilon * n as f64 + 2.0 * p);
        if energy > envelope * (1.0 + 1e-12) {
            return Err(Error::EnvelopeViolation { depth: n as u32, energy, envelope });
        }
        per_depth.push(DepthEnergy { depth: n as u32, energy, envelope, radial_envelope });
    }
    let total = crate::sum::exact_sum(per_depth.iter().map(|d| d.energy));
    Ok(EnergyProfile { p, per_depth, total })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeFlow {
    pub chain: EdgeChain,
    pub q: f64,
}

/// The dyadic unit flow through `e`.
///
/// `s(x₁, x₂) = 1`; edges at distance `n` from `e` carry `2^{−n}` for
/// `n ≤ D − 1`, oriented towards the root in `T₁` and away from it in `T₂`.
/// The flow is divergence-free except at `T₁` vertices of depth `D − 1`
/// (sources) and `T₂` leaves (sinks).
pub fn unit_flow_cycle(t: &TreeBall, q: f64) -> Result<TreeFlow> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent {q} must satisfy q > 1")));
    }
    let g = &t.graph;
    let mut chain = EdgeChain::zeros(g);
    for c in 1..t.num_vertices() {
        let p = t.parent[c];
        let dc = t.vertex_depth(c) as i32;
        if c == t.x2() {
            chain.set(g, p, c, 1.0)?;
        } else if t.in_far_side(c) {
            chain.set(g, p, c, libm::ldexp(1.0, -(dc - 1)))?;
        } else if dc < t.depth as i32 {
            chain.set(g, c, p, libm::ldexp(1.0, -dc))?;
        }
    }
    Ok(TreeFlow { chain, q })
}

/// `‖s‖_q^q = 2(1 + 2 Σ_{n=1}^{D−1} 2^{n(1−q)})`.
pub fn flow_norm_pow_closed_form(depth: u32, q: f64) -> f64 {
    let mut acc = ExactSum::new();
    acc.add(1.0);
    for n in 1..depth {
        acc.add(2.0 * math::powf(2.0, n as f64 * (1.0 - q)));
    }
    2.0 * acc.value()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonvanishingCertificate {
    pub p: f64,
    pub q: f64,
    pub depth: u32,
    pub coupling: f64,
    /// `‖s‖_q`.
    pub flow_norm_q: f64,
    /// `‖s‖_q^q`.
    pub flow_norm_pow: f64,
    pub lower_bound: f64,
}

/// Pairs the extension of the far-side indicator with the unit flow.
pub fn nonvanishing_certificate(t: &TreeBall, p: f64) -> Result<NonvanishingCertificate> {
    let q = dirichlet::conjugate_exponent(p)?;
    let indicator = BoundaryFunction::far_side_indicator(t, core::f64::consts::LN_2)?;
    let f = boundary_extension(&indicator, t)?;
    let c = dirichlet::gradient(&f, &t.graph)?;
    let s = unit_flow_cycle(t, q)?;
    let coupling = dirichlet::coupling(&c, &s.chain, &t.graph)?;
    let lower_bound = dirichlet::nonvanishing_lower_bound(&c, &s.chain, &t.graph, p)?;
    let flow_norm_pow = s.chain.norm_pow(q);
    Ok(NonvanishingCertificate {
        p,
        q,
        depth: t.depth,
        coupling,
        flow_norm_q: math::powf(flow_norm_pow, 1.0 / q),
        flow_norm_pow,
        lower_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_VERTEX_BUDGET;

    fn tree(d: u32) -> TreeBall {
        build_tree_ball(d, DEFAULT_VERTEX_BUDGET).unwrap()
    }

    #[test]
    fn sizes_and_structure() {
        assert_eq!(tree(1).num_vertices(), 4);
        assert_eq!(tree(2).num_vertices(), 10);
        let t = tree(5);
        for v in 0..t.num_vertices() {
            let deg = t.graph.degree(v);
            match t.vertex_depth(v) {
                0 => assert_eq!(deg, 3),
                5 => assert_eq!(deg, 1),
                _ => assert_eq!(deg, 3),
            }
        }
        assert_eq!(t.num_leaves(), 48);
        assert!(t.leaves().all(|v| t.vertex_depth(v) == 5));
        assert!(build_tree_ball(0, 100).is_err());
        assert_eq!(build_tree_ball(10, 100).unwrap_err(), Error::BudgetExceeded { budget: 100 });
    }

    #[test]
    fn far_side_extension_is_a_step() {
        let t = tree(6);
        let f = boundary_extension(&BoundaryFunction::far_side_indicator(&t, 0.7).unwrap(), &t).unwrap();
        for v in 0..t.num_vertices() {
            assert_eq!(f.get(v), if t.in_far_side(v) { 1.0 } else { 0.0 });
        }
        let c = dirichlet::gradient(&f, &t.graph).unwrap();
        for (x, y, k) in t.graph.arcs() {
            let on_e = (x, y) == (0, 3) || (x, y) == (3, 0);
            assert_eq!(c.arc_values()[k] != 0.0, on_e);
        }
    }

    #[test]
    fn constant_and_cylinder_extensions() {
        let t = tree(6);
        let f = boundary_extension(&BoundaryFunction::constant(&t, 2.5, 1.0).unwrap(), &t).unwrap();
        assert!(f.values().iter().all(|&v| v == 2.5));
        // vertex 5 is the second child of vertex 1, at depth 2
        let cyl = BoundaryFunction::cylinder(&t, 5, 1.0).unwrap();
        assert!(cyl.lipschitz_excess(&t) <= 0.0);
        let f = boundary_extension(&cyl, &t).unwrap();
        for v in (0..t.num_vertices()).filter(|&v| t.vertex_depth(v) >= 2) {
            let below = t.common_ancestor_depth(v, 5) == 2;
            assert_eq!(f.get(v), if below { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn flow_divergence_and_norm() {
        for d in 1..=9 {
            let t = tree(d);
            let s = unit_flow_cycle(&t, 2.0).unwrap();
            let div = dirichlet::divergence(&s.chain, &t.graph).unwrap();
            for v in 0..t.num_vertices() {
                if t.graph.is_interior(v) {
                    assert_eq!(div[v], 0.0);
                }
            }
            assert_eq!(s.chain.get(&t.graph, 0, 3), Some(1.0));
            for q in [4.0 / 3.0, 2.0, 3.0] {
                let got = s.chain.norm_pow(q);
                let expected = flow_norm_pow_closed_form(d, q);
                assert!((got - expected).abs() <= 1e-13 * expected, "D={d} q={q}");
            }
        }
        assert!(unit_flow_cycle(&tree(3), 1.0).is_err());
    }

    #[test]
    fn certificate_coupling_is_minus_two() {
        for d in 2..=8 {
            let cert = nonvanishing_certificate(&tree(d), 4.0).unwrap();
            assert_eq!(cert.coupling, -2.0);
            assert!(cert.lower_bound > 0.2);
        }
    }

    #[test]
    fn energy_profiles() {
        let t = tree(8);
        let cyl = BoundaryFunction::cylinder(&t, 5, 1.0).unwrap();
        let prof = extension_energy_profile(&cyl, &t, 2.0).unwrap();
        assert!(prof.per_depth.iter().filter(|d| d.depth > 2).all(|d| d.energy == 0.0));

        let eps = core::f64::consts::LN_2;
        let slow = BoundaryFunction::binary_expansion(&t, eps).unwrap();
        assert!(slow.lipschitz_excess(&t) <= 1e-15);
        let prof = extension_energy_profile(&slow, &t, 1.5).unwrap();
        let e: Vec<f64> = prof.per_depth.iter().map(|d| d.energy).collect();
        // pε = 1.5 ln 2 > ln 2: per-depth energy shrinks by 2^{−1/2} per level
        for w in e[1..].windows(2) {
            assert!(w[1] < w[0]);
        }
    }
}
