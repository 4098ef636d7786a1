//! p-Dirichlet energy, the coarse p-Laplacian and cycle–cocycle pairings at
//! scale 1.
//!
//! Edge quantities are indexed by the arcs of the underlying [`Graph`]: each
//! undirected edge appears twice, once per orientation, and every sum over
//! "adjacent pairs" runs over both.

mod solver;

use alloc::{format, vec, vec::Vec};

use crate::{
    cayley::CayleyBall,
    func::ClosedForm,
    graph::Graph,
    math,
    sum::{exact_sum, ExactSum},
    Error, Result, Vertex,
};

pub use solver::{solve_p_harmonic, solve_p_harmonic_with, sphere_boundary, EnergyReport, SolveOptions, SolverMethod};

/// Relative tolerance used when checking that a flow has zero divergence.
pub const DIVERGENCE_TOL: f64 = 1e-12;

/// A real function on the vertices of a finite graph.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFunction {
    values: Vec<f64>,
    tail: Option<ClosedForm>,
}

impl VertexFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("value at vertex {v} is not finite")));
        }
        Ok(VertexFunction { values, tail: None })
    }

    pub fn constant(n: usize, c: f64) -> Self {
        VertexFunction { values: vec![c; n], tail: None }
    }

    pub fn from_fn(n: usize, f: impl FnMut(Vertex) -> f64) -> Result<Self> {
        Self::new((0..n).map(f).collect())
    }

    /// Samples a closed form on a Cayley ball and keeps the formula as the
    /// description of the function outside the ball.
    pub fn from_closed_form(ball: &CayleyBall, form: ClosedForm) -> Result<Self> {
        let values = ball.labels.iter().map(|x| form.eval(&ball.spec, x)).collect::<Result<Vec<_>>>()?;
        let mut f = Self::new(values)?;
        f.tail = Some(form);
        Ok(f)
    }

    pub fn tail(&self) -> Option<&ClosedForm> {
        self.tail.as_ref()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, v: Vertex) -> f64 {
        self.values[v]
    }

    fn check_shape(&self, g: &Graph) -> Result<()> {
        if self.values.len() == g.num_vertices() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch { expected: g.num_vertices(), actual: self.values.len() })
        }
    }
}

/// An antisymmetric function on ordered adjacent pairs, stored per arc.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeChain {
    values: Vec<f64>,
}

impl EdgeChain {
    pub fn zeros(g: &Graph) -> Self {
        EdgeChain { values: vec![0.0; g.num_arcs()] }
    }

    /// Wraps per-arc values, checking antisymmetry exactly.
    pub fn from_arc_values(g: &Graph, values: Vec<f64>) -> Result<Self> {
        if values.len() != g.num_arcs() {
            return Err(Error::ShapeMismatch { expected: g.num_arcs(), actual: values.len() });
        }
        for (x, y, k) in g.arcs() {
            let v = values[k];
            if !v.is_finite() || v != -values[g.reverse_arc(k)] {
                return Err(Error::NotAntisymmetric(x, y));
            }
        }
        Ok(EdgeChain { values })
    }

    /// Builds a chain from values on oriented edges; the opposite orientation
    /// receives the negated value and unlisted edges are zero.
    pub fn from_oriented(g: &Graph, entries: &[(Vertex, Vertex, f64)]) -> Result<Self> {
        let mut chain = Self::zeros(g);
        for &(u, v, val) in entries {
            chain.set(g, u, v, val)?;
        }
        Ok(chain)
    }

    /// Sets `s(u, v) = val` and `s(v, u) = −val`.
    pub fn set(&mut self, g: &Graph, u: Vertex, v: Vertex, val: f64) -> Result<()> {
        if u >= g.num_vertices() {
            return Err(Error::VertexOutOfRange(u));
        }
        if v >= g.num_vertices() {
            return Err(Error::VertexOutOfRange(v));
        }
        let k = g.arc(u, v).ok_or_else(|| Error::InvalidGraph(format!("{u} and {v} are not adjacent")))?;
        if !val.is_finite() {
            return Err(Error::InvalidParameter(format!("value on ({u}, {v}) is not finite")));
        }
        self.values[k] = val;
        self.values[g.reverse_arc(k)] = -val;
        Ok(())
    }

    pub fn get(&self, g: &Graph, u: Vertex, v: Vertex) -> Option<f64> {
        g.arc(u, v).map(|k| self.values[k])
    }

    /// Per-arc values in the graph's arc order.
    pub fn arc_values(&self) -> &[f64] {
        &self.values
    }

    /// Ordered-pair ℓ^p norm `(Σ |s(x,y)|^p)^{1/p}`.
    pub fn norm(&self, p: f64) -> f64 {
        math::powf(self.norm_pow(p), 1.0 / p)
    }

    /// `Σ |s(x,y)|^p` over ordered pairs.
    pub fn norm_pow(&self, p: f64) -> f64 {
        exact_sum(self.values.iter().map(|&v| math::abs_pow(v, p)))
    }

    fn check_shape(&self, g: &Graph) -> Result<()> {
        if self.values.len() == g.num_arcs() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch { expected: g.num_arcs(), actual: self.values.len() })
        }
    }
}

fn check_p(p: f64, min_exclusive: bool) -> Result<()> {
    let ok = if min_exclusive { p > 1.0 } else { p >= 1.0 };
    if ok && p.is_finite() {
        Ok(())
    } else {
        let bound = if min_exclusive { "p > 1" } else { "p >= 1" };
        Err(Error::InvalidParameter(format!("exponent {p} violates {bound}")))
    }
}

/// The cocycle `c(x, y) = f(x) − f(y)`.
pub fn gradient(f: &VertexFunction, g: &Graph) -> Result<EdgeChain> {
    f.check_shape(g)?;
    let values = g.arcs().map(|(x, y, _)| f.values[x] - f.values[y]).collect();
    Ok(EdgeChain { values })
}

/// `Σ |f(x) − f(y)|^p` over ordered adjacent pairs.
pub fn p_energy(f: &VertexFunction, g: &Graph, p: f64) -> Result<f64> {
    f.check_shape(g)?;
    check_p(p, false)?;
    Ok(exact_sum(g.arcs().map(|(x, y, _)| math::abs_pow(f.values[x] - f.values[y], p))))
}

/// Differences no larger than this many units in the last place of the
/// function's sup norm are rounding noise and count as zero in the
/// p-Laplacian. For `p < 2` the term `|t|^{p−1}` would otherwise turn a
/// difference of one ulp into a residual many orders of magnitude larger.
const NOISE_ULPS: f64 = 4.0;

pub(crate) fn noise_floor(values: &[f64]) -> f64 {
    NOISE_ULPS * f64::EPSILON * values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Sum of `|f(x) − f(y)|^{p−2} (f(x) − f(y))` over the neighbours of `x`,
/// without normalisation and without checking that `x` is interior.
/// Differences of size at most `noise` are dropped.
pub(crate) fn local_flux(values: &[f64], g: &Graph, p: f64, x: Vertex, noise: f64) -> f64 {
    let fx = values[x];
    let mut acc = ExactSum::new();
    for &y in g.neighbors(x) {
        let d = fx - values[y];
        if d.abs() > noise {
            acc.add(math::signed_pow(d, p - 1.0));
        }
    }
    acc.value()
}

/// Coarse p-Laplacian `Δ_p f(x) = (1/V(x,1)) Σ_{d(x,y)≤1} |f(x)−f(y)|^{p−2}(f(x)−f(y))`
/// with `V(x, 1) = 1 + deg(x)`. Differences at the level of rounding noise
/// contribute zero.
pub fn p_laplacian(f: &VertexFunction, g: &Graph, p: f64, x: Vertex) -> Result<f64> {
    f.check_shape(g)?;
    check_p(p, true)?;
    if x >= g.num_vertices() {
        return Err(Error::VertexOutOfRange(x));
    }
    if !g.is_interior(x) {
        return Err(Error::NotInterior(x));
    }
    Ok(local_flux(&f.values, g, p, x, noise_floor(&f.values)) / (1 + g.degree(x)) as f64)
}

/// Bilinear pairing `⟨c, s⟩ = Σ c(x,y) s(x,y)` over ordered pairs.
pub fn coupling(c: &EdgeChain, s: &EdgeChain, g: &Graph) -> Result<f64> {
    c.check_shape(g)?;
    s.check_shape(g)?;
    Ok(exact_sum(c.values.iter().zip(&s.values).map(|(a, b)| a * b)))
}

/// `div s(x) = Σ_y s(x, y)` at every vertex.
pub fn divergence(s: &EdgeChain, g: &Graph) -> Result<Vec<f64>> {
    s.check_shape(g)?;
    Ok((0..g.num_vertices()).map(|x| exact_sum(g.arc_range(x).map(|k| s.values[k]))).collect())
}

/// Checks `div s = 0` at every interior vertex, up to [`DIVERGENCE_TOL`]
/// relative to the flow through the vertex. Returns the largest divergence
/// seen.
pub fn check_divergence_free(s: &EdgeChain, g: &Graph) -> Result<f64> {
    let div = divergence(s, g)?;
    let mut worst = 0.0f64;
    for (x, &d) in div.iter().enumerate() {
        if !g.is_interior(x) {
            continue;
        }
        let through = exact_sum(g.arc_range(x).map(|k| s.values[k].abs()));
        if d.abs() > DIVERGENCE_TOL * through {
            return Err(Error::NotDivergenceFree { vertex: x, divergence: d });
        }
        worst = worst.max(d.abs());
    }
    Ok(worst)
}

/// Hölder-dual exponent `q = p / (p − 1)`.
pub fn conjugate_exponent(p: f64) -> Result<f64> {
    check_p(p, true)?;
    Ok(p / (p - 1.0))
}

/// `|⟨c, s⟩| / ‖s‖_q` for a flow `s` that is divergence-free at every
/// interior vertex. Since `|⟨c, s⟩| ≤ ‖c‖_p ‖s‖_q`, this bounds from below
/// the ℓ^p distance from `c` to any cocycle the flow annihilates.
pub fn nonvanishing_lower_bound(c: &EdgeChain, s: &EdgeChain, g: &Graph, p: f64) -> Result<f64> {
    let q = conjugate_exponent(p)?;
    c.check_shape(g)?;
    check_divergence_free(s, g)?;
    let norm = s.norm(q);
    if norm == 0.0 {
        return Err(Error::ZeroFlow);
    }
    Ok(coupling(c, s, g)?.abs() / norm)
}
