//! Dirichlet problems for the p-Laplacian.
//!
//! The default method is nonlinear Gauss–Seidel: free vertices are visited
//! in ascending order and each is moved to the minimiser of its local energy
//! `t ↦ Σ_y |t − f(y)|^p`. That minimiser is the root of the increasing
//! function `Σ_y sign(t − f(y))|t − f(y)|^{p−1}` and always lies between the
//! smallest and largest neighbour value, so a safeguarded Newton iteration
//! on that bracket finds it without ever dividing by a vanishing weight.
//!
//! For `p < 2` coordinate descent crawls, so `Auto` starts with damped
//! iteratively reweighted least squares and only hands over to coordinate
//! descent if that stalls.

use alloc::{collections::BTreeMap, format, vec, vec::Vec};

use super::{local_flux, noise_floor, p_energy, VertexFunction};
use crate::{graph::Graph, math, Error, Result, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMethod {
    /// Coordinate descent for `p ≥ 2`, damped IRLS first for `p < 2`.
    #[default]
    Auto,
    CoordinateDescent,
    DampedIrls,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Stop once the largest free-vertex residual is at most `tol`.
    /// `None` picks `1e-9` for `p = 2` and `1e-7` otherwise.
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub method: SolverMethod,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: None, max_iter: 100_000, method: SolverMethod::Auto }
    }
}

impl SolveOptions {
    pub fn default_tol(p: f64) -> f64 {
        if p == 2.0 {
            1e-9
        } else {
            1e-7
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub p: f64,
    pub energy: f64,
    /// Largest `|Δ_p f|` over free vertices; `None` when every vertex is fixed.
    pub max_residual: Option<f64>,
    pub iterations: usize,
    /// Set for `p ≤ 1.01` or `p ≥ 50`, where the problem is badly conditioned.
    pub ill_conditioned: bool,
}

const IRLS_DAMPING: f64 = 0.5;
const IRLS_FLOOR: f64 = 1e-12;

/// Solves the Dirichlet problem with the given boundary values.
pub fn solve_p_harmonic(
    g: &Graph,
    boundary: &BTreeMap<Vertex, f64>,
    p: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(VertexFunction, EnergyReport)> {
    solve_p_harmonic_with(g, boundary, p, &SolveOptions { tol: Some(tol), max_iter, method: SolverMethod::Auto })
}

pub fn solve_p_harmonic_with(
    g: &Graph,
    boundary: &BTreeMap<Vertex, f64>,
    p: f64,
    opts: &SolveOptions,
) -> Result<(VertexFunction, EnergyReport)> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent {p} must satisfy p > 1")));
    }
    let tol = opts.tol.unwrap_or_else(|| SolveOptions::default_tol(p));
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    if boundary.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let n = g.num_vertices();
    let mut fixed = vec![false; n];
    let mut values = vec![0.0; n];
    for (&v, &val) in boundary {
        if v >= n {
            return Err(Error::VertexOutOfRange(v));
        }
        if !val.is_finite() {
            return Err(Error::InvalidParameter(format!("boundary value at {v} is not finite")));
        }
        fixed[v] = true;
        values[v] = val;
    }
    let start = boundary.values().sum::<f64>() / boundary.len() as f64;
    let free: Vec<Vertex> = (0..n).filter(|&v| !fixed[v]).collect();
    for &v in &free {
        values[v] = start;
    }

    let mut state = Sweeper { g, p, free: &free, values };
    let iterations = match opts.method {
        SolverMethod::CoordinateDescent => state.run(tol, opts.max_iter, Sweeper::coordinate_sweep)?,
        SolverMethod::DampedIrls => state.run(tol, opts.max_iter, Sweeper::irls_sweep)?,
        SolverMethod::Auto if p >= 2.0 => state.run(tol, opts.max_iter, Sweeper::coordinate_sweep)?,
        SolverMethod::Auto => match state.run(tol, opts.max_iter, Sweeper::irls_sweep) {
            Err(Error::NotConverged { iterations, .. }) => {
                iterations + state.run(tol, opts.max_iter, Sweeper::coordinate_sweep)?
            }
            other => other?,
        },
    };
    let max_residual = if free.is_empty() { None } else { Some(state.max_residual()) };
    let f = VertexFunction::new(state.values)?;
    let energy = p_energy(&f, g, p)?;
    let report = EnergyReport { p, energy, max_residual, iterations, ill_conditioned: p <= 1.01 || p >= 50.0 };
    Ok((f, report))
}

/// Boundary data on the sphere `|x| = R` of a ball with interior radius `R`.
pub fn sphere_boundary(g: &Graph, mut value: impl FnMut(Vertex) -> f64) -> Result<BTreeMap<Vertex, f64>> {
    let r = g.interior_radius().ok_or_else(|| Error::InvalidParameter("graph has no interior radius".into()))?;
    Ok((0..g.num_vertices()).filter(|&v| g.word_length(v) >= r).map(|v| (v, value(v))).collect())
}

struct Sweeper<'a> {
    g: &'a Graph,
    p: f64,
    free: &'a [Vertex],
    values: Vec<f64>,
}

impl Sweeper<'_> {
    fn max_residual(&self) -> f64 {
        let noise = noise_floor(&self.values);
        self.free
            .iter()
            .map(|&x| (local_flux(&self.values, self.g, self.p, x, noise) / (1 + self.g.degree(x)) as f64).abs())
            .fold(0.0, f64::max)
    }

    fn run(&mut self, tol: f64, max_iter: usize, sweep: fn(&mut Self)) -> Result<usize> {
        let mut residual = self.max_residual();
        let mut iterations = 0;
        while residual > tol {
            if iterations == max_iter {
                return Err(Error::NotConverged { iterations, residual });
            }
            let before = self.values.clone();
            sweep(self);
            iterations += 1;
            if self.values == before {
                // a floating-point fixed point: further sweeps cannot help
                return Err(Error::NotConverged { iterations, residual });
            }
            residual = self.max_residual();
        }
        Ok(iterations)
    }

    fn coordinate_sweep(&mut self) {
        for &x in self.free {
            self.values[x] = self.local_minimizer(x);
        }
    }

    fn local_minimizer(&self, x: Vertex) -> f64 {
        let nbrs = self.g.neighbors(x);
        if nbrs.is_empty() {
            return self.values[x];
        }
        let vals = nbrs.iter().map(|&y| self.values[y]);
        if self.p == 2.0 {
            return vals.sum::<f64>() / nbrs.len() as f64;
        }
        let (mut lo, mut hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if lo == hi {
            return lo;
        }
        let e = self.p - 1.0;
        let phi = |t: f64| -> (f64, f64) {
            let mut value = 0.0;
            let mut slope = 0.0;
            for &y in nbrs {
                let d = t - self.values[y];
                value += math::signed_pow(d, e);
                slope += if d == 0.0 { f64::INFINITY } else { e * math::abs_pow(d, e - 1.0) };
            }
            (value, slope)
        };
        let mut t = self.values[x].clamp(lo, hi);
        for _ in 0..200 {
            let (value, slope) = phi(t);
            if value == 0.0 {
                return t;
            }
            if value > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let newton = t - value / slope;
            let next = if newton.is_finite() && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if next == t || hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                return next;
            }
            t = next;
        }
        t
    }

    fn irls_sweep(&mut self) {
        let w_exp = self.p - 2.0;
        for &x in self.free {
            let fx = self.values[x];
            let (mut num, mut den) = (0.0, 0.0);
            for &y in self.g.neighbors(x) {
                let fy = self.values[y];
                let w = math::powf((fx - fy).abs().max(IRLS_FLOOR), w_exp);
                num += w * fy;
                den += w;
            }
            if den > 0.0 {
                self.values[x] = (1.0 - IRLS_DAMPING) * fx + IRLS_DAMPING * (num / den);
            }
        }
    }
}
