//! Word-metric balls of Cayley graphs.

use alloc::{collections::BTreeMap, vec::Vec};

use crate::{graph::Graph, Element, Error, GroupSpec, Result, Vertex};

/// Default cap on the number of vertices a ball may contain.
pub const DEFAULT_VERTEX_BUDGET: usize = 5_000_000;

/// A ball `S^radius` of a Cayley graph together with the element ↔ vertex
/// bijection. Vertices are numbered in breadth-first order, so the identity
/// is vertex 0.
#[derive(Debug, Clone)]
pub struct CayleyBall {
    pub spec: GroupSpec,
    pub graph: Graph,
    pub labels: Vec<Element>,
    pub index: BTreeMap<Element, Vertex>,
    pub radius: u32,
}

impl CayleyBall {
    pub fn vertex(&self, x: &Element) -> Option<Vertex> {
        self.index.get(x).copied()
    }

    pub fn label(&self, v: Vertex) -> &Element {
        &self.labels[v]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Builds the ball of the given radius, with every edge `x ~ x·s` whose
/// endpoints both lie in the ball.
pub fn build_cayley_ball(spec: &GroupSpec, radius: u32, budget: usize) -> Result<CayleyBall> {
    let labels = spec.ball(radius, budget)?;
    let index: BTreeMap<Element, Vertex> = labels.iter().cloned().enumerate().map(|(v, x)| (x, v)).collect();
    let mut edges = Vec::new();
    for (v, x) in labels.iter().enumerate() {
        for i in 0..spec.num_generators() {
            if let Some(&w) = index.get(&spec.step(x, i)) {
                if v < w {
                    edges.push((v, w));
                }
            }
        }
    }
    let word_length = labels
        .iter()
        .map(|x| u32::try_from(spec.word_length(x)).map_err(|_| Error::BudgetExceeded { budget }))
        .collect::<Result<Vec<_>>>()?;
    let graph = Graph::from_edges(labels.len(), 0, &edges, Some(word_length), Some(radius))?;
    Ok(CayleyBall { spec: spec.clone(), graph, labels, index, radius })
}
