use alloc::string::String;

use crate::graph::Vertex;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),
    #[error("element {0} does not belong to the group")]
    ForeignElement(String),
    #[error("cannot parse element {0:?}")]
    ParseElement(String),
    #[error("vertex budget exceeded: needed more than {budget} vertices")]
    BudgetExceeded { budget: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph is empty")]
    EmptyGraph,
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(Vertex),
    #[error("vertex {0} is not interior: its neighbourhood may be truncated")]
    NotInterior(Vertex),
    #[error("distance between {x} and {y} could be shortened through vertices outside the ball")]
    DistanceNotCertified { x: Vertex, y: Vertex },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("size mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("chain is not antisymmetric on arc ({0}, {1})")]
    NotAntisymmetric(Vertex, Vertex),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("boundary data is empty")]
    EmptyBoundary,
    #[error("solver did not converge after {iterations} sweeps (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("flow is not divergence-free at vertex {vertex} (divergence {divergence:e})")]
    NotDivergenceFree { vertex: Vertex, divergence: f64 },
    #[error("flow has zero norm")]
    ZeroFlow,
    #[error("tail bound cannot be certified: {0}")]
    TailNotCertifiable(String),
    #[error("cocycle value is not finitely supported")]
    NotFinitelySupported,
    #[error("evaluation region too small: {0}")]
    RegionTooSmall(String),
    #[error("Følner set F_{0} is empty")]
    EmptyFolnerSet(usize),
    #[error("energy {energy:e} at depth {depth} exceeds envelope {envelope:e}")]
    EnvelopeViolation { depth: u32, energy: f64, envelope: f64 },
}
