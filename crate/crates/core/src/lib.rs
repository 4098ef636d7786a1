//! Discrete first L^p-cohomology on Cayley graphs.
//!
//! The crate computes p-Dirichlet energies and p-harmonic functions on
//! finite balls of Cayley graphs, builds controlled Følner sequences and
//! checks the averaging that turns sublinear cocycles into almost fixed
//! points, and certifies non-vanishing on trees by pairing a boundary
//! extension with an ℓ^q flow.
//!
//! Everything here is `no_std` + `alloc`; file formats and the command-line
//! driver live in the `lpcoh` crate.
#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod cayley;
pub mod cocycle;
pub mod dirichlet;
mod error;
pub mod folner;
pub mod func;
pub mod graph;
pub mod group;
pub mod hyperbolic;
mod math;
pub mod sum;

pub use cayley::{build_cayley_ball, CayleyBall, DEFAULT_VERTEX_BUDGET};
pub use error::{Error, Result};
pub use graph::{Graph, Vertex};
pub use group::{Element, GroupKind, GroupSpec};
