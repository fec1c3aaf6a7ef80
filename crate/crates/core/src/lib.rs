//! Directed graphs with edge multiplicities in ℕ ∪ {∞}, the moves of flow
//! equivalence (splittings, delays, desingularization, dual graphs), and the
//! graph-level invariants used to tell their results apart.

pub mod dot;
pub mod error;
pub mod graph;
pub mod invariants;
pub mod iso;
pub mod matrixlab;
pub mod moves;
pub mod mult;
pub mod sse;

pub use error::{Error, Result};
pub use graph::{Bundle, Cut, Graph, VertexProfile};
pub use iso::{are_isomorphic, isomorphic, isomorphic_with_frontier, isomorphic_with_limit, VertexMap};
pub use mult::Mult;
