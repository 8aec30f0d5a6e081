//! Finite abstract simplicial complexes over ordered vertex types.
//!
//! Complexes keep only their facets; faces are implied. All orderings are
//! canonical so enumeration, hashing and JSON output are reproducible.

mod complex;
mod subdivision;
mod vertex;

pub use complex::{Complex, Simplex};
pub use subdivision::{barycentric_subdivide, Subdivision, SubdivisionVertex};
pub use vertex::{BlockRef, Value, Vertex};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error("a complex needs at least one facet")]
    EmptyInput,
    #[error("a simplex needs at least one vertex")]
    EmptySimplex,
    #[error("simplex repeats a vertex")]
    MalformedSimplex,
    #[error("vertex is not in the complex")]
    UnknownVertex,
}
