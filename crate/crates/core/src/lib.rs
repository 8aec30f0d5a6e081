//! Combinatorial topology of cross-blockchain transactions under fork
//! suspension.
//!
//! The crate builds the transaction task as explicit simplicial complexes
//! and a carrier map ([`cbt`]), checks the carrier properties ([`task`]),
//! decides unsolvability ([`solvability`]) and exercises a representative
//! atomic-commit protocol against fork suspension in a deterministic
//! simulator ([`sim`]).

pub mod cbt;
pub mod connectivity;
pub mod sim;
pub mod simplicial;
pub mod solvability;
pub mod task;

pub use cbt::{build_colorless_task, build_task, CbtConfig};
pub use simplicial::{BlockRef, Complex, Simplex, Value, Vertex};
pub use solvability::{decide, SearchOptions, SolvabilityReport, Verdict};
pub use task::Task;
