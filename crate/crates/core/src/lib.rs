//! Exact and spectral verification toolkit for the q-analogue "magic"
//! matrices `B_n` over a primitive `l`-th root of unity, and for the
//! induced-subgraph degree bound on Cartesian powers of the directed
//! `l`-cycle.
//!
//! * [`cyclotomic`]: exact arithmetic in `Z[q]`.
//! * [`qmatrix`]: the matrices `x`, `y`, Kronecker lifts and `B_n`.
//! * [`cyclegraph`]: `C_l^n`, vertex subsets, induced degrees.
//! * [`spectral`]: numeric rank / null-space machinery for the eigenvalue argument.
//! * [`extremal`]: exhaustive, sampled and local-search checks of the degree bound.

pub mod cyclegraph;
pub mod cyclotomic;
pub mod error;
pub mod extremal;
pub mod limits;
pub mod qmatrix;
pub mod spectral;

pub use cyclegraph::{DiGraph, VertexCode, VertexSubset};
pub use cyclotomic::{CycInt, CycRing, IntPoly};
pub use error::{Error, Result};
pub use extremal::{SearchResult, TheoremReport};
pub use qmatrix::{CycMatrix, RootEntry, RootMatrix};
pub use spectral::{CMatrix, EigenWitness, SpectralReport};

pub use limits::Limits;

/// Version tag carried by every serialized report.
pub const SCHEMA_VERSION: u32 = 1;
