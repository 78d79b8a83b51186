//! Combinatorics of d-regular graphs with many triangles.
//!
//! The crate covers exact triangle and clique censuses, the configuration-order
//! reveal encoding and its permutation averages, explicit finite-n counting
//! bounds, planted constructions, structure analysis (cliques, dense spots and
//! pseudo-cliques), a tilted double-edge-swap sampler, and exhaustive
//! enumeration oracles for small `(n, d)`.

pub mod bounds;
pub mod census;
pub mod certify;
pub mod enumerate;
pub mod fixtures;
pub mod generators;
pub mod graph;
pub mod manifest;
pub mod rational;
pub mod reveal;
pub mod sampler;
pub mod structure;

/// Version tag written into every JSON artifact.
pub const SCHEMA_VERSION: u32 = 1;

pub use graph::{EdgeRef, GraphError, PortLabeledGraph, RegularGraph};
