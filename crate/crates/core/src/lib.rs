//! Unstructured meshes stored as Hasse diagrams, with star-forest based
//! data migration, mesh distribution, overlap construction and
//! redistribution over a simulated multi-rank communicator.

pub mod cli;
pub mod comm;
pub mod datalayout;
pub mod distribute;
pub mod format;
mod error;
pub mod invariants;
pub mod meshgen;
pub mod migrate;
pub mod overlap;
pub mod plex;
pub mod starforest;

pub use error::{Error, Result};

/// Local mesh point index. Cells, faces, edges and vertices share one
/// contiguous chart.
pub type Point = usize;
