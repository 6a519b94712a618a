//! Random hypergraph colouring: planted and uniform models, loose-cycle
//! census, the core-stripping process, frozen-vertex certificates, rigidity
//! and condensation thresholds, and first/second-moment functionals.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod colouring;
pub mod cycles;
pub mod error;
pub mod experiments;
pub mod hypergraph;
pub mod lambert;
pub mod moments;
pub mod params;
pub mod rigidity;
pub mod rng;
pub mod thresholds;

pub use colouring::{Colour, Colouring, ColourDensity, OverlapMatrix};
pub use error::{Error, Result};
pub use hypergraph::{Hypergraph, NeighbourhoodLayers, Vertex};
pub use params::ModelParams;
