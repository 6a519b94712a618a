//! Essential edges, the stripping process and its core, frozen-vertex
//! certificates, and flippable sets.

pub mod flippable;
pub mod frozen;
pub mod strip;

pub use flippable::{FlipContext, FlipDigraph, KernelMode};
pub use frozen::{
    frozen_set_exact, is_ell_frozen_exact, recolouring_certificate, recolouring_certificate_with_trace,
    RecolouringSequence,
};
pub use strip::{essential_edges, extract_core, CoreTrace};
