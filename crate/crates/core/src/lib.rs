//! Sampling-set selection for bandlimited graph signals through step-function
//! graphon limits.
//!
//! The pipeline represents a graph by its induced step graphon, coarsens it to
//! an equipartition of `[0, 1]`, samples intervals on the coarse graph and
//! then nodes inside the chosen intervals. Certification is by rank tests on
//! eigenvector restrictions and by Poincare constants.

pub mod cluster;
pub mod error;
pub mod graph;
pub mod graphon;
pub mod io;
pub mod linalg;
pub mod mixture;
pub mod models;
pub mod pipeline;
pub mod poincare;
pub mod sampling;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{build_graph, normalized_laplacian, total_variation, Graph, Signal};
pub use graphon::StepGraphon;
pub use sampling::{SampleMethod, SampleSet};
pub use spectral::{eig_sym, Spectrum};

/// Derives an independent stream seed from a base seed and a stream index
/// (SplitMix64 finalizer over the combined value).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
