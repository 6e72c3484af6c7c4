//! Graphs over samples: affinity matrices, the symmetrically normalized
//! Laplacian, the low-pass filter `(I - L/2)^k`, and kNN prior graphs.

mod filter;
mod knn;
mod laplacian;
mod sparse;

pub use filter::{filter_via_spectrum, frequency_response, smoothness_energy, GraphFilter};
pub use knn::{knn_affinity, BANDWIDTH_NEIGHBOR};
pub use laplacian::{normalized_laplacian, AffinityMatrix, NormalizedLaplacian, SPARSE_ZERO_FRACTION};
pub use sparse::CsrMatrix;
