//! Subspace clustering on smooth, graph-filtered representations.
//!
//! The pipeline alternates three steps until the learned graph stops
//! changing:
//!
//! 1. learn a self-expressive coefficient matrix `Z` on the current
//!    representation (ridge-regularized least squares, closed form),
//! 2. turn `Z` into a symmetric affinity graph `W` and its normalized
//!    Laplacian `L`,
//! 3. low-pass filter the raw features with `(I - L/2)^k`.
//!
//! Spectral clustering on the final `W` yields the partition. The
//! [`metrics`] module scores partitions (ACC, NMI, purity) and
//! representations (Fisher score, PSNR, SSIM).
//!
//! ```
//! use smoothclust::data::{gen_subspaces, SubspaceSpec};
//! use smoothclust::selfexpress::{run_flsr, IterationConfig, LsrConfig};
//! use smoothclust::spectral::{cluster, SpectralConfig};
//! use smoothclust::numerics::SeededRng;
//! use smoothclust::metrics::accuracy;
//!
//! let data = gen_subspaces(&SubspaceSpec {
//!     ambient_dim: 20,
//!     subspace_dim: 2,
//!     clusters: 2,
//!     samples_per_cluster: 15,
//!     noise_sigma: 0.0,
//!     seed: 3,
//!     orthogonal: false,
//! })
//! .unwrap();
//! let fit = run_flsr(&data.features, &LsrConfig::new(0.5), &IterationConfig::new(2)).unwrap();
//! let mut rng = SeededRng::new(0);
//! let labels = cluster(&fit.affinity, 2, &mut rng, &SpectralConfig::default()).unwrap();
//! let acc = accuracy(labels.labels(), data.labels.as_ref().unwrap()).unwrap();
//! assert!(acc > 0.9);
//! ```

pub mod cli;
pub mod data;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod numerics;
pub mod selfexpress;
pub mod spectral;

pub use error::{Error, Result};

/// Row-per-sample feature matrix (`n x m`).
pub type FeatureMatrix = nalgebra::DMatrix<f64>;
