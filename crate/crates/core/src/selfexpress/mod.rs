//! Self-expressive coefficient learning and the alternating
//! filter/learn iteration.
//!
//! `Z = (XX^T + alpha I)^{-1} XX^T` is the closed-form minimizer of
//! `|X^T - X^T Z|_F^2 + alpha |Z|_F^2` and is symmetric, so the affinity is
//! simply `|Z|`. The thresholded variant keeps the `p` largest entries of
//! each affinity row before spectral clustering.

mod iterate;
mod lsr;

pub use iterate::{
    run_flsr, run_flsr_observed, run_ftrr, run_ftrr_observed, FilterIteration, FilterSource,
    FitOutcome, IterationConfig, IterationRecord, IterationStep, IterationTrace,
    DEFAULT_EPSILON, DEFAULT_MAX_ITER,
};
pub use lsr::{
    affinity_from_coefficients, lsr_affinity, lsr_coefficients, trr_affinity, trr_threshold,
    CoefficientMatrix, LsrConfig, TrrConfig,
};
