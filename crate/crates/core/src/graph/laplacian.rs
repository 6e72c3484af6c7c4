use nalgebra::{DMatrix, DVector};

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::numerics::{ensure_finite, max_asymmetry};

/// Weight matrices with at least this fraction of exact zeros are stored
/// in compressed sparse form.
pub const SPARSE_ZERO_FRACTION: f64 = 0.9;

/// Symmetric, nonnegative, finite `n x n` edge-weight matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix(DMatrix<f64>);

impl AffinityMatrix {
    /// Validates symmetry (within `1e-10` relative to the largest weight),
    /// nonnegativity and finiteness.
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        if !weights.is_square() {
            return Err(Error::contract(format!(
                "affinity matrix must be square, got {}x{}",
                weights.nrows(),
                weights.ncols()
            )));
        }
        ensure_finite(&weights, "affinity matrix")?;
        if let Some(pos) = weights.iter().position(|&w| w < 0.0) {
            let n = weights.nrows();
            return Err(Error::contract(format!(
                "affinity matrix has a negative weight at ({}, {})",
                pos % n,
                pos / n
            )));
        }
        let scale = weights.amax().max(1.0);
        let asym = max_asymmetry(&weights);
        if asym > 1e-10 * scale {
            return Err(Error::contract(format!(
                "affinity matrix is not symmetric (max |w_ij - w_ji| = {asym:.3e})"
            )));
        }
        Ok(Self(weights))
    }

    pub(crate) fn from_symmetric(weights: DMatrix<f64>) -> Self {
        debug_assert!(weights.is_square());
        Self(weights)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn degrees(&self) -> DVector<f64> {
        DVector::from_iterator(self.n(), self.0.row_iter().map(|r| r.sum()))
    }

    pub fn zero_fraction(&self) -> f64 {
        let total = self.0.len().max(1);
        self.0.iter().filter(|&&w| w == 0.0).count() as f64 / total as f64
    }
}

#[derive(Debug, Clone)]
enum Adjacency {
    Dense(DMatrix<f64>),
    Sparse(CsrMatrix),
}

/// `L = I - D^{-1/2} W D^{-1/2}`, stored through its normalized adjacency.
///
/// Zero-degree nodes use `d^{-1/2} = 0`, so their Laplacian row is the
/// identity row.
#[derive(Debug, Clone)]
pub struct NormalizedLaplacian {
    adjacency: Adjacency,
    degree: DVector<f64>,
}

pub fn normalized_laplacian(w: &AffinityMatrix) -> NormalizedLaplacian {
    let degree = w.degrees();
    let inv_sqrt: Vec<f64> = degree
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let n = w.n();
    let mut s = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let wij = w.weights()[(i, j)];
            if wij != 0.0 {
                s[(i, j)] = inv_sqrt[i] * wij * inv_sqrt[j];
            }
        }
    }
    // inv_sqrt[i] * w_ij * inv_sqrt[j] is not bitwise symmetric in general
    for j in 0..n {
        for i in (j + 1)..n {
            let avg = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = avg;
            s[(j, i)] = avg;
        }
    }
    let adjacency = if w.zero_fraction() >= SPARSE_ZERO_FRACTION {
        Adjacency::Sparse(CsrMatrix::from_dense(&s))
    } else {
        Adjacency::Dense(s)
    };
    NormalizedLaplacian { adjacency, degree }
}

impl NormalizedLaplacian {
    pub fn n(&self) -> usize {
        self.degree.len()
    }

    pub fn degree(&self) -> &DVector<f64> {
        &self.degree
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.adjacency, Adjacency::Sparse(_))
    }

    /// `D^{-1/2} W D^{-1/2}` times `x`.
    pub(crate) fn adjacency_mul(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.adjacency {
            Adjacency::Dense(s) => s * x,
            Adjacency::Sparse(s) => s.mul_dense(x),
        }
    }

    /// `L x`.
    pub fn mul(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_rows(x.nrows())?;
        Ok(x - self.adjacency_mul(x))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let s = match &self.adjacency {
            Adjacency::Dense(s) => s.clone(),
            Adjacency::Sparse(s) => s.to_dense(),
        };
        DMatrix::identity(self.n(), self.n()) - s
    }

    pub(crate) fn check_rows(&self, rows: usize) -> Result<()> {
        if rows != self.n() {
            return Err(Error::contract(format!(
                "graph has {} nodes but the signal has {rows} rows",
                self.n()
            )));
        }
        Ok(())
    }
}
