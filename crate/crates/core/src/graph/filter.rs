use nalgebra::{DMatrix, DVector};

use super::laplacian::NormalizedLaplacian;
use crate::error::{Error, Result};
use crate::numerics::sym_eig;

/// Low-pass response `h(lambda) = (1 - lambda/2)^k` of the order-`k` filter.
pub fn frequency_response(order: u32, lambda: f64) -> Result<f64> {
    const TOL: f64 = 1e-8;
    if !(-TOL..=2.0 + TOL).contains(&lambda) {
        return Err(Error::contract(format!(
            "graph frequency {lambda} is outside [0, 2]"
        )));
    }
    let lambda = lambda.clamp(0.0, 2.0);
    Ok((1.0 - lambda / 2.0).powi(order as i32))
}

/// Quadratic form `f^T L f`.
pub fn smoothness_energy(laplacian: &NormalizedLaplacian, signal: &DVector<f64>) -> Result<f64> {
    laplacian.check_rows(signal.len())?;
    let f = DMatrix::from_column_slice(signal.len(), 1, signal.as_slice());
    let lf = laplacian.mul(&f)?;
    Ok(signal.dot(&lf.column(0)))
}

/// The order-`k` low-pass filter `(I - L/2)^k` on a fixed graph.
#[derive(Debug, Clone)]
pub struct GraphFilter {
    pub order: u32,
    pub laplacian: NormalizedLaplacian,
}

impl GraphFilter {
    pub fn new(order: u32, laplacian: NormalizedLaplacian) -> Self {
        Self { order, laplacian }
    }

    /// Filters every column of `x` as a graph signal.
    ///
    /// Performs `k` successive products with `(I - L/2) = (I + S)/2`, where
    /// `S` is the normalized adjacency; cost is `O(nnz(S) * m * k)` on the
    /// sparse path. `k = 0` returns `x` unchanged.
    pub fn apply(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.laplacian.check_rows(x.nrows())?;
        let mut out = x.clone();
        for _ in 0..self.order {
            let sx = self.laplacian.adjacency_mul(&out);
            out += sx;
            out *= 0.5;
        }
        Ok(out)
    }
}

/// Reference route through the eigendecomposition: `U h(Lambda) U^T x`.
///
/// `O(n^3)`; meant for diagnostics and cross-checks, not for the pipeline.
pub fn filter_via_spectrum(
    laplacian: &NormalizedLaplacian,
    order: u32,
    x: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    laplacian.check_rows(x.nrows())?;
    let eig = sym_eig(&laplacian.to_dense())?;
    let mut response = DVector::zeros(eig.len());
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        response[i] = frequency_response(order, lambda)?;
    }
    let u = &eig.eigenvectors;
    let coeffs = u.transpose() * x;
    let scaled = DMatrix::from_diagonal(&response) * coeffs;
    Ok(u * scaled)
}
