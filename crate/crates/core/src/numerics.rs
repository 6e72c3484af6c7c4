//! Dense linear-algebra primitives and the seeded random source.
//!
//! Storage is `nalgebra::DMatrix<f64>`. The symmetric eigensolver and the
//! Cholesky factorization are nalgebra's; this module adds the input
//! contracts, ascending eigenvalue order, and failure diagnostics.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type DenseMatrix = DMatrix<f64>;

/// Relative tolerance used when checking that an input is symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: DVector<f64>,
    /// Column `i` is the unit eigenvector for `eigenvalues[i]`.
    pub eigenvectors: DenseMatrix,
}

impl EigenDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

pub fn frobenius(a: &DenseMatrix) -> f64 {
    a.norm()
}

pub(crate) fn ensure_finite(a: &DenseMatrix, what: &str) -> Result<()> {
    if let Some(pos) = a.iter().position(|v| !v.is_finite()) {
        let (r, c) = (pos % a.nrows(), pos / a.nrows());
        return Err(Error::contract(format!(
            "{what} has a non-finite entry at ({r}, {c})"
        )));
    }
    Ok(())
}

/// Largest entrywise asymmetry `|a_ij - a_ji|`.
pub fn max_asymmetry(a: &DenseMatrix) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

pub(crate) fn ensure_symmetric(a: &DenseMatrix, what: &str) -> Result<()> {
    if !a.is_square() {
        return Err(Error::contract(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    ensure_finite(a, what)?;
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let asym = max_asymmetry(a);
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::contract(format!(
            "{what} is not symmetric (max |a_ij - a_ji| = {asym:.3e})"
        )));
    }
    Ok(())
}

/// Full eigendecomposition of a symmetric matrix.
///
/// The input is symmetrized as `(A + A^T)/2` before factorization so that
/// roundoff-level asymmetry never leaks into the eigenvectors.
pub fn sym_eig(a: &DenseMatrix) -> Result<EigenDecomposition> {
    ensure_symmetric(a, "eigendecomposition input")?;
    let n = a.nrows();
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: DVector::zeros(0),
            eigenvectors: DenseMatrix::zeros(0, 0),
        });
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));

    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Solves `A X = B` for symmetric positive-definite `A` via Cholesky.
pub fn solve_spd(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    ensure_symmetric(a, "SPD system matrix")?;
    ensure_finite(b, "right-hand side")?;
    if b.nrows() != a.nrows() {
        return Err(Error::contract(format!(
            "right-hand side has {} rows, system is {}x{}",
            b.nrows(),
            a.nrows(),
            a.ncols()
        )));
    }
    let sym = (a + a.transpose()) * 0.5;
    match Cholesky::new(sym) {
        Some(chol) => Ok(chol.solve(b)),
        None => {
            let diag = a.diagonal();
            let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
            let dmax = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Err(Error::numerical(format!(
                "Cholesky factorization failed: matrix is singular or indefinite \
                 (diagonal range [{dmin:.3e}, {dmax:.3e}], ratio {:.3e})",
                if dmin > 0.0 { dmax / dmin } else { f64::INFINITY }
            )))
        }
    }
}

/// Deterministic random source: ChaCha8 keyed by a 64-bit seed.
///
/// Identical seeds yield bit-identical streams on every platform.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub const ALGORITHM: &'static str = "chacha8";

    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent generator on a separate ChaCha stream of the same key.
    pub fn substream(&self, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(stream.wrapping_add(1));
        Self {
            seed: self.seed,
            inner,
        }
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

/// `n x m` matrix of independent standard normal draws, filled row by row.
pub fn standard_normal(rng: &mut SeededRng, rows: usize, cols: usize) -> DenseMatrix {
    use rand_distr::{Distribution, StandardNormal};
    let values: Vec<f64> = (0..rows * cols)
        .map(|_| StandardNormal.sample(rng))
        .collect();
    DenseMatrix::from_row_slice(rows, cols, &values)
}
