use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::AffinityMatrix;
use crate::numerics::{ensure_finite, solve_spd};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsrConfig {
    /// Frobenius regularization weight, strictly positive.
    pub alpha: f64,
    /// Zero the diagonal of `Z` after the solve.
    pub zero_diag: bool,
}

impl LsrConfig {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            zero_diag: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::parameter(format!(
                "alpha must be positive and finite, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrrConfig {
    pub base: LsrConfig,
    /// Entries kept per affinity row.
    pub p: usize,
}

impl TrrConfig {
    pub fn new(alpha: f64, p: usize) -> Self {
        Self {
            base: LsrConfig::new(alpha),
            p,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        self.base.validate()?;
        check_p(self.p, n)
    }
}

fn check_p(p: usize, n: usize) -> Result<()> {
    if p == 0 || p > n {
        return Err(Error::parameter(format!("p must lie in [1, {n}], got {p}")));
    }
    Ok(())
}

/// Self-expressive coefficients `n x n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix(DMatrix<f64>);

impl CoefficientMatrix {
    pub fn values(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// `|Z - Z^T|_F / |Z|_F`, zero for a zero matrix.
    pub fn relative_asymmetry(&self) -> f64 {
        let norm = self.0.norm();
        if norm == 0.0 {
            return 0.0;
        }
        (&self.0 - self.0.transpose()).norm() / norm
    }
}

/// Closed-form ridge self-expression `Z = (G + alpha I)^{-1} G`, `G = X X^T`.
///
/// Rows of `xbar` are samples. Solved through a Cholesky factorization of
/// `G + alpha I`.
pub fn lsr_coefficients(xbar: &DMatrix<f64>, cfg: &LsrConfig) -> Result<CoefficientMatrix> {
    cfg.validate()?;
    let n = xbar.nrows();
    if n < 2 {
        return Err(Error::parameter(format!(
            "self-expression needs at least 2 samples, got {n}"
        )));
    }
    ensure_finite(xbar, "feature matrix")?;
    let gram = xbar * xbar.transpose();
    let gram = (&gram + gram.transpose()) * 0.5;
    let mut system = gram.clone();
    for i in 0..n {
        system[(i, i)] += cfg.alpha;
    }
    let mut z = solve_spd(&system, &gram)?;
    if cfg.zero_diag {
        z.fill_diagonal(0.0);
    }
    Ok(CoefficientMatrix(z))
}

/// `W = (|Z^T| + |Z|) / 2`, exactly symmetric.
pub fn affinity_from_coefficients(z: &DMatrix<f64>) -> Result<AffinityMatrix> {
    if !z.is_square() {
        return Err(Error::contract(format!(
            "coefficient matrix must be square, got {}x{}",
            z.nrows(),
            z.ncols()
        )));
    }
    ensure_finite(z, "coefficient matrix")?;
    let n = z.nrows();
    let w = DMatrix::from_fn(n, n, |i, j| {
        // fp addition commutes, so (i, j) and (j, i) match bitwise
        (z[(i, j)].abs() + z[(j, i)].abs()) / 2.0
    });
    Ok(AffinityMatrix::from_symmetric(w))
}

/// Keeps the `p` largest-magnitude entries of every row, zeroing the rest.
///
/// Ties go to the lower column index.
pub fn trr_threshold(w: &DMatrix<f64>, p: usize) -> Result<DMatrix<f64>> {
    check_p(p, w.ncols())?;
    let mut out = DMatrix::zeros(w.nrows(), w.ncols());
    let mut order: Vec<usize> = (0..w.ncols()).collect();
    for i in 0..w.nrows() {
        order.sort_by(|&a, &b| w[(i, b)].abs().total_cmp(&w[(i, a)].abs()).then(a.cmp(&b)));
        for &j in &order[..p] {
            out[(i, j)] = w[(i, j)];
        }
        order.sort_unstable();
    }
    Ok(out)
}

/// One-shot LSR affinity on unfiltered features.
pub fn lsr_affinity(x: &DMatrix<f64>, cfg: &LsrConfig) -> Result<AffinityMatrix> {
    let z = lsr_coefficients(x, cfg)?;
    affinity_from_coefficients(z.values())
}

/// One-shot TRR affinity: LSR affinity, row thresholding, re-symmetrization.
pub fn trr_affinity(x: &DMatrix<f64>, cfg: &TrrConfig) -> Result<AffinityMatrix> {
    cfg.validate(x.nrows())?;
    let w = lsr_affinity(x, &cfg.base)?;
    affinity_from_coefficients(&trr_threshold(w.weights(), cfg.p)?)
}
