use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::numerics::solve_spd;

/// Ridge added to the pooled covariance, relative to its mean diagonal.
pub const FISHER_RIDGE: f64 = 1e-9;

struct ClassMoments {
    mean: DVector<f64>,
    /// Biased (`1/n`) covariance.
    cov: DMatrix<f64>,
}

fn moments(samples: &DMatrix<f64>) -> Result<ClassMoments> {
    let n = samples.nrows();
    if n == 0 {
        return Err(Error::parameter("Fisher score needs nonempty classes"));
    }
    let mean = samples.row_mean().transpose();
    let mut centered = samples.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let cov = centered.transpose() * &centered / n as f64;
    Ok(ClassMoments { mean, cov })
}

fn score(a: &ClassMoments, b: &ClassMoments) -> Result<f64> {
    let m = a.mean.len();
    let mut pooled = &a.cov + &b.cov;
    let ridge = FISHER_RIDGE * pooled.trace() / m as f64;
    for i in 0..m {
        pooled[(i, i)] += ridge;
    }
    let diff = &a.mean - &b.mean;
    let rhs = DMatrix::from_column_slice(m, 1, diff.as_slice());
    let sol = solve_spd(&pooled, &rhs)
        .map_err(|e| Error::numerical(format!("pooled class covariance is singular: {e}")))?;
    Ok(diff.dot(&sol.column(0)).max(0.0))
}

/// Two-class Fisher score `(mu_i - mu_j)^T (S_i + S_j)^{-1} (mu_i - mu_j)`.
///
/// Rows are samples. Covariances use the `1/n` estimator; the pooled
/// covariance gets a ridge of `1e-9 * trace / m` before the solve.
pub fn fisher_score(class_a: &DMatrix<f64>, class_b: &DMatrix<f64>) -> Result<f64> {
    if class_a.ncols() != class_b.ncols() {
        return Err(Error::contract(format!(
            "classes have {} and {} features",
            class_a.ncols(),
            class_b.ncols()
        )));
    }
    score(&moments(class_a)?, &moments(class_b)?)
}

fn class_rows(x: &DMatrix<f64>, labels: &[usize]) -> BTreeMap<usize, DMatrix<f64>> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    groups
        .into_iter()
        .map(|(l, rows)| (l, x.select_rows(rows.iter())))
        .collect()
}

/// Mean Fisher score over all unordered pairs of classes.
pub fn mean_pairwise_fisher(x: &DMatrix<f64>, labels: &[usize]) -> Result<f64> {
    if labels.len() != x.nrows() {
        return Err(Error::parameter(format!(
            "{} labels for {} samples",
            labels.len(),
            x.nrows()
        )));
    }
    let classes: Vec<ClassMoments> = class_rows(x, labels)
        .values()
        .map(moments)
        .collect::<Result<_>>()?;
    if classes.len() < 2 {
        return Err(Error::parameter("Fisher score needs at least two classes"));
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..classes.len() {
        for j in (i + 1)..classes.len() {
            total += score(&classes[i], &classes[j])?;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}
