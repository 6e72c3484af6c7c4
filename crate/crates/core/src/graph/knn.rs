use nalgebra::DMatrix;

use super::laplacian::AffinityMatrix;
use crate::error::{Error, Result};

/// Rank of the neighbor whose distance sets a node's kernel bandwidth.
pub const BANDWIDTH_NEIGHBOR: usize = 7;

fn squared_distances(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut acc = 0.0;
            for c in 0..x.ncols() {
                let diff = x[(i, c)] - x[(j, c)];
                acc += diff * diff;
            }
            d[(i, j)] = acc;
            d[(j, i)] = acc;
        }
    }
    d
}

/// Gaussian kNN prior graph with self-tuning bandwidths.
///
/// Each sample links to its `neighbors` nearest samples (ties go to the
/// lower index) with weight `exp(-|x_i - x_j|^2 / (sigma_i sigma_j))`, where
/// `sigma_i` is the distance to the 7th nearest neighbor (or the farthest
/// one when fewer exist). The directed graph is symmetrized by taking the
/// elementwise maximum; the diagonal is zero.
pub fn knn_affinity(x: &DMatrix<f64>, neighbors: usize) -> Result<AffinityMatrix> {
    let n = x.nrows();
    if neighbors == 0 || neighbors >= n {
        return Err(Error::parameter(format!(
            "neighbors must lie in [1, {}), got {neighbors}",
            n
        )));
    }
    let d2 = squared_distances(x);

    let ranked: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| d2[(i, a)].total_cmp(&d2[(i, b)]).then(a.cmp(&b)));
            others
        })
        .collect();

    let sigma: Vec<f64> = (0..n)
        .map(|i| {
            let rank = BANDWIDTH_NEIGHBOR.min(n - 1);
            let s = d2[(i, ranked[i][rank - 1])].sqrt();
            if s > 0.0 {
                s
            } else {
                // duplicates fill the first ranks; fall back to the nearest distinct sample
                ranked[i]
                    .iter()
                    .map(|&j| d2[(i, j)])
                    .find(|&v| v > 0.0)
                    .map_or(1.0, f64::sqrt)
            }
        })
        .collect();

    let mut w = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for &j in &ranked[i][..neighbors] {
            let dist = d2[(i, j)];
            let weight = if dist == 0.0 {
                1.0
            } else {
                (-dist / (sigma[i] * sigma[j])).exp().max(f64::MIN_POSITIVE)
            };
            let sym = w[(i, j)].max(weight);
            w[(i, j)] = sym;
            w[(j, i)] = sym;
        }
    }
    Ok(AffinityMatrix::from_symmetric(w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{standard_normal, SeededRng};

    #[test]
    fn identical_points_fully_similar() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]);
        let w = knn_affinity(&x, 1).unwrap();
        assert_eq!(w.weights()[(0, 1)], 1.0);
        assert_eq!(w.weights()[(1, 0)], 1.0);
        assert_eq!(w.weights()[(0, 0)], 0.0);
    }

    #[test]
    fn collinear_points() {
        let x = DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 10.0]);
        let w = knn_affinity(&x, 1).unwrap();
        let w = w.weights();
        assert!(w[(0, 1)] > 0.0 && w[(1, 0)] > 0.0);
        assert!(w[(2, 1)] > 0.0);
        assert_eq!(w[(0, 2)], 0.0);
        // bandwidths fall back to the farthest neighbor: sigma = (10, 9, 10)
        assert!((w[(0, 1)] - (-1.0f64 / 90.0).exp()).abs() < 1e-15);
        assert!((w[(1, 2)] - (-81.0f64 / 90.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn symmetric_with_enough_neighbors() {
        let mut rng = SeededRng::new(12);
        let x = standard_normal(&mut rng, 40, 5);
        for k in [1, 3, 10] {
            let w = knn_affinity(&x, k).unwrap();
            let w = w.weights();
            assert_eq!(w, &w.transpose());
            for i in 0..40 {
                assert_eq!(w[(i, i)], 0.0);
                let nz = (0..40).filter(|&j| j != i && w[(i, j)] > 0.0).count();
                assert!(nz >= k);
            }
        }
    }

    #[test]
    fn neighbor_count_range() {
        let x = DMatrix::zeros(3, 2);
        assert!(matches!(knn_affinity(&x, 0), Err(Error::Parameter(_))));
        assert!(matches!(knn_affinity(&x, 3), Err(Error::Parameter(_))));
    }
}
