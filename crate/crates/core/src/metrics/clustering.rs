use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::hungarian::hungarian_assign;
use crate::error::{Error, Result};

/// ACC, NMI and purity of one partition against ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub acc: f64,
    pub nmi: f64,
    pub pur: f64,
}

/// Co-occurrence counts: rows are predicted clusters, columns true classes.
///
/// Cluster ids are compacted in ascending order of their original values.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    counts: Vec<Vec<usize>>,
    total: usize,
}

fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let ids: BTreeMap<usize, usize> = labels
        .iter()
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();
    (labels.iter().map(|l| ids[l]).collect(), ids.len())
}

impl ContingencyTable {
    pub fn new(pred: &[usize], truth: &[usize]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::parameter(format!(
                "label length mismatch: predicted {} vs truth {}",
                pred.len(),
                truth.len()
            )));
        }
        if pred.is_empty() {
            return Err(Error::parameter("label vectors are empty"));
        }
        let (p, rows) = compact(pred);
        let (t, cols) = compact(truth);
        let mut counts = vec![vec![0usize; cols]; rows];
        for (&i, &j) in p.iter().zip(&t) {
            counts[i][j] += 1;
        }
        Ok(Self {
            counts,
            total: pred.len(),
        })
    }

    pub fn rows(&self) -> usize {
        self.counts.len()
    }

    pub fn cols(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn count(&self, pred: usize, truth: usize) -> usize {
        self.counts[pred][truth]
    }

    fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    fn col_sums(&self) -> Vec<usize> {
        (0..self.cols())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }
}

/// Clustering accuracy under the best one-to-one cluster-to-class mapping.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    let size = table.rows().max(table.cols());
    let max_count = table.counts.iter().flatten().copied().max().unwrap_or(0) as f64;
    // zero padding makes the table square when cluster counts differ
    let cost = DMatrix::from_fn(size, size, |i, j| {
        let c = if i < table.rows() && j < table.cols() {
            table.count(i, j)
        } else {
            0
        };
        max_count - c as f64
    });
    let assignment = hungarian_assign(&cost)?;
    let matched: usize = assignment
        .row_to_col
        .iter()
        .enumerate()
        .filter(|&(i, &j)| i < table.rows() && j < table.cols())
        .map(|(i, &j)| table.count(i, j))
        .sum();
    Ok(matched as f64 / table.total() as f64)
}

fn sorted_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.into_iter().sum()
}

fn entropy(sizes: &[usize], n: f64) -> f64 {
    let terms = sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.ln()
        })
        .collect();
    sorted_sum(terms)
}

/// Normalized mutual information `I(Y, L) / sqrt(H(Y) H(L))`, natural logs.
///
/// Two single-cluster partitions score 1; otherwise a zero-entropy side
/// scores 0. Terms are summed in sorted order so the result is exactly
/// symmetric in its arguments.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    let n = table.total() as f64;
    let rows = table.row_sums();
    let cols = table.col_sums();
    let h_pred = entropy(&rows, n);
    let h_truth = entropy(&cols, n);
    if rows.len() == 1 && cols.len() == 1 {
        return Ok(1.0);
    }
    if h_pred == 0.0 || h_truth == 0.0 {
        return Ok(0.0);
    }
    let mut terms = Vec::new();
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                terms.push(c / n * (n * c / (rows[i] as f64 * cols[j] as f64)).ln());
            }
        }
    }
    let mi = sorted_sum(terms).max(0.0);
    Ok((mi / (h_pred * h_truth).sqrt()).min(1.0))
}

/// Fraction of samples in the majority true class of their predicted cluster.
pub fn purity(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(pred, truth)?;
    let majority: usize = table
        .counts
        .iter()
        .map(|r| r.iter().copied().max().unwrap_or(0))
        .sum();
    Ok(majority as f64 / table.total() as f64)
}

pub fn score_all(pred: &[usize], truth: &[usize]) -> Result<Scores> {
    Ok(Scores {
        acc: accuracy(pred, truth)?,
        nmi: nmi(pred, truth)?,
        pur: purity(pred, truth)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_examples() {
        let truth = [0, 0, 1, 1, 2, 2];
        assert_eq!(accuracy(&truth, &truth).unwrap(), 1.0);
        assert_eq!(accuracy(&[5, 5, 9, 9, 1, 1], &truth).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 1, 0, 1], &[0, 0, 1, 1]).unwrap(), 0.5);
    }

    #[test]
    fn accuracy_with_unequal_cluster_counts() {
        // three predicted clusters against two classes
        assert_eq!(accuracy(&[0, 0, 1, 2], &[0, 0, 1, 1]).unwrap(), 0.75);
        assert_eq!(accuracy(&[0, 0, 0, 0], &[0, 0, 1, 1]).unwrap(), 0.5);
    }

    #[test]
    fn nmi_examples() {
        assert!((nmi(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(nmi(&[3, 3, 3, 3], &[0, 0, 1, 1]).unwrap(), 0.0);
        assert!(nmi(&[0, 1, 0, 1], &[0, 0, 1, 1]).unwrap().abs() < 1e-15);
        assert_eq!(nmi(&[1, 1], &[4, 4]).unwrap(), 1.0);
    }

    #[test]
    fn nmi_hand_value() {
        // table [[2,0],[1,1]]: I = 0.5 ln(4/3) + 0.25 ln(2/3) + 0.25 ln 2
        let pred = [0, 0, 1, 1];
        let truth = [0, 0, 0, 1];
        let mi = 0.5 * (4.0f64 / 3.0).ln() + 0.25 * (2.0f64 / 3.0).ln() + 0.25 * 2f64.ln();
        let h_pred = 2f64.ln();
        let h_truth = -(0.75 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        let expected = mi / (h_pred * h_truth).sqrt();
        assert!((nmi(&pred, &truth).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn purity_examples() {
        assert_eq!(purity(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(purity(&[0, 0, 1, 1], &[0, 0, 0, 1]).unwrap(), 0.75);
        assert_eq!(purity(&[0; 5], &[0, 1, 1, 2, 1]).unwrap(), 0.6);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(accuracy(&[0], &[0, 1]), Err(Error::Parameter(_))));
        assert!(matches!(nmi(&[0], &[0, 1]), Err(Error::Parameter(_))));
        assert!(matches!(purity(&[0], &[0, 1]), Err(Error::Parameter(_))));
        assert!(matches!(accuracy(&[], &[]), Err(Error::Parameter(_))));
    }
}
