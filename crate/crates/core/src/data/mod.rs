//! Datasets: CSV and binary matrix files, label files, synthetic
//! union-of-subspaces and image fixtures, and noise injection.

mod binary;
mod csvio;
mod synth;

use nalgebra::DMatrix;

pub use binary::{is_binary_file, read_binary, write_binary, BINARY_MAGIC};
pub use csvio::{canonicalize_labels, load_csv, load_labels, save_csv, save_labels};
pub use synth::{
    add_gaussian_noise, as_images, flatten_image, gen_piecewise_images, gen_subspaces,
    ImageFixtureSpec, SubspaceSpec,
};

use crate::error::{Error, Result};

/// Features with optional ground-truth labels in `0..g`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    pub features: DMatrix<f64>,
    pub labels: Option<Vec<usize>>,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, features: DMatrix<f64>, labels: Option<Vec<usize>>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != features.nrows() {
                return Err(Error::contract(format!(
                    "{} labels for {} samples",
                    l.len(),
                    features.nrows()
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            features,
            labels,
        })
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn m(&self) -> usize {
        self.features.ncols()
    }

    /// Number of distinct classes, when labels are present.
    pub fn classes(&self) -> Option<usize> {
        self.labels
            .as_ref()
            .map(|l| l.iter().copied().max().map_or(0, |m| m + 1))
    }
}

/// Loads a feature file, sniffing the binary format by its magic bytes.
///
/// `has_labels` applies to CSV input only.
pub fn load_features(path: &std::path::Path, has_labels: bool) -> Result<LabeledDataset> {
    if is_binary_file(path)? {
        let features = read_binary(path)?;
        let name = dataset_name(path);
        LabeledDataset::new(name, features, None)
    } else {
        load_csv(path, has_labels)
    }
}

pub(crate) fn dataset_name(path: &std::path::Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string())
}

/// Per-feature z-scoring with the population standard deviation.
///
/// Constant features are centered and left at zero.
pub fn standardize(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows() as f64;
    let mut out = x.clone();
    for mut col in out.column_iter_mut() {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        for v in col.iter_mut() {
            *v -= mean;
            if std > 0.0 {
                *v /= std;
            }
        }
    }
    out
}
