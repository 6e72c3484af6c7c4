use nalgebra::DMatrix;

use crate::data::{add_gaussian_noise, as_images, LabeledDataset};
use crate::error::{Error, Result};
use crate::graph::{knn_affinity, normalized_laplacian, GraphFilter};
use crate::metrics::{mean_pairwise_fisher, psnr, score_all, ssim, ImagePair, Scores};
use crate::numerics::SeededRng;
use crate::selfexpress::{lsr_affinity, LsrConfig};
use crate::spectral::{cluster, SpectralConfig};

pub const DEFAULT_KNN: usize = 30;
pub const DEFAULT_NOISE_MEAN: f64 = 1.0;
pub const DEFAULT_NOISE_SIGMA: f64 = 0.05;

/// Gaussian corruption `N(mean, sigma^2)` added to every pixel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub mean: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AblationConfig {
    pub height: usize,
    pub width: usize,
    pub noise: Option<NoiseSpec>,
    pub k_max: u32,
    pub knn: usize,
    /// Ridge weight of the LSR model clustered at every order.
    pub alpha: f64,
    pub g: Option<usize>,
    pub seed: u64,
    pub restarts: usize,
    /// Defaults to the value range of the clean data.
    pub dynamic_range: Option<f64>,
}

impl AblationConfig {
    pub fn new(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            noise: Some(NoiseSpec {
                mean: DEFAULT_NOISE_MEAN,
                sigma: DEFAULT_NOISE_SIGMA,
            }),
            k_max: 10,
            knn: DEFAULT_KNN,
            alpha: 0.01,
            g: None,
            seed: 0,
            restarts: 20,
            dynamic_range: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AblationRow {
    pub k: u32,
    /// Mean over samples; `f64::INFINITY` when every image is reproduced exactly.
    pub psnr: f64,
    pub ssim: f64,
    pub fisher: f64,
    pub scores: Scores,
}

pub const ABLATION_HEADER: [&str; 7] = ["k", "psnr", "ssim", "fisher", "acc", "nmi", "pur"];

fn image_quality(clean: &[DMatrix<f64>], x: &DMatrix<f64>, cfg: &AblationConfig, range: f64) -> Result<(f64, f64)> {
    let images = as_images(x, cfg.height, cfg.width)?;
    let (mut p, mut s) = (0.0, 0.0);
    for (a, b) in clean.iter().zip(&images) {
        let pair = ImagePair::new(a, b, Some(range))?;
        p += psnr(&pair);
        s += ssim(&pair);
    }
    let n = clean.len() as f64;
    Ok((p / n, s / n))
}

/// Filter-order study on a fixed kNN prior graph.
///
/// The graph is built once on the (optionally corrupted) features; row `k`
/// scores `(I - L/2)^k` applied to them against the clean images, and
/// clusters the filtered features with LSR.
pub fn run_ablation(clean: &LabeledDataset, cfg: &AblationConfig) -> Result<Vec<AblationRow>> {
    let labels = clean
        .labels
        .as_deref()
        .ok_or_else(|| Error::usage("ablate needs labels"))?;
    if cfg.height * cfg.width != clean.m() {
        return Err(Error::usage(format!(
            "{}x{} images need {} features, found {}",
            cfg.height,
            cfg.width,
            cfg.height * cfg.width,
            clean.m()
        )));
    }
    let g = cfg.g.or_else(|| clean.classes()).unwrap_or(1);
    let range = match cfg.dynamic_range {
        Some(r) => r,
        None => clean.features.max() - clean.features.min(),
    };
    let corrupted = match cfg.noise {
        Some(n) => add_gaussian_noise(&clean.features, n.mean, n.sigma, cfg.seed)?,
        None => clean.features.clone(),
    };
    let references = as_images(&clean.features, cfg.height, cfg.width)?;
    let graph = knn_affinity(&corrupted, cfg.knn)?;
    let one_step = GraphFilter::new(1, normalized_laplacian(&graph));
    let spectral_cfg = SpectralConfig::with_restarts(cfg.restarts);

    let mut rows = Vec::with_capacity(cfg.k_max as usize + 1);
    let mut filtered = corrupted;
    for k in 0..=cfg.k_max {
        if k > 0 {
            filtered = one_step.apply(&filtered)?;
        }
        let (p, s) = image_quality(&references, &filtered, cfg, range)?;
        let fisher = mean_pairwise_fisher(&filtered, labels)?;
        let w = lsr_affinity(&filtered, &LsrConfig::new(cfg.alpha))?;
        let pred = cluster(&w, g, &mut SeededRng::new(cfg.seed), &spectral_cfg)?;
        rows.push(AblationRow {
            k,
            psnr: p,
            ssim: s,
            fisher,
            scores: score_all(pred.labels(), labels)?,
        });
    }
    Ok(rows)
}
